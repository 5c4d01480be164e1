"""CLI-level checks, including the shipped-fixture acceptance renders."""

from importlib import resources

from swarmplots.cli import main


def fixture(name):
    return str(resources.files("swarmplots") / "fixtures" / name)


def test_acceptance_sweep_render(tmp_path):
    out = tmp_path / "sweep_fig"
    code = main(["sweep", fixture("sweep.csv"), "--out", str(out), "--nominal", "d0=1.0", "--nominal", "h0=3.0"])
    assert code == 0
    assert (tmp_path / "sweep_fig.svg").exists() and (tmp_path / "sweep_fig.png").exists()
    # two swept parameters -> two panels
    svg = (tmp_path / "sweep_fig.svg").read_text()
    assert svg.count('"axes_') == 2 or svg.count("axes_") >= 2


def test_acceptance_hamiltonian_render(tmp_path):
    out = tmp_path / "ham_fig"
    code = main(
        ["hamiltonian"]
        + [fixture(f"hamiltonian_profile_M{m}.csv") for m in (5, 8, 11)]
        + ["--out", str(out)]
    )
    assert code == 0
    svg = (tmp_path / "ham_fig.svg").read_text()
    for m in (5, 8, 11):
        assert f"M={m}" in svg


def test_acceptance_trajectory_render(tmp_path):
    out = tmp_path / "traj_fig"
    code = main(["trajectory", fixture("trajectory.csv"), "--out", str(out), "--times", "0,15,30,45"])
    assert code == 0
    svg = (tmp_path / "traj_fig.svg").read_text()
    # four snapshot panels plus the path overlay
    for label in ("t = 0", "t = 15", "t = 30", "t = 45", "full paths"):
        assert label in svg


def test_empty_csv_exits_nonzero(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    code = main(["sweep", str(empty), "--out", str(tmp_path / "fig")])
    assert code == 1
    assert "empty" in capsys.readouterr().err
    assert not (tmp_path / "fig.svg").exists()


def test_bad_nominal_flag(tmp_path, capsys):
    code = main(["sweep", fixture("sweep.csv"), "--out", str(tmp_path / "f"), "--nominal", "d0"])
    assert code == 1


def test_missing_file(tmp_path):
    assert main(["trajectory", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "f")]) == 1
