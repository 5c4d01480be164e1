from importlib import resources

import pytest

from swarmplots import FigureSpec, SchemaError, render


def fixture(name):
    return str(resources.files("swarmplots") / "fixtures" / name)


def assert_outputs(paths, stem):
    assert sorted(p.rsplit(".", 1)[1] for p in paths) == ["png", "svg"]
    for p in paths:
        assert p.startswith(str(stem))


def test_sweep_two_parameter_panels(tmp_path):
    spec = FigureSpec(inputs=[fixture("sweep.csv")], kind="sweep", output=str(tmp_path / "fig"), nominal={"d0": 1.0})
    assert_outputs(render(spec), tmp_path / "fig")


def test_sweep_single_curve(tmp_path):
    src = tmp_path / "single.csv"
    src.write_text("parameter,theta,cost_control\nd0,0.5,0.1\nd0,1.0,0.2\nd0,1.5,0.4\n")
    paths = render(FigureSpec(inputs=[str(src)], kind="sweep", output=str(tmp_path / "fig")))
    assert_outputs(paths, tmp_path / "fig")


def test_sweep_missing_cost_column(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("parameter,theta\nd0,0.5\n")
    with pytest.raises(SchemaError, match="cost_"):
        render(FigureSpec(inputs=[str(src)], kind="sweep", output=str(tmp_path / "fig")))


def test_empty_csv_writes_nothing(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text("")
    with pytest.raises(SchemaError, match="empty"):
        render(FigureSpec(inputs=[str(src)], kind="sweep", output=str(tmp_path / "fig")))
    assert not list(tmp_path.glob("fig*"))


def test_hamiltonian_three_profiles(tmp_path):
    spec = FigureSpec(
        inputs=[fixture(f"hamiltonian_profile_M{m}.csv") for m in (5, 8, 11)],
        kind="hamiltonian",
        output=str(tmp_path / "fig"),
    )
    assert_outputs(render(spec), tmp_path / "fig")


def test_hamiltonian_single_profile(tmp_path):
    spec = FigureSpec(inputs=[fixture("hamiltonian_profile_M5.csv")], kind="hamiltonian", output=str(tmp_path / "fig"))
    assert_outputs(render(spec), tmp_path / "fig")


def test_hamiltonian_mismatched_grids(tmp_path):
    other = tmp_path / "short_M2.csv"
    other.write_text("t,H_value\n0,0.1\n1,0.2\n")
    spec = FigureSpec(
        inputs=[fixture("hamiltonian_profile_M5.csv"), str(other)], kind="hamiltonian", output=str(tmp_path / "fig")
    )
    with pytest.raises(SchemaError, match="time grids"):
        render(spec)


def test_trajectory_four_snapshots(tmp_path):
    spec = FigureSpec(inputs=[fixture("trajectory.csv")], kind="trajectory", output=str(tmp_path / "fig"))
    assert_outputs(render(spec), tmp_path / "fig")


def test_trajectory_planar(tmp_path):
    src = tmp_path / "flat.csv"
    rows = ["t,node_index,agent_kind,agent_index,x,y,Q_or_P"]
    for t in (0.0, 1.0, 2.0):
        rows.append(f"{t},0,hvu,0,0,0,1")
        rows.append(f"{t},0,attacker,0,{5 - t},0,1")
        rows.append(f"{t},0,defender,0,2,{t},1")
    src.write_text("\n".join(rows) + "\n")
    spec = FigureSpec(inputs=[str(src)], kind="trajectory", output=str(tmp_path / "fig"), snapshot_times=[0.0, 2.0])
    assert_outputs(render(spec), tmp_path / "fig")


def test_trajectory_time_beyond_final(tmp_path):
    spec = FigureSpec(
        inputs=[fixture("trajectory.csv")],
        kind="trajectory",
        output=str(tmp_path / "fig"),
        snapshot_times=[0.0, 500.0],
    )
    with pytest.raises(SchemaError, match="beyond"):
        render(spec)
    assert not list(tmp_path.glob("fig*"))


def test_rerender_is_idempotent(tmp_path):
    spec = FigureSpec(inputs=[fixture("hamiltonian_profile_M5.csv")], kind="hamiltonian", output=str(tmp_path / "fig"))
    render(spec)
    first = (tmp_path / "fig.svg").read_bytes()
    render(spec)
    assert (tmp_path / "fig.svg").read_bytes() == first


def test_invalid_spec():
    with pytest.raises(ValueError):
        FigureSpec(inputs=["x.csv"], kind="contour", output="y")
    with pytest.raises(ValueError):
        FigureSpec(inputs=[], kind="sweep", output="y")
