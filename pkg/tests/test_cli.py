import json

import numpy as np
import pytest
import yaml

from swarmdefense.cli import load_control, main, save_control
from swarmdefense import ControlSchedule

FAST_CONFIG = {
    "scenario": {
        "dim": 3,
        "t_f": 5.0,
        "dt": 0.05,
        "u_max": 2.0,
        "attackers": {"count": 3, "kind": "lattice", "standoff": 8.0, "spacing": 1.0, "jitter": 0.2, "seed": 7},
        "defenders": {"count": 1, "kind": "explicit", "positions": [[4.0, 0.0, 0.0]]},
        "hvu": {"kind": "static", "position": [0.0, 0.0, 0.0]},
        "model": {
            "kind": "vbap",
            "params": {"alpha": 0.5, "d0": 1.0, "d1": 6.0, "alpha_h": 6.0, "h0": 3.0, "k1": 5.0, "k2": 5.0},
        },
        "weapons": {"lambda_d": 2.0, "sigma_d": 2.0, "lambda_a": 0.5, "sigma_a": 2.0},
        "uncertain": {"name": "d0", "lower": 0.5, "upper": 1.5, "nominal": 1.0},
    },
    "optimization": {"max_iterations": 2, "knots": 5, "gradient_tolerance": 1.0e-6},
    "quadrature": {"scheme": "trapezoid", "nodes": 3},
}


@pytest.fixture
def fast_config(tmp_path):
    path = tmp_path / "fast.yaml"
    path.write_text(yaml.safe_dump(FAST_CONFIG))
    return path


def _read(path):
    return path.read_bytes()


def test_missing_field_exits_1(tmp_path, capsys):
    bad = {k: dict(v) for k, v in FAST_CONFIG.items()}
    bad["scenario"] = {k: v for k, v in FAST_CONFIG["scenario"].items() if k != "t_f"}
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(bad))
    code = main(["optimize", str(path), "--out", str(tmp_path / "out")])
    assert code == 1
    assert "scenario.t_f" in capsys.readouterr().err


def test_missing_file_exits_1(tmp_path, capsys):
    assert main(["optimize", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)]) == 1


def test_print_config_round_trips(fast_config, capsys):
    from swarmdefense import config_hash, load_config, parse_config

    code = main(["optimize", str(fast_config), "--print-config", "--out", "unused"])
    assert code == 0
    echoed = parse_config(yaml.safe_load(capsys.readouterr().out))
    assert config_hash(echoed) == config_hash(load_config(fast_config))


def test_optimize_outputs_and_rerun_determinism(fast_config, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    code1 = main(["optimize", str(fast_config), "--out", str(out1), "--jobs", "1"])
    code2 = main(["optimize", str(fast_config), "--out", str(out2), "--jobs", "3"])
    assert code1 == 2 and code2 == 2  # iteration cap, by construction
    for name in ("control.csv", "iterations.csv"):
        assert _read(out1 / name) == _read(out2 / name)
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    m1.pop("timings_s"), m2.pop("timings_s")
    m1.pop("outputs"), m2.pop("outputs")
    assert m1 == m2
    lines = (out1 / "iterations.csv").read_text().splitlines()
    assert lines[0] == "iteration,objective,gradient_norm,step"
    assert len(lines) == 4  # header + initial point + 2 iterations


def test_nominal_flag_is_nodes_1(fast_config, tmp_path):
    main(["optimize", str(fast_config), "--nominal", "--out", str(tmp_path / "nom")])
    main(["optimize", str(fast_config), "--nodes", "1", "--out", str(tmp_path / "one")])
    assert _read(tmp_path / "nom" / "control.csv") == _read(tmp_path / "one" / "control.csv")


def test_sweep_single_and_paired(fast_config, tmp_path):
    out = tmp_path / "opt"
    main(["optimize", str(fast_config), "--out", str(out)])
    ctrl = out / "control.csv"
    code = main(["sweep", str(fast_config), "--control", str(ctrl), "--param", "d0", "--grid", "5", "--out", str(tmp_path / "s1")])
    assert code == 0
    lines = (tmp_path / "s1" / "sweep.csv").read_text().splitlines()
    assert lines[0] == "parameter,theta,cost_control"
    assert len(lines) == 6
    code = main(
        ["sweep", str(fast_config), "--control", str(ctrl), "--control", str(ctrl), "--param", "d0", "--grid", "5", "--out", str(tmp_path / "s2")]
    )
    assert code == 0
    assert (tmp_path / "s2" / "sweep.csv").read_text().splitlines()[0] == "parameter,theta,cost_nominal,cost_robust"


def test_sweep_unknown_param(fast_config, tmp_path, capsys):
    out = tmp_path / "opt"
    main(["optimize", str(fast_config), "--out", str(out)])
    code = main(
        ["sweep", str(fast_config), "--control", str(out / "control.csv"), "--param", "bogus", "--grid", "5", "--out", str(tmp_path / "s")]
    )
    assert code == 1
    assert "bindable" in capsys.readouterr().err


def test_sweep_other_param_needs_bounds(fast_config, tmp_path, capsys):
    out = tmp_path / "opt"
    main(["optimize", str(fast_config), "--out", str(out)])
    args = ["sweep", str(fast_config), "--control", str(out / "control.csv"), "--param", "h0", "--grid", "3", "--out", str(tmp_path / "s")]
    assert main(args) == 1
    assert main(args + ["--lower", "2", "--upper", "4"]) == 0


def test_hamiltonian_outputs(fast_config, tmp_path):
    code = main(["hamiltonian", str(fast_config), "--nodes-list", "1,2", "--out", str(tmp_path / "h")])
    assert code == 0
    conv = (tmp_path / "h" / "hamiltonian_convergence.csv").read_text().splitlines()
    assert conv[0] == "M,max_abs_H,objective,status"
    assert len(conv) == 3
    prof = (tmp_path / "h" / "hamiltonian_profile_M2.csv").read_text().splitlines()
    assert prof[0] == "t,H_value"
    assert len(prof) == 102  # header + 101 grid times


def test_hamiltonian_empty_list(fast_config, tmp_path, capsys):
    assert main(["hamiltonian", str(fast_config), "--nodes-list", "", "--out", str(tmp_path / "h")]) == 1
    assert "nodes-list" in capsys.readouterr().err


def test_control_csv_round_trip(tmp_path, rng):
    ctrl = ControlSchedule(5.0, rng.normal(size=(6, 2, 3)))
    path = tmp_path / "c.csv"
    save_control(ctrl, path)
    back = load_control(path)
    assert back.t_f == ctrl.t_f
    assert np.array_equal(back.u, ctrl.u)
