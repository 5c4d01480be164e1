"""Command-line front end: optimize, sweep, hamiltonian.

All data interchange is CSV with floats at 17 significant digits so
values round-trip exactly.  Each run writes a ``manifest.json`` tying
outputs to a config hash.  Exit codes: 0 success, 1 error (bad config,
bad arguments, simulation failure), 2 optimizer stopped at the
iteration cap or stalled.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from .adjoint import hamiltonian_convergence
from .config import RunConfig, config_hash, dump_config, load_config
from .engagement import ControlSchedule, bindable_names
from .errors import ConfigError, SimulationError
from .quadrature import SCHEMES, ParamDomain, build_rule
from .robustness import compare, sweep
from .solver import optimize

FMT = "%.17g"


def _version() -> str:
    try:
        return metadata.version("swarmdefense")
    except metadata.PackageNotFoundError:
        return "unknown"


def save_control(ctrl: ControlSchedule, path) -> None:
    S, K, n = ctrl.u.shape
    with open(path, "w") as fh:
        fh.write("t,defender," + ",".join(f"u_{d}" for d in range(n)) + "\n")
        for s, t in enumerate(ctrl.knot_times):
            for k in range(K):
                comps = ",".join(FMT % v for v in ctrl.u[s, k])
                fh.write(f"{FMT % t},{k},{comps}\n")


def load_control(path) -> ControlSchedule:
    rows = np.genfromtxt(path, delimiter=",", skip_header=1)
    if rows.ndim == 1:
        rows = rows[None, :]
    times = np.unique(rows[:, 0])
    K = int(rows[:, 1].max()) + 1
    n = rows.shape[1] - 2
    u = np.zeros((times.size, K, n))
    t_index = {t: s for s, t in enumerate(times)}
    for row in rows:
        u[t_index[row[0]], int(row[1])] = row[2:]
    return ControlSchedule(float(times[-1]), u)


def write_iterations(log, path) -> None:
    with open(path, "w") as fh:
        fh.write("iteration,objective,gradient_norm,step\n")
        for it, J, pg, step in log:
            fh.write(f"{it},{FMT % J},{FMT % pg},{FMT % step}\n")


def write_manifest(out: Path, run: RunConfig, scheme: str, nodes: int, files: dict, timings: dict) -> None:
    s = run.scenario
    manifest = {
        "config_hash": config_hash(run),
        "scheme": scheme,
        "nodes": nodes,
        "scenario": {
            "model": s.model.kind,
            "n_attackers": s.n_attackers,
            "n_defenders": s.n_defenders,
            "dim": s.n,
            "t_f": s.t_f,
            "dt": s.dt,
            "uncertain": None if s.uncertain is None else s.uncertain.name,
        },
        "outputs": {k: str(v) for k, v in files.items()},
        "timings_s": timings,
        "version": _version(),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _load(args) -> RunConfig:
    run = load_config(args.config)
    if getattr(args, "print_config", False):
        sys.stdout.write(dump_config(run))
        raise SystemExit(0)
    return run


def cmd_optimize(args) -> int:
    run = _load(args)
    cfg = run.scenario
    scheme = args.scheme or run.scheme
    nodes = 1 if args.nominal else (args.nodes or run.nodes)
    if cfg.uncertain is None:
        raise ConfigError("scenario.uncertain: missing (required by optimize)")
    rule = build_rule(scheme, nodes, cfg.uncertain)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    sol = optimize(cfg, rule, run.optimization, jobs=args.jobs)
    elapsed = time.perf_counter() - t0

    files = {"control": out / "control.csv", "iterations": out / "iterations.csv"}
    save_control(sol.control, files["control"])
    write_iterations(sol.log, files["iterations"])
    write_manifest(out, run, scheme, nodes, files, {"optimize": elapsed})
    print(
        f"{sol.convergence_flag}: J = {sol.objective_value:.6g}, "
        f"|pg| = {sol.gradient_norm:.3g}, {sol.iterations} iterations"
    )
    return 0 if sol.convergence_flag == "converged" else 2


def _sweep_domain(run: RunConfig, args) -> ParamDomain:
    cfg = run.scenario
    names = bindable_names(cfg)
    if args.param not in names:
        raise ConfigError(f"--param: unknown parameter {args.param!r}; bindable names: {', '.join(sorted(names))}")
    if cfg.uncertain is not None and cfg.uncertain.name == args.param and args.lower is None:
        return cfg.uncertain
    if args.lower is None or args.upper is None:
        raise ConfigError("--param: supply --lower/--upper for a parameter other than the config's uncertain binding")
    return ParamDomain(args.param, args.lower, args.upper)


def cmd_sweep(args) -> int:
    run = _load(args)
    cfg = run.scenario
    domain = _sweep_domain(run, args)
    controls = [load_control(p) for p in args.control]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    if len(controls) == 1:
        result = sweep(controls[0], domain, args.grid, cfg, jobs=args.jobs)
    elif len(controls) == 2:
        result = compare(controls[0], controls[1], domain, args.grid, cfg, jobs=args.jobs)
    else:
        raise ConfigError("--control: expected one or two control files")
    elapsed = time.perf_counter() - t0
    path = out / "sweep.csv"
    result.to_csv(path)
    write_manifest(out, run, run.scheme, run.nodes, {"sweep": path}, {"sweep": elapsed})
    for label, errs in result.errors.items():
        for k, msg in errs.items():
            print(f"warning: {label} grid point {k} failed: {msg}", file=sys.stderr)
    print(f"swept {args.param} over [{domain.lower:g}, {domain.upper:g}] at {args.grid} points")
    return 0


def cmd_hamiltonian(args) -> int:
    run = _load(args)
    cfg = run.scenario
    try:
        M_list = [int(tok) for tok in args.nodes_list.split(",") if tok.strip()]
    except ValueError as err:
        raise ConfigError(f"--nodes-list: {err}") from err
    if not M_list:
        raise ConfigError("--nodes-list: empty")
    if cfg.uncertain is None:
        raise ConfigError("scenario.uncertain: missing (required for the convergence study)")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    rows = hamiltonian_convergence(cfg, run.optimization, M_list, scheme=run.scheme, jobs=args.jobs)
    elapsed = time.perf_counter() - t0

    files = {"convergence": out / "hamiltonian_convergence.csv"}
    with open(files["convergence"], "w") as fh:
        fh.write("M,max_abs_H,objective,status\n")
        for row in rows:
            status = str(row["status"]).replace(",", ";").replace("\n", " ")
            fh.write(f"{row['M']},{FMT % row['max_abs_H']},{FMT % row['objective']},{status}\n")
    for row in rows:
        if row.get("profile") is None:
            continue
        path = out / f"hamiltonian_profile_M{row['M']}.csv"
        files[f"profile_M{row['M']}"] = path
        with open(path, "w") as fh:
            fh.write("t,H_value\n")
            for t, hval in zip(row["profile"].times, row["profile"].values):
                fh.write(f"{FMT % t},{FMT % hval}\n")
    write_manifest(out, run, run.scheme, run.nodes, files, {"hamiltonian": elapsed})
    ok = sum(1 for row in rows if row["status"] == "ok")
    print(f"{ok}/{len(rows)} node counts completed")
    return 0 if ok >= 1 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarmdefense", description="Swarm-defense trajectory optimization.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="scenario config file (YAML)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--jobs", type=int, default=0, help="worker count (0 = all cores)")
        p.add_argument("--print-config", action="store_true", help="echo the normalized config and exit")

    p_opt = sub.add_parser("optimize", help="solve for defender control schedules")
    common(p_opt)
    p_opt.add_argument("--nodes", type=int, default=None, help="quadrature node count")
    p_opt.add_argument("--scheme", choices=SCHEMES, default=None)
    p_opt.add_argument("--nominal", action="store_true", help="optimize at the nominal parameter only (alias for --nodes 1)")
    p_opt.set_defaults(func=cmd_optimize)

    p_sw = sub.add_parser("sweep", help="evaluate saved controls over a parameter grid")
    common(p_sw)
    p_sw.add_argument("--control", action="append", required=True, help="control CSV (repeat for a paired comparison)")
    p_sw.add_argument("--param", required=True, help="scenario parameter to sweep")
    p_sw.add_argument("--grid", type=int, default=21, help="number of grid points")
    p_sw.add_argument("--lower", type=float, default=None)
    p_sw.add_argument("--upper", type=float, default=None)
    p_sw.set_defaults(func=cmd_sweep)

    p_h = sub.add_parser("hamiltonian", help="Hamiltonian magnitude vs quadrature node count")
    common(p_h)
    p_h.add_argument("--nodes-list", default="5,8,11", help="comma-separated node counts")
    p_h.set_defaults(func=cmd_hamiltonian)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs <= 0:
        import os

        args.jobs = os.cpu_count() or 1
    try:
        return args.func(args)
    except SystemExit as err:
        return int(err.code or 0)
    except (ConfigError, SimulationError, FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
