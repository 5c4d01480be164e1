"""Command-line renderer: one subcommand per figure kind."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarmplots", description="Render figures from swarm-defense CSV outputs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="cost-vs-parameter comparison curves")
    p.add_argument("csv", help="sweep CSV (parameter,theta,cost_*)")
    p.add_argument("--out", required=True, help="output stem; .svg and .png are appended")
    p.add_argument("--nominal", action="append", default=[], metavar="PARAM=VALUE", help="mark a nominal value (repeatable)")
    p.add_argument("--title", default=None)

    p = sub.add_parser("hamiltonian", help="Hamiltonian profiles, one curve per CSV")
    p.add_argument("csv", nargs="+", help="profile CSVs (t,H_value)")
    p.add_argument("--out", required=True)
    p.add_argument("--title", default=None)

    p = sub.add_parser("trajectory", help="engagement snapshots and path overlay")
    p.add_argument("csv", help="trajectory CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--times", default="0,15,30,45", help="comma-separated snapshot times")
    p.add_argument("--title", default=None)
    return parser


def spec_from_args(args) -> FigureSpec:
    if args.command == "sweep":
        nominal = {}
        for item in args.nominal:
            name, _, value = item.partition("=")
            if not value:
                raise ValueError(f"--nominal: expected PARAM=VALUE, got {item!r}")
            nominal[name] = float(value)
        return FigureSpec(inputs=[args.csv], kind="sweep", output=args.out, nominal=nominal, title=args.title)
    if args.command == "hamiltonian":
        return FigureSpec(inputs=list(args.csv), kind="hamiltonian", output=args.out, title=args.title)
    times = [float(tok) for tok in args.times.split(",") if tok.strip()]
    if not times:
        raise ValueError("--times: empty")
    return FigureSpec(inputs=[args.csv], kind="trajectory", output=args.out, snapshot_times=times, title=args.title)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        for path in render(spec_from_args(args)):
            print(path)
    except (SchemaError, ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
