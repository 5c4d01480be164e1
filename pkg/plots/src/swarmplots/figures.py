"""Figure renderers for the swarm-defense CSV interchange formats.

Three figure kinds are supported, one per CSV schema:

* ``sweep``       -- parameter sweeps (parameter, theta, cost_* columns),
                     one panel per distinct parameter value.
* ``hamiltonian`` -- Hamiltonian profiles (t, H_value), one curve per
                     input file, plus a max|H|-vs-M inset for multiple files.
* ``trajectory``  -- engagement trajectories
                     (t, node_index, agent_kind, agent_index, x, y[, z], Q_or_P),
                     snapshot panels at chosen times plus a path overlay.

Every render writes the figure in both vector (svg) and raster (png)
form next to the requested output stem.  Inputs are never modified.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# Deterministic SVG output: stable element ids and no embedded timestamp,
# so re-rendering the same spec is byte-idempotent.
matplotlib.rcParams["svg.hashsalt"] = "swarmplots"

NOMINAL_MARKER_COLOR = "magenta"
KIND_STYLE = {
    "hvu": dict(color="goldenrod", marker="*", s=160, label="HVU"),
    "attacker": dict(color="crimson", marker="o", s=18, label="attackers"),
    "defender": dict(color="royalblue", marker="o", s=40, label="defenders"),
}


class SchemaError(ValueError):
    """An input CSV does not match the schema its figure kind expects."""


@dataclass
class FigureSpec:
    """What to render: input CSVs, figure kind, output stem, styling."""

    inputs: list[str]
    kind: str  # "sweep" | "hamiltonian" | "trajectory"
    output: str  # extension-less stem; .svg and .png are appended
    title: str | None = None
    nominal: dict[str, float] = field(default_factory=dict)
    snapshot_times: list[float] = field(default_factory=lambda: [0.0, 15.0, 30.0, 45.0])

    def __post_init__(self) -> None:
        if self.kind not in ("sweep", "hamiltonian", "trajectory"):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV required")


def _read_csv(path) -> tuple[list[str], np.ndarray, list[list[str]]]:
    """(header, numeric block where possible, raw rows)."""
    with open(path) as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows) < 2:
        raise SchemaError(f"{path}: empty CSV (no data rows)")
    return rows[0], None, rows[1:]


def _require_columns(header: list[str], needed: list[str], path) -> None:
    for col in needed:
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r} (found {header})")


def _save(fig, output: str) -> list[str]:
    out = []
    for ext in ("svg", "png"):
        path = f"{output}.{ext}"
        metadata = {"Date": None} if ext == "svg" else None
        fig.savefig(path, bbox_inches="tight", dpi=150, metadata=metadata)
        out.append(path)
    plt.close(fig)
    return out


# ---------------------------------------------------------------------------


def render_sweep(spec: FigureSpec) -> list[str]:
    """Cost-vs-parameter curves, one panel per swept parameter."""
    path = spec.inputs[0]
    header, _, rows = _read_csv(path)
    _require_columns(header, ["parameter", "theta"], path)
    cost_cols = [c for c in header if c.startswith("cost_")]
    if not cost_cols:
        raise SchemaError(f"{path}: missing column 'cost_*' (found {header})")
    idx = {c: header.index(c) for c in header}

    by_param: dict[str, dict[str, list[float]]] = {}
    for row in rows:
        entry = by_param.setdefault(row[idx["parameter"]], {"theta": []})
        entry["theta"].append(float(row[idx["theta"]]))
        for c in cost_cols:
            entry.setdefault(c, []).append(float(row[idx[c]]))

    params = list(by_param)
    fig, axes = plt.subplots(1, len(params), figsize=(4.2 * len(params), 3.4), squeeze=False)
    for ax, name in zip(axes[0], params):
        entry = by_param[name]
        thetas = np.array(entry["theta"])
        for c in cost_cols:
            ax.plot(thetas, entry[c], marker=".", label=c.removeprefix("cost_"))
        if name in spec.nominal:
            th0 = spec.nominal[name]
            ref = np.array(entry[cost_cols[0]])
            y0 = np.interp(th0, thetas, ref)
            ax.plot([th0], [y0], "o", color=NOMINAL_MARKER_COLOR, markersize=9, zorder=5, label="nominal")
        ax.set_xlabel(name)
        ax.set_ylabel("cost  1 − P₀(t_f)")
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
    if spec.title:
        fig.suptitle(spec.title)
    return _save(fig, spec.output)


def render_hamiltonian(spec: FigureSpec) -> list[str]:
    """Overlaid Hamiltonian profiles; max|H|-vs-M inset for multiple inputs."""
    profiles = []
    for path in spec.inputs:
        header, _, rows = _read_csv(path)
        _require_columns(header, ["t", "H_value"], path)
        it, ih = header.index("t"), header.index("H_value")
        t = np.array([float(r[it]) for r in rows])
        h = np.array([float(r[ih]) for r in rows])
        m = re.search(r"M(\d+)", Path(path).stem)
        label = f"M={m.group(1)}" if m else Path(path).stem
        profiles.append((label, t, h))

    t0 = profiles[0][1]
    for label, t, _ in profiles[1:]:
        if t.shape != t0.shape or not np.allclose(t, t0):
            raise SchemaError(f"time grids differ between {profiles[0][0]} and {label}")

    fig, ax = plt.subplots(figsize=(5.4, 3.8))
    for label, t, h in profiles:
        ax.plot(t, h, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\tilde{H}^M(t)$")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8, loc="upper right")
    if len(profiles) > 1:
        inset = ax.inset_axes([0.12, 0.12, 0.3, 0.3])
        maxima = [np.max(np.abs(h)) for _, _, h in profiles]
        inset.plot(range(len(profiles)), maxima, "o-")
        inset.set_xticks(range(len(profiles)))
        inset.set_xticklabels([label for label, _, _ in profiles], fontsize=6)
        inset.set_title(r"max$|\tilde{H}|$", fontsize=7)
        inset.tick_params(labelsize=6)
    if spec.title:
        ax.set_title(spec.title)
    return _save(fig, spec.output)


def _trajectory_frames(path):
    header, _, rows = _read_csv(path)
    base = ["t", "node_index", "agent_kind", "agent_index"]
    _require_columns(header, base + ["x", "y", "Q_or_P"], path)
    dims = [c for c in ("x", "y", "z") if c in header]
    idx = {c: header.index(c) for c in base + dims}
    t = np.array([float(r[idx["t"]]) for r in rows])
    node = np.array([int(r[idx["node_index"]]) for r in rows])
    kind = np.array([r[idx["agent_kind"]] for r in rows])
    pos = np.array([[float(r[idx[c]]) for c in dims] for r in rows])
    return t, node, kind, pos, len(dims)


def render_trajectory(spec: FigureSpec) -> list[str]:
    """Snapshot panels at the requested times, plus a full path overlay."""
    path = spec.inputs[0]
    t, node, kind, pos, ndim = _trajectory_frames(path)
    times = np.unique(t)
    t_f = times.max()
    for ts in spec.snapshot_times:
        if ts > t_f + 1e-9:
            raise SchemaError(f"snapshot time {ts} beyond the trajectory's final time {t_f}")

    sel_node = node == node.min()  # first parameter node only
    n_snap = len(spec.snapshot_times)
    ncols = n_snap + 1
    subplot_kw = {"projection": "3d"} if ndim == 3 else {}
    fig, axes = plt.subplots(1, ncols, figsize=(3.4 * ncols, 3.4), subplot_kw=subplot_kw)
    axes = np.atleast_1d(axes)

    for ax, ts in zip(axes[:n_snap], spec.snapshot_times):
        near = times[np.argmin(np.abs(times - ts))]
        mask = sel_node & (t == near)
        for k, style in KIND_STYLE.items():
            pts = pos[mask & (kind == k)]
            if pts.size:
                ax.scatter(*pts.T, **style)
        ax.set_title(f"t = {near:g}", fontsize=9)

    overlay = axes[-1]
    for k, style in KIND_STYLE.items():
        kmask = sel_node & (kind == k)
        pts = pos[kmask]
        if pts.size:
            overlay.plot(*pts.T, ".", color=style["color"], markersize=1)
    overlay.set_title("full paths", fontsize=9)
    handles = [
        plt.Line2D([], [], color=s["color"], marker="o", linestyle="", label=s["label"])
        for s in KIND_STYLE.values()
    ]
    fig.legend(handles=handles, loc="lower center", ncol=3, fontsize=8)
    if spec.title:
        fig.suptitle(spec.title)
    return _save(fig, spec.output)


RENDERERS = {
    "sweep": render_sweep,
    "hamiltonian": render_hamiltonian,
    "trajectory": render_trajectory,
}


def render(spec: FigureSpec) -> list[str]:
    return RENDERERS[spec.kind](spec)
