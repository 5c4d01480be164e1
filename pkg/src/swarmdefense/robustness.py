"""Performance of fixed control schedules across a parameter grid.

A sweep re-simulates the single-parameter scenario at each grid value
and records the terminal cost 1 - P_0(t_f).  The grid is independent
of any training quadrature rule on purpose: a control optimized on
quadrature nodes must be judged between them, not only where the
optimizer looked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .engagement import ControlSchedule, ScenarioConfig, simulate_ensemble
from .errors import SimulationError
from .quadrature import ParamDomain, rule_at

FloatArray = NDArray[np.float64]


@dataclass
class SweepResult:
    """Terminal cost of one or more controls over a parameter grid.

    ``costs`` maps a label to a cost array aligned with ``thetas``;
    failed grid points carry NaN and an entry in ``errors``.
    """

    parameter: str
    thetas: FloatArray
    costs: dict[str, FloatArray]
    errors: dict[str, dict[int, str]] = field(default_factory=dict)

    def prior_weighted_mean(self, label: str, domain: ParamDomain) -> float:
        """Trapezoid-weighted, prior-folded mean cost over the sweep grid."""
        g = self.thetas
        w = np.full(g.size, g[1] - g[0]) if g.size > 1 else np.array([domain.upper - domain.lower])
        if g.size > 1:
            w[0] *= 0.5
            w[-1] *= 0.5
        w = w * domain.density(g)
        c = self.costs[label]
        return float(np.sum(w * c))

    def worst_case(self, label: str) -> float:
        return float(np.nanmax(self.costs[label]))

    def to_csv(self, path) -> None:
        labels = list(self.costs)
        with open(path, "w") as fh:
            fh.write("parameter,theta," + ",".join(f"cost_{lab}" for lab in labels) + "\n")
            for k, th in enumerate(self.thetas):
                row = ",".join(format(self.costs[lab][k], ".17g") for lab in labels)
                fh.write(f"{self.parameter},{th:.17g},{row}\n")


def sweep(
    ctrl: ControlSchedule,
    domain: ParamDomain,
    G: int,
    cfg: ScenarioConfig,
    label: str = "control",
    jobs: int = 1,
) -> SweepResult:
    """Terminal cost of ``ctrl`` at G uniformly spaced values of the parameter.

    Simulation failures at individual grid points are recorded and the
    sweep continues.
    """
    if G < 2:
        raise ValueError("grid size must be >= 2")
    thetas = np.linspace(domain.lower, domain.upper, G)
    swept_cfg = _with_domain(cfg, domain)
    costs = np.full(G, np.nan)
    errors: dict[int, str] = {}
    for k, th in enumerate(thetas):
        try:
            traj = simulate_ensemble(ctrl, rule_at(float(th), domain), swept_cfg, jobs=jobs)
            costs[k] = 1.0 - float(traj.terminal_p0()[0])
        except SimulationError as err:
            errors[k] = str(err)
    out = SweepResult(domain.name, thetas, {label: costs})
    if errors:
        out.errors[label] = errors
    return out


def compare(
    nominal_ctrl: ControlSchedule,
    robust_ctrl: ControlSchedule,
    domain: ParamDomain,
    G: int,
    cfg: ScenarioConfig,
    jobs: int = 1,
) -> SweepResult:
    """Paired nominal-vs-robust sweep over the same grid."""
    a = sweep(nominal_ctrl, domain, G, cfg, label="nominal", jobs=jobs)
    b = sweep(robust_ctrl, domain, G, cfg, label="robust", jobs=jobs)
    out = SweepResult(domain.name, a.thetas, {"nominal": a.costs["nominal"], "robust": b.costs["robust"]})
    out.errors = {**a.errors, **b.errors}
    return out


def _with_domain(cfg: ScenarioConfig, domain: ParamDomain) -> ScenarioConfig:
    """Scenario with the uncertain binding pointed at ``domain``'s parameter."""
    import dataclasses

    if cfg.uncertain is not None and cfg.uncertain.name == domain.name:
        return cfg
    return dataclasses.replace(cfg, uncertain=domain)
