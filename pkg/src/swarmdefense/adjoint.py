"""Continuous-time costates and Hamiltonian diagnostics.

For each parameter node the costate mirrors the node state (attacker
positions/velocities, survival probabilities) plus a per-node copy of
the shared defender states.  The normalized costates satisfy the
standard single-scenario dynamics

    d(lambda)/dt = -(df/dstate)^T lambda,   lambda(T) = dF/dstate,

because the 1/alpha_i scaling of the weighted-Hamiltonian gradient
cancels the alpha_i inside it.  The alpha-scaled costates then satisfy
the weighted-Hamiltonian (unnormalized) dynamics; `weighted_costate_residual`
checks that identity numerically by substituting the scaled costates
into an RK4 finite-difference discretization of the unnormalized
costate ODE.

The shared-defender factorization: the quadrature Hamiltonian's
defender term is  (sum_i alpha_i lambda_y_i) . u, so per-node defender
costates are integrated and their alpha-weighted sum is reported as the
shared defender costate.  This is algebraically identical to
duplicating the defender states per node.

These costates are diagnostics; the optimizer's gradient uses the
discrete adjoint in `swarmdefense.solver` (discretize-then-optimize).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .engagement import (
    ControlSchedule,
    ScenarioConfig,
    Trajectory,
    bind_theta,
    _node_rhs,
    _node_vjp,
)
from .errors import SimulationError
from .quadrature import QuadratureRule, build_rule
from .solver import OptimizationConfig, optimize

FloatArray = NDArray[np.float64]


@dataclass
class CostateEnsemble:
    """Per-node costates on the trajectory time grid, normalized scaling.

    Arrays are indexed [node, time, ...]; ``lam_y`` holds the per-node
    defender costate copies (terminal condition zero).
    """

    times: FloatArray
    lam_x: FloatArray  # (M, T+1, N, n)
    lam_v: FloatArray  # (M, T+1, N, n)
    lam_q: FloatArray  # (M, T+1, N)
    lam_p: FloatArray  # (M, T+1, K+1)
    lam_y: FloatArray  # (M, T+1, K, n)
    jacobian_method: str = "analytic"

    @property
    def M(self) -> int:
        return self.lam_x.shape[0]


@dataclass
class HamiltonianProfile:
    """Quadrature Hamiltonian sampled on the trajectory grid, plus summaries."""

    times: FloatArray
    values: FloatArray
    max_abs: float
    max_dev_from_mean: float


def covector_map(lambda_bar: FloatArray, alpha: float) -> FloatArray:
    """Unnormalized-to-normalized costate map: componentwise division by the weight."""
    if alpha <= 0:
        raise ValueError(f"quadrature weight must be positive, got {alpha}")
    return np.asarray(lambda_bar, dtype=float) / alpha


def _grid_rhs(traj: Trajectory, i: int, model, weapons, cfg: ScenarioConfig):
    """Node i's state derivative at every grid time (for Hermite interpolation)."""
    T = cfg.num_steps
    F = []
    for k in range(T + 1):
        F.append(
            _node_rhs(float(traj.times[k]), traj.X[k, i], traj.V[k, i], traj.Q[k, i], traj.P[k, i], traj.Y[k], model, weapons, cfg)
        )
    return F


def integrate_costates(
    traj: Trajectory,
    ctrl: ControlSchedule,
    rule: QuadratureRule,
    cfg: ScenarioConfig,
) -> CostateEnsemble:
    """Backward RK4 integration of the normalized costate system.

    Terminal condition: -1 in each node's P_0 slot, zero elsewhere.
    Mid-step states come from cubic Hermite interpolation of the stored
    forward trajectory (grid states plus recomputed grid derivatives).
    """
    T = cfg.num_steps
    h = cfg.dt
    M = rule.M
    N, K, n = cfg.n_attackers, cfg.n_defenders, cfg.n
    lam_x = np.zeros((M, T + 1, N, n))
    lam_v = np.zeros((M, T + 1, N, n))
    lam_q = np.zeros((M, T + 1, N))
    lam_p = np.zeros((M, T + 1, K + 1))
    lam_y = np.zeros((M, T + 1, K, n))

    for i in range(M):
        model, weapons = bind_theta(cfg, float(rule.nodes[i]))
        F = _grid_rhs(traj, i, model, weapons, cfg)
        lam_p[i, T, 0] = -1.0  # d(1 - P0)/dP0

        def costate_rhs(t, state, Y, lam):
            lx, lv, lq, lp, ly = lam
            xb, vb, qb, pb, yb = _node_vjp(t, *state, Y, model, weapons, cfg, lx, lv, lq, lp)
            return (-xb, -vb, -qb, -pb, -yb)

        for k in range(T - 1, -1, -1):
            t0, t1 = float(traj.times[k]), float(traj.times[k + 1])
            tm = 0.5 * (t0 + t1)
            s0 = (traj.X[k, i], traj.V[k, i], traj.Q[k, i], traj.P[k, i])
            s1 = (traj.X[k + 1, i], traj.V[k + 1, i], traj.Q[k + 1, i], traj.P[k + 1, i])
            sm = tuple(
                0.5 * (a + b) + (h / 8.0) * (fa - fb)
                for a, b, fa, fb in zip(s0, s1, F[k], F[k + 1])
            )
            Y0g, Y1g = traj.Y[k], traj.Y[k + 1]
            Ym = 0.5 * (Y0g + Y1g) + (h / 8.0) * (traj.U0[k] - traj.U0[k + 1])

            lam1 = (lam_x[i, k + 1], lam_v[i, k + 1], lam_q[i, k + 1], lam_p[i, k + 1], lam_y[i, k + 1])
            g1 = costate_rhs(t1, s1, Y1g, lam1)
            g2 = costate_rhs(tm, sm, Ym, tuple(a - 0.5 * h * b for a, b in zip(lam1, g1)))
            g3 = costate_rhs(tm, sm, Ym, tuple(a - 0.5 * h * b for a, b in zip(lam1, g2)))
            g4 = costate_rhs(t0, s0, Y0g, tuple(a - h * b for a, b in zip(lam1, g3)))
            lam0 = tuple(
                a - (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                for a, b1, b2, b3, b4 in zip(lam1, g1, g2, g3, g4)
            )
            if not all(np.all(np.isfinite(c)) for c in lam0):
                raise SimulationError(f"non-finite costate at node {i}, step {k}, t={t0:g}")
            lam_x[i, k], lam_v[i, k], lam_q[i, k], lam_p[i, k], lam_y[i, k] = lam0

    return CostateEnsemble(traj.times.copy(), lam_x, lam_v, lam_q, lam_p, lam_y)


def defender_costate_total(costates: CostateEnsemble, rule: QuadratureRule) -> FloatArray:
    """Shared defender costate: alpha-weighted sum of per-node copies, (T+1, K, n)."""
    return np.einsum("i,iksn->ksn", rule.weights, costates.lam_y)


def hamiltonian_profile(
    traj: Trajectory,
    costates: CostateEnsemble,
    ctrl: ControlSchedule,
    rule: QuadratureRule,
    cfg: ScenarioConfig,
) -> HamiltonianProfile:
    """Quadrature Hamiltonian sum_i alpha_i lambda_i . f_i at every grid time.

    The running cost is zero for this problem, so the Hamiltonian is the
    pure costate-dynamics inner product, including the shared defender
    contribution lambda_y . u.
    """
    T = cfg.num_steps
    values = np.zeros(T + 1)
    for i in range(rule.M):
        model, weapons = bind_theta(cfg, float(rule.nodes[i]))
        a = float(rule.weights[i])
        for k in range(T + 1):
            t = float(traj.times[k])
            dx, dv, dq, dp = _node_rhs(t, traj.X[k, i], traj.V[k, i], traj.Q[k, i], traj.P[k, i], traj.Y[k], model, weapons, cfg)
            u = ctrl.eval(t)
            values[k] += a * (
                np.sum(costates.lam_x[i, k] * dx)
                + np.sum(costates.lam_v[i, k] * dv)
                + np.sum(costates.lam_q[i, k] * dq)
                + np.sum(costates.lam_p[i, k] * dp)
                + np.sum(costates.lam_y[i, k] * u)
            )
    max_abs = float(np.max(np.abs(values)))
    max_dev = float(np.max(np.abs(values - values.mean())))
    return HamiltonianProfile(traj.times.copy(), values, max_abs, max_dev)


def weighted_costate_residual(
    traj: Trajectory,
    costates: CostateEnsemble,
    rule: QuadratureRule,
    cfg: ScenarioConfig,
) -> float:
    """Defect of the alpha-scaled costates under the unnormalized costate ODE.

    For every node and grid interval, steps alpha_i * lambda_i(t_{k+1})
    backward through one RK4 discretization of the unnormalized dynamics
    d(lambda_bar)/dt = -(df/dstate)^T lambda_bar (the gradient of the
    weighted Hamiltonian in the unnormalized scaling) and compares with
    the stored alpha_i * lambda_i(t_k).  Returns the max defect per unit
    time over all nodes and grid points.
    """
    T = cfg.num_steps
    h = cfg.dt
    worst = 0.0
    for i in range(rule.M):
        model, weapons = bind_theta(cfg, float(rule.nodes[i]))
        a = float(rule.weights[i])
        F = _grid_rhs(traj, i, model, weapons, cfg)

        def bar_rhs(t, state, Y, lam_bar):
            lx, lv, lq, lp, ly = lam_bar
            xb, vb, qb, pb, yb = _node_vjp(t, *state, Y, model, weapons, cfg, lx, lv, lq, lp)
            return (-xb, -vb, -qb, -pb, -yb)

        for k in range(T - 1, -1, -1):
            t0, t1 = float(traj.times[k]), float(traj.times[k + 1])
            tm = 0.5 * (t0 + t1)
            s0 = (traj.X[k, i], traj.V[k, i], traj.Q[k, i], traj.P[k, i])
            s1 = (traj.X[k + 1, i], traj.V[k + 1, i], traj.Q[k + 1, i], traj.P[k + 1, i])
            sm = tuple(
                0.5 * (p + q) + (h / 8.0) * (fp - fq)
                for p, q, fp, fq in zip(s0, s1, F[k], F[k + 1])
            )
            Ym = 0.5 * (traj.Y[k] + traj.Y[k + 1]) + (h / 8.0) * (traj.U0[k] - traj.U0[k + 1])

            bar1 = tuple(
                a * arr[i, k + 1]
                for arr in (costates.lam_x, costates.lam_v, costates.lam_q, costates.lam_p, costates.lam_y)
            )
            g1 = bar_rhs(t1, s1, traj.Y[k + 1], bar1)
            g2 = bar_rhs(tm, sm, Ym, tuple(p - 0.5 * h * q for p, q in zip(bar1, g1)))
            g3 = bar_rhs(tm, sm, Ym, tuple(p - 0.5 * h * q for p, q in zip(bar1, g2)))
            g4 = bar_rhs(t0, s0, traj.Y[k], tuple(p - h * q for p, q in zip(bar1, g3)))
            bar0 = tuple(
                p - (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                for p, b1, b2, b3, b4 in zip(bar1, g1, g2, g3, g4)
            )
            stored0 = tuple(
                a * arr[i, k]
                for arr in (costates.lam_x, costates.lam_v, costates.lam_q, costates.lam_p, costates.lam_y)
            )
            defect = max(float(np.max(np.abs(p - q))) for p, q in zip(bar0, stored0)) / h
            worst = max(worst, defect)
    return worst


def hamiltonian_convergence(
    cfg: ScenarioConfig,
    opt: OptimizationConfig,
    M_list: list[int],
    scheme: str = "trapezoid",
    jobs: int = 1,
) -> list[dict]:
    """Optimize at each node count and record the Hamiltonian magnitude.

    Stages run as a continuation: each node count warm-starts from the
    previous stage's optimum (the coarse-rule solution is already near
    the finer rule's optimum, so later stages only refine).  Returns one
    row per M: {M, max_abs_H, objective, status}; failures are recorded
    and the study continues.
    """
    if cfg.uncertain is None:
        raise ValueError("scenario has no uncertain parameter bound")
    rows: list[dict] = []
    warm = opt.initial_control
    for M in M_list:
        try:
            rule = build_rule(scheme, M, cfg.uncertain)
            stage = dataclasses.replace(opt, initial_control=warm)
            sol = optimize(cfg, rule, stage, jobs=jobs)
            warm = sol.control
            from .engagement import simulate_ensemble

            traj = simulate_ensemble(sol.control, rule, cfg, jobs=jobs)
            costates = integrate_costates(traj, sol.control, rule, cfg)
            prof = hamiltonian_profile(traj, costates, sol.control, rule, cfg)
            rows.append(
                {
                    "M": M,
                    "max_abs_H": prof.max_abs,
                    "objective": sol.objective_value,
                    "status": "ok",
                    "profile": prof,
                    "solution": sol,
                }
            )
        except Exception as err:  # per-M failures recorded, run continues
            rows.append({"M": M, "max_abs_H": float("nan"), "objective": float("nan"), "status": f"error: {err}"})
    return rows
