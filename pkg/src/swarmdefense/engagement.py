"""Scenario assembly and forward ensemble integration.

One engagement couples: shared defender kinematics ydot_k = u_k(t),
per-parameter-node attacker dynamics (double integrator driven by the
chosen swarm model, with the uncertain field substituted by the node's
theta) and the survival-probability ODEs.  The ensemble is integrated
by classical fixed-step RK4; the defender path is shared by all nodes
because it does not depend on theta.

Per-node integration is independent given the defender path, so the
ensemble can fan out across workers; results are always gathered in
node-index order so the output is invariant to the worker count.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from . import attrition, models
from .errors import CoincidentPointError, ConfigError, SimulationError
from .models import SwarmModel
from .attrition import WeaponParams
from .quadrature import ParamDomain, QuadratureRule

FloatArray = NDArray[np.float64]

#: Allowed overshoot of survival probabilities outside [0, 1] before the
#: integrator reports a step-stability violation.
SURVIVAL_SLACK = 1e-9


# ---------------------------------------------------------------------------
# Scenario configuration
# ---------------------------------------------------------------------------


@dataclass
class HvuPath:
    """Prescribed HVU trajectory: static, or constant velocity from ``position``."""

    kind: str = "static"
    position: FloatArray = field(default_factory=lambda: np.zeros(3))
    velocity: FloatArray | None = None

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float)
        if self.kind not in ("static", "constant_velocity"):
            raise ConfigError(f"hvu.kind: unknown kind {self.kind!r}")
        if self.kind == "constant_velocity":
            if self.velocity is None:
                raise ConfigError("hvu.velocity: required for constant_velocity path")
            self.velocity = np.asarray(self.velocity, dtype=float)

    def at(self, t: float) -> FloatArray:
        if self.kind == "static":
            return self.position
        return self.position + t * self.velocity


@dataclass
class AttackerInit:
    """Initial attacker states: a seeded jittered lattice, or explicit arrays.

    The lattice is centered at ``standoff`` length units from the origin
    along +x, theta-independent, with all randomness drawn from ``seed``.
    """

    kind: str = "lattice"
    standoff: float = 30.0
    spacing: float = 1.0
    jitter: float = 0.2
    seed: int = 0
    speed: float = 0.0
    positions: FloatArray | None = None
    velocities: FloatArray | None = None

    def states(self, N: int, n: int) -> tuple[FloatArray, FloatArray]:
        if self.kind == "explicit":
            X = np.asarray(self.positions, dtype=float).reshape(N, n)
            V = (
                np.asarray(self.velocities, dtype=float).reshape(N, n)
                if self.velocities is not None
                else np.zeros((N, n))
            )
            return X, V
        if self.kind != "lattice":
            raise ConfigError(f"attackers.kind: unknown kind {self.kind!r}")
        side = int(np.ceil(N ** (1.0 / n)))
        coords = (np.arange(side) - (side - 1) / 2.0) * self.spacing
        grid = np.stack(np.meshgrid(*([coords] * n), indexing="ij"), axis=-1).reshape(-1, n)
        grid = grid[:N]
        rng = np.random.default_rng(self.seed)
        X = grid + rng.uniform(-self.jitter, self.jitter, size=(N, n))
        X[:, 0] += self.standoff
        V = np.zeros((N, n))
        V[:, 0] = -self.speed
        return X, V


@dataclass
class DefenderInit:
    """Initial defender positions: explicit list, or a line picket.

    The line picket spreads K defenders across ``spread`` length units
    perpendicular to the attack axis at ``distance`` from the origin.
    """

    kind: str = "line"
    distance: float = 12.0
    spread: float = 8.0
    positions: FloatArray | None = None

    def states(self, K: int, n: int) -> FloatArray:
        if self.kind == "explicit":
            return np.asarray(self.positions, dtype=float).reshape(K, n)
        if self.kind != "line":
            raise ConfigError(f"defenders.kind: unknown kind {self.kind!r}")
        Y = np.zeros((K, n))
        Y[:, 0] = self.distance
        if K > 1:
            Y[:, 1] = np.linspace(-self.spread / 2.0, self.spread / 2.0, K)
        return Y


@dataclass
class ScenarioConfig:
    """Everything that defines one engagement, minus the control."""

    n: int
    n_attackers: int
    n_defenders: int
    t_f: float
    dt: float
    model: SwarmModel
    weapons: WeaponParams
    hvu: HvuPath = field(default_factory=HvuPath)
    attackers: AttackerInit = field(default_factory=AttackerInit)
    defenders: DefenderInit = field(default_factory=DefenderInit)
    u_max: float = 2.0
    uncertain: ParamDomain | None = None

    def __post_init__(self) -> None:
        if self.n not in (2, 3):
            raise ConfigError(f"scenario.dim: must be 2 or 3, got {self.n}")
        if self.t_f <= 0:
            raise ConfigError(f"scenario.t_f: must be positive, got {self.t_f}")
        if self.dt <= 0:
            raise ConfigError(f"scenario.dt: must be positive, got {self.dt}")
        steps = self.t_f / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigError(f"scenario.dt: {self.dt} does not divide t_f={self.t_f}")
        if self.n_attackers < 1:
            raise ConfigError("scenario.attackers.count: must be >= 1")
        if self.n_defenders < 1:
            raise ConfigError("scenario.defenders.count: must be >= 1")
        if self.u_max <= 0:
            raise ConfigError(f"scenario.u_max: must be positive, got {self.u_max}")
        if self.uncertain is not None:
            bindable = bindable_names(self)
            if self.uncertain.name not in bindable:
                raise ConfigError(
                    f"scenario.uncertain.name: {self.uncertain.name!r} not bindable; "
                    f"choose from {sorted(bindable)}"
                )

    @property
    def num_steps(self) -> int:
        return int(round(self.t_f / self.dt))

    def hvu_position(self, t: float) -> FloatArray:
        return self.hvu.at(t)

    def initial_states(self) -> tuple[FloatArray, FloatArray, FloatArray]:
        """(X0, V0, Y0) for attackers and defenders."""
        X0, V0 = self.attackers.states(self.n_attackers, self.n)
        Y0 = self.defenders.states(self.n_defenders, self.n)
        return X0, V0, Y0


def bindable_names(cfg: ScenarioConfig) -> set[str]:
    """Model and weapon field names the uncertain parameter may bind to."""
    names = {f.name for f in dataclasses.fields(cfg.model.params)}
    names |= {"lambda_d", "sigma_d", "lambda_a", "sigma_a"}
    return names


def bind_theta(cfg: ScenarioConfig, theta: float) -> tuple[SwarmModel, WeaponParams]:
    """Substitute the uncertain field with ``theta``; no-op if none is bound."""
    if cfg.uncertain is None:
        return cfg.model, cfg.weapons
    name = cfg.uncertain.name
    if name in {f.name for f in dataclasses.fields(cfg.model.params)}:
        params = dataclasses.replace(cfg.model.params, **{name: float(theta)})
        return dataclasses.replace(cfg.model, params=params), cfg.weapons
    weapons = dataclasses.replace(cfg.weapons, **{name: float(theta)})
    return cfg.model, weapons


# ---------------------------------------------------------------------------
# Control schedules
# ---------------------------------------------------------------------------


@dataclass
class ControlSchedule:
    """Piecewise-linear defender controls on a uniform knot grid over [0, t_f].

    ``u`` has shape (S+1, K, n): one knot per grid time per defender.
    """

    t_f: float
    u: FloatArray

    def __post_init__(self) -> None:
        self.u = np.asarray(self.u, dtype=float)
        if self.u.ndim != 3:
            raise ValueError("control array must have shape (S+1, K, n)")
        if self.u.shape[0] < 2:
            raise ValueError("need at least two control knots")

    @classmethod
    def zeros(cls, S: int, K: int, n: int, t_f: float) -> "ControlSchedule":
        return cls(t_f, np.zeros((S + 1, K, n)))

    @property
    def S(self) -> int:
        return self.u.shape[0] - 1

    @property
    def knot_times(self) -> FloatArray:
        return np.arange(self.S + 1) * (self.t_f / self.S)

    def segment(self, t: float) -> tuple[int, float]:
        """Knot segment index and interpolation weight for time ``t``."""
        pos = t / (self.t_f / self.S)
        s = min(int(np.floor(pos)), self.S - 1)
        s = max(s, 0)
        return s, pos - s

    def eval(self, t: float) -> FloatArray:
        s, w = self.segment(t)
        return (1.0 - w) * self.u[s] + w * self.u[s + 1]

    def knot_norms(self) -> FloatArray:
        return np.linalg.norm(self.u, axis=-1)

    def is_feasible(self, u_max: float, tol: float = 1e-9) -> bool:
        return bool(np.all(self.knot_norms() <= u_max + tol))

    def projected(self, u_max: float) -> "ControlSchedule":
        norms = self.knot_norms()
        scale = np.where(norms > u_max, u_max / np.where(norms > 0, norms, 1.0), 1.0)
        return ControlSchedule(self.t_f, self.u * scale[..., None])


def project_control(ctrl: ControlSchedule, u_max: float) -> ControlSchedule:
    """Radially project every knot onto the ball of radius ``u_max``."""
    return ctrl.projected(u_max)


# ---------------------------------------------------------------------------
# Dynamics right-hand sides
# ---------------------------------------------------------------------------


@dataclass
class NodeState:
    """State of one parameter node: attacker kinematics plus survival."""

    x: FloatArray
    v: FloatArray
    q: FloatArray
    p: FloatArray


def terminal_cost(node: NodeState) -> float:
    """Scalar engagement cost at t_f: probability the HVU was destroyed."""
    return 1.0 - float(node.p[0])


def _node_rhs(
    t: float,
    x: FloatArray,
    v: FloatArray,
    q: FloatArray,
    p: FloatArray,
    Y: FloatArray,
    model: SwarmModel,
    weapons: WeaponParams,
    cfg: ScenarioConfig,
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    y0 = cfg.hvu_position(t)
    a = models.accelerations(x, v, Y, y0, model)
    qd, pd = attrition.survival_rhs(q, p, x, Y, y0, weapons)
    return v, a, qd, pd


def node_rhs(
    t: float,
    node: NodeState,
    y: FloatArray,
    u: FloatArray,
    theta: float,
    cfg: ScenarioConfig,
) -> NodeState:
    """Per-node state derivative with the uncertain field bound to ``theta``.

    ``u`` is accepted for signature completeness; the node states do not
    depend on it directly (defender kinematics are integrated separately).
    """
    model, weapons = bind_theta(cfg, theta)
    dx, dv, dq, dp = _node_rhs(t, node.x, node.v, node.q, node.p, np.asarray(y, float), model, weapons, cfg)
    return NodeState(dx, dv, dq, dp)


def _node_vjp(
    t: float,
    x: FloatArray,
    v: FloatArray,
    q: FloatArray,
    p: FloatArray,
    Y: FloatArray,
    model: SwarmModel,
    weapons: WeaponParams,
    cfg: ScenarioConfig,
    ax: FloatArray,
    av: FloatArray,
    aq: FloatArray,
    ap: FloatArray,
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray, FloatArray]:
    """Pullback of `_node_rhs` against adjoint seeds on (xdot, vdot, qdot, pdot).

    Returns (xbar, vbar, qbar, pbar, ybar).
    """
    y0 = cfg.hvu_position(t)
    axb, avb, ayb = models.accel_vjp(x, v, Y, y0, model, av)
    qb, pb, sxb, syb = attrition.survival_vjp(q, p, x, Y, y0, weapons, aq, ap)
    xbar = axb + sxb
    vbar = ax + avb
    ybar = ayb + syb
    return xbar, vbar, qb, pb, ybar


# ---------------------------------------------------------------------------
# Trajectories and the forward integrator
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Time-sampled ensemble state, immutable after construction.

    Arrays are indexed [time, node, ...]; ``Y`` is shared across nodes.
    ``U0``/``Umid`` are the control samples at grid and half-grid times
    used by the integrator; the adjoint reuses them bit-for-bit.
    """

    times: FloatArray
    X: FloatArray  # (T+1, M, N, n)
    V: FloatArray  # (T+1, M, N, n)
    Q: FloatArray  # (T+1, M, N)
    P: FloatArray  # (T+1, M, K+1)
    Y: FloatArray  # (T+1, K, n)
    U0: FloatArray  # (T+1, K, n)
    Umid: FloatArray  # (T, K, n)
    rule: QuadratureRule
    cfg: ScenarioConfig

    @property
    def M(self) -> int:
        return self.X.shape[1]

    def node_state(self, i: int, k: int) -> NodeState:
        return NodeState(self.X[k, i], self.V[k, i], self.Q[k, i], self.P[k, i])

    def terminal_p0(self) -> FloatArray:
        """HVU survival probability at t_f for every parameter node."""
        return self.P[-1, :, 0].copy()

    def export_csv(self, path) -> None:
        """Write (t, node_index, agent_kind, agent_index, position..., Q_or_P) rows."""
        cfg = self.cfg
        cols = ["x", "y", "z"][: cfg.n]
        with open(path, "w") as fh:
            fh.write("t,node_index,agent_kind,agent_index," + ",".join(cols) + ",Q_or_P\n")
            for k, t in enumerate(self.times):
                y0 = cfg.hvu_position(t)
                for i in range(self.M):
                    pos = ",".join(format(c, ".17g") for c in y0)
                    fh.write(f"{t:.17g},{i},hvu,0,{pos},{self.P[k, i, 0]:.17g}\n")
                    for j in range(cfg.n_attackers):
                        pos = ",".join(format(c, ".17g") for c in self.X[k, i, j])
                        fh.write(f"{t:.17g},{i},attacker,{j},{pos},{self.Q[k, i, j]:.17g}\n")
                    for d in range(cfg.n_defenders):
                        pos = ",".join(format(c, ".17g") for c in self.Y[k, d])
                        fh.write(f"{t:.17g},{i},defender,{d},{pos},{self.P[k, i, d + 1]:.17g}\n")


def defender_path(ctrl: ControlSchedule, cfg: ScenarioConfig) -> tuple[FloatArray, FloatArray, FloatArray]:
    """(Y, U0, Umid): defender grid states and the control samples driving them.

    With ydot = u(t) the RK4 update collapses to Simpson's rule on u;
    stage values inside each step are Y_n + c*u at the stage time.
    """
    T = cfg.num_steps
    h = cfg.dt
    K, n = cfg.n_defenders, cfg.n
    if ctrl.u.shape[1] != K or ctrl.u.shape[2] != n:
        raise ValueError(f"control shape {ctrl.u.shape} does not match scenario (K={K}, n={n})")
    times = np.arange(T + 1) * h
    U0 = np.stack([ctrl.eval(t) for t in times])
    Umid = np.stack([ctrl.eval(t + 0.5 * h) for t in times[:-1]])
    _, _, Y0 = cfg.initial_states()
    Y = np.empty((T + 1, K, n))
    Y[0] = Y0
    for k in range(T):
        Y[k + 1] = Y[k] + (h / 6.0) * (U0[k] + 4.0 * Umid[k] + U0[k + 1])
    return Y, U0, Umid


def _check_survival(q: FloatArray, p: FloatArray, i: int, step: int, t: float) -> None:
    lo = min(q.min(initial=1.0), p.min(initial=1.0))
    hi = max(q.max(initial=0.0), p.max(initial=0.0))
    if lo < -SURVIVAL_SLACK or hi > 1.0 + SURVIVAL_SLACK:
        raise SimulationError(
            f"survival probability left [0,1] at node {i}, step {step}, t={t:g} "
            f"(min={lo:g}, max={hi:g}); reduce dt below the attrition stability bound"
        )


def _integrate_node(
    i: int,
    theta: float,
    cfg: ScenarioConfig,
    Y: FloatArray,
    U0: FloatArray,
    Umid: FloatArray,
    out: tuple[FloatArray, FloatArray, FloatArray, FloatArray],
) -> None:
    model, weapons = bind_theta(cfg, theta)
    T = cfg.num_steps
    h = cfg.dt
    X0, V0, _ = cfg.initial_states()
    Xo, Vo, Qo, Po = out
    x, v = X0.copy(), V0.copy()
    q = np.ones(cfg.n_attackers)
    p = np.ones(cfg.n_defenders + 1)
    Xo[0, i], Vo[0, i], Qo[0, i], Po[0, i] = x, v, q, p
    try:
        for k in range(T):
            t = k * h
            Y2 = Y[k] + 0.5 * h * U0[k]
            Y3 = Y[k] + 0.5 * h * Umid[k]
            Y4 = Y[k] + h * Umid[k]
            k1 = _node_rhs(t, x, v, q, p, Y[k], model, weapons, cfg)
            s2 = tuple(a + 0.5 * h * b for a, b in zip((x, v, q, p), k1))
            k2 = _node_rhs(t + 0.5 * h, *s2, Y2, model, weapons, cfg)
            s3 = tuple(a + 0.5 * h * b for a, b in zip((x, v, q, p), k2))
            k3 = _node_rhs(t + 0.5 * h, *s3, Y3, model, weapons, cfg)
            s4 = tuple(a + h * b for a, b in zip((x, v, q, p), k3))
            k4 = _node_rhs(t + h, *s4, Y4, model, weapons, cfg)
            x, v, q, p = tuple(
                a + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                for a, b1, b2, b3, b4 in zip((x, v, q, p), k1, k2, k3, k4)
            )
            _check_survival(q, p, i, k + 1, t + h)
            Xo[k + 1, i], Vo[k + 1, i], Qo[k + 1, i], Po[k + 1, i] = x, v, q, p
    except CoincidentPointError as err:
        raise SimulationError(f"node {i} (theta={theta:g}), step {k}, t={t:g}: {err}") from err


def simulate_ensemble(
    ctrl: ControlSchedule,
    rule: QuadratureRule,
    cfg: ScenarioConfig,
    jobs: int = 1,
) -> Trajectory:
    """Integrate the full ensemble forward; deterministic for fixed inputs.

    ``jobs`` > 1 fans the independent per-node integrations out over a
    thread pool; outputs are identical regardless of worker count.
    """
    if not ctrl.is_feasible(cfg.u_max):
        raise ValueError("control schedule violates the per-knot norm bound")
    Y, U0, Umid = defender_path(ctrl, cfg)
    T = cfg.num_steps
    M = rule.M
    N, K, n = cfg.n_attackers, cfg.n_defenders, cfg.n
    X = np.empty((T + 1, M, N, n))
    V = np.empty((T + 1, M, N, n))
    Q = np.empty((T + 1, M, N))
    P = np.empty((T + 1, M, K + 1))
    out = (X, V, Q, P)
    if jobs > 1 and M > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_integrate_node, i, float(rule.nodes[i]), cfg, Y, U0, Umid, out)
                for i in range(M)
            ]
            for f in futures:
                f.result()
    else:
        for i in range(M):
            _integrate_node(i, float(rule.nodes[i]), cfg, Y, U0, Umid, out)
    times = np.arange(T + 1) * cfg.dt
    return Trajectory(times, X, V, Q, P, Y, U0, Umid, rule, cfg)
