"""Swarm force laws.

Two attacker models share the same double-integrator form: a
virtual-body artificial-potential (VBAP) model with pairwise
potential forces, and a Reynolds boid model with alignment, cohesion
and separation rules.  Both are extended with a target-tracking force
toward the HVU and a herding (collision-avoidance) response to the
defenders.

All functions here are pure: no shared mutable state, safe to call
from any number of workers.  Per-agent reference implementations
(`vbap_control`, `reynolds_control`) mirror the contract one agent at
a time; the vectorized `*_accelerations` variants are the hot path
used by the simulator and are tested against the reference loops.
The `*_accel_vjp` functions provide analytic Jacobian-transpose
products for the adjoint/costate machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import CoincidentPointError

#: Guard radius: pairwise evaluations below this raise instead of clamping.
R_MIN = 1e-9

FloatArray = NDArray[np.float64]


@dataclass
class Model1Params:
    """VBAP model coefficients.

    alpha, d0, d1 shape the intra-swarm potential; alpha_h, h0 the
    (purely repulsive, h1 = h0) response to defenders; k1 the HVU
    tracking magnitude; k2 the dissipative velocity gain.
    """

    alpha: float
    d0: float
    d1: float
    alpha_h: float
    h0: float
    k1: float
    k2: float

    def __post_init__(self) -> None:
        if not (0.0 < self.d0 < self.d1):
            raise ValueError(f"require 0 < d0 < d1, got d0={self.d0}, d1={self.d1}")
        for name in ("alpha", "alpha_h", "h0", "k1", "k2"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass
class Model2Params:
    """Reynolds boid coefficients: per-force radius/weight pairs plus HVU tracking.

    Each rule keeps its own neighbourhood radius (r_al, r_coh, r_sep);
    (r_i, w_i) govern the separation-style herding response to defenders.
    """

    r_al: float
    w_al: float
    r_coh: float
    w_coh: float
    r_sep: float
    w_sep: float
    r_i: float
    w_i: float
    k1: float

    def __post_init__(self) -> None:
        for name in ("r_al", "r_coh", "r_sep", "r_i"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        # Zero weights are legal: they switch a rule off entirely, which is
        # also how force-free test scenarios are built.
        for name in ("w_al", "w_coh", "w_sep", "w_i", "k1"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")


@dataclass
class SwarmModel:
    """Tagged model choice: kind 'vbap' carries Model1Params, 'reynolds' Model2Params."""

    kind: str
    params: Model1Params | Model2Params

    def __post_init__(self) -> None:
        if self.kind == "vbap":
            if not isinstance(self.params, Model1Params):
                raise ValueError("kind 'vbap' requires Model1Params")
        elif self.kind == "reynolds":
            if not isinstance(self.params, Model2Params):
                raise ValueError("kind 'reynolds' requires Model2Params")
        else:
            raise ValueError(f"unknown model kind {self.kind!r}")


# ---------------------------------------------------------------------------
# Per-agent reference operations
# ---------------------------------------------------------------------------


def vbap_pair_force(xi: FloatArray, xj: FloatArray, alpha: float, d0: float, d1: float) -> FloatArray:
    """Pairwise potential force on agent at ``xi`` from agent at ``xj``.

    Returns -(f(r)/r)*(xi - xj) with f(r) = alpha*(1/r - d0/r^2) inside
    the cutoff r < d1 and zero beyond.  Repulsive for r < d0, attractive
    for d0 < r < d1.
    """
    d = np.asarray(xi, dtype=float) - np.asarray(xj, dtype=float)
    r = float(np.linalg.norm(d))
    if r < R_MIN:
        raise CoincidentPointError(f"pair distance {r:g} below guard radius {R_MIN:g}")
    if r >= d1:
        return np.zeros_like(d)
    f = alpha * (1.0 / r - d0 / r**2)
    return -(f / r) * d


def hvu_tracking_force(xi: FloatArray, y0: FloatArray, k1: float) -> FloatArray:
    """Constant-magnitude attraction toward the HVU: -k1*(xi-y0)/||xi-y0||."""
    d = np.asarray(xi, dtype=float) - np.asarray(y0, dtype=float)
    r = float(np.linalg.norm(d))
    if r < R_MIN:
        raise CoincidentPointError(f"agent-HVU distance {r:g} below guard radius {R_MIN:g}")
    return -k1 * d / r


def neighbor_set(i: int, positions: list[FloatArray], r: float) -> set[int]:
    """Indices j != i with ||x_i - x_j|| < r (strict)."""
    xi = np.asarray(positions[i], dtype=float)
    out = set()
    for j, xj in enumerate(positions):
        if j == i:
            continue
        if np.linalg.norm(xi - np.asarray(xj, dtype=float)) < r:
            out.add(j)
    return out


def vbap_control(
    i: int,
    attacker_pos: list[FloatArray],
    attacker_vel: list[FloatArray],
    defender_pos: list[FloatArray],
    hvu_pos: FloatArray,
    p: Model1Params,
) -> FloatArray:
    """Full VBAP control law for attacker i: intra-swarm + herding + tracking + damping."""
    xi = np.asarray(attacker_pos[i], dtype=float)
    u = np.zeros_like(xi)
    for j, xj in enumerate(attacker_pos):
        if j == i:
            continue
        u = u + vbap_pair_force(xi, xj, p.alpha, p.d0, p.d1)
    for yk in defender_pos:
        u = u + vbap_pair_force(xi, yk, p.alpha_h, p.h0, p.h0)
    u = u + hvu_tracking_force(xi, hvu_pos, p.k1)
    u = u - p.k2 * np.asarray(attacker_vel[i], dtype=float)
    return u


def reynolds_control(
    i: int,
    attacker_pos: list[FloatArray],
    attacker_vel: list[FloatArray],
    defender_pos: list[FloatArray],
    hvu_pos: FloatArray,
    p: Model2Params,
) -> FloatArray:
    """Reynolds control law for attacker i.

    Alignment/cohesion/separation each use their own radius; the herding
    term is a separation rule against defender positions; every term is
    zero when its neighbour set is empty.
    """
    xi = np.asarray(attacker_pos[i], dtype=float)
    vi = np.asarray(attacker_vel[i], dtype=float)
    u = np.zeros_like(xi)

    nal = neighbor_set(i, attacker_pos, p.r_al)
    if nal:
        vavg = np.mean([np.asarray(attacker_vel[j], dtype=float) for j in sorted(nal)], axis=0)
        u = u - p.w_al * (vi - vavg)

    ncoh = neighbor_set(i, attacker_pos, p.r_coh)
    if ncoh:
        xavg = np.mean([np.asarray(attacker_pos[j], dtype=float) for j in sorted(ncoh)], axis=0)
        u = u - p.w_coh * (xi - xavg)

    nsep = neighbor_set(i, attacker_pos, p.r_sep)
    if nsep:
        acc = np.zeros_like(xi)
        for j in sorted(nsep):
            xj = np.asarray(attacker_pos[j], dtype=float)
            r = float(np.linalg.norm(xi - xj))
            if r < R_MIN:
                raise CoincidentPointError(f"separation distance {r:g} below guard radius {R_MIN:g}")
            acc = acc + (xj - xi) / r
        u = u - p.w_sep * acc / len(nsep)

    near = [k for k, yk in enumerate(defender_pos) if np.linalg.norm(xi - np.asarray(yk, dtype=float)) < p.r_i]
    if near:
        acc = np.zeros_like(xi)
        for k in near:
            yk = np.asarray(defender_pos[k], dtype=float)
            r = float(np.linalg.norm(xi - yk))
            if r < R_MIN:
                raise CoincidentPointError(f"herding distance {r:g} below guard radius {R_MIN:g}")
            acc = acc + (yk - xi) / r
        u = u - p.w_i * acc / len(near)

    u = u + hvu_tracking_force(xi, hvu_pos, p.k1)
    return u


# ---------------------------------------------------------------------------
# Vectorized accelerations (simulator hot path)
# ---------------------------------------------------------------------------


def _pair_phi(r: FloatArray, alpha: float, d0: float, d1: float) -> FloatArray:
    """Force coefficient phi(r) with F = phi(r)*(xi-xj); zero at/beyond the cutoff."""
    inside = r < d1
    rs = np.where(inside, r, 1.0)
    return np.where(inside, alpha * (d0 / rs**3 - 1.0 / rs**2), 0.0)


def _pair_phi_prime(r: FloatArray, alpha: float, d0: float, d1: float) -> FloatArray:
    inside = r < d1
    rs = np.where(inside, r, 1.0)
    return np.where(inside, alpha * (-3.0 * d0 / rs**4 + 2.0 / rs**3), 0.0)


def _guard(r: FloatArray, what: str) -> None:
    if np.any(r < R_MIN):
        raise CoincidentPointError(f"{what}: distance below guard radius {R_MIN:g}")


def vbap_accelerations(
    X: FloatArray, V: FloatArray, Y: FloatArray, y0: FloatArray, p: Model1Params
) -> FloatArray:
    """Accelerations of all N attackers at once (VBAP model).

    X, V: (N, n) attacker positions/velocities; Y: (K, n) defender
    positions; y0: (n,) HVU position.
    """
    N = X.shape[0]
    D = X[:, None, :] - X[None, :, :]
    R = np.linalg.norm(D, axis=-1)
    off = ~np.eye(N, dtype=bool)
    _guard(R[off], "attacker-attacker")
    Rm = np.where(off, R, 1.0)
    phi = np.where(off, _pair_phi(Rm, p.alpha, p.d0, p.d1), 0.0)
    acc = np.einsum("jl,jln->jn", phi, D)

    if Y.shape[0] > 0:
        Dd = X[:, None, :] - Y[None, :, :]
        Rd = np.linalg.norm(Dd, axis=-1)
        _guard(Rd, "attacker-defender")
        phid = _pair_phi(Rd, p.alpha_h, p.h0, p.h0)
        acc += np.einsum("jk,jkn->jn", phid, Dd)

    Dh = X - y0[None, :]
    Rh = np.linalg.norm(Dh, axis=-1)
    _guard(Rh, "attacker-HVU")
    acc += -p.k1 * Dh / Rh[:, None]
    acc += -p.k2 * V
    return acc


def vbap_accel_vjp(
    X: FloatArray,
    V: FloatArray,
    Y: FloatArray,
    y0: FloatArray,
    p: Model1Params,
    seed: FloatArray,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Jacobian-transpose products of `vbap_accelerations` against ``seed``.

    Returns (xbar, vbar, ybar): the pullbacks into attacker positions,
    attacker velocities and defender positions.  The pair-force Jacobian
    is symmetric (phi*I + (phi'/r) d d^T), so transpose products reuse it
    directly.
    """
    N = X.shape[0]
    D = X[:, None, :] - X[None, :, :]
    R = np.linalg.norm(D, axis=-1)
    off = ~np.eye(N, dtype=bool)
    Rsafe = np.where(off, R, 1.0)
    phi = np.where(off, _pair_phi(Rsafe, p.alpha, p.d0, p.d1), 0.0)
    dphi = np.where(off, _pair_phi_prime(Rsafe, p.alpha, p.d0, p.d1), 0.0)
    ds = np.einsum("jln,jn->jl", D, seed)
    T = phi[:, :, None] * seed[:, None, :] + ((dphi / Rsafe) * ds)[:, :, None] * D
    xbar = T.sum(axis=1) - T.sum(axis=0)

    ybar = np.zeros_like(Y)
    if Y.shape[0] > 0:
        Dd = X[:, None, :] - Y[None, :, :]
        Rd = np.linalg.norm(Dd, axis=-1)
        phid = _pair_phi(Rd, p.alpha_h, p.h0, p.h0)
        dphid = _pair_phi_prime(Rd, p.alpha_h, p.h0, p.h0)
        dsd = np.einsum("jkn,jn->jk", Dd, seed)
        Td = phid[:, :, None] * seed[:, None, :] + ((dphid / Rd) * dsd)[:, :, None] * Dd
        xbar += Td.sum(axis=1)
        ybar = -Td.sum(axis=0)

    Dh = X - y0[None, :]
    Rh = np.linalg.norm(Dh, axis=-1)
    dsh = np.einsum("jn,jn->j", Dh, seed)
    xbar += -p.k1 * (seed / Rh[:, None] - (dsh / Rh**3)[:, None] * Dh)

    vbar = -p.k2 * seed
    return xbar, vbar, ybar


def _neighbor_mask(R: FloatArray, r: float) -> FloatArray:
    off = ~np.eye(R.shape[0], dtype=bool)
    return off & (R < r)


def reynolds_accelerations(
    X: FloatArray, V: FloatArray, Y: FloatArray, y0: FloatArray, p: Model2Params
) -> FloatArray:
    """Accelerations of all N attackers at once (Reynolds model)."""
    D = X[:, None, :] - X[None, :, :]
    R = np.linalg.norm(D, axis=-1)
    off = ~np.eye(X.shape[0], dtype=bool)
    _guard(R[off], "attacker-attacker")
    acc = np.zeros_like(X)

    mal = _neighbor_mask(R, p.r_al)
    cal = mal.sum(axis=1)
    has = cal > 0
    vavg = np.where(has[:, None], (mal.astype(float) @ V) / np.maximum(cal, 1)[:, None], 0.0)
    acc += np.where(has[:, None], -p.w_al * (V - vavg), 0.0)

    mcoh = _neighbor_mask(R, p.r_coh)
    ccoh = mcoh.sum(axis=1)
    has = ccoh > 0
    xavg = np.where(has[:, None], (mcoh.astype(float) @ X) / np.maximum(ccoh, 1)[:, None], 0.0)
    acc += np.where(has[:, None], -p.w_coh * (X - xavg), 0.0)

    msep = _neighbor_mask(R, p.r_sep)
    csep = msep.sum(axis=1)
    Rsafe = np.where(off, R, 1.0)
    U = D / Rsafe[:, :, None]
    s = np.einsum("jl,jln->jn", msep.astype(float), U)
    acc += np.where(csep[:, None] > 0, p.w_sep * s / np.maximum(csep, 1)[:, None], 0.0)

    if Y.shape[0] > 0:
        Dd = X[:, None, :] - Y[None, :, :]
        Rd = np.linalg.norm(Dd, axis=-1)
        _guard(Rd, "attacker-defender")
        mherd = Rd < p.r_i
        cherd = mherd.sum(axis=1)
        Ud = Dd / Rd[:, :, None]
        sh = np.einsum("jk,jkn->jn", mherd.astype(float), Ud)
        acc += np.where(cherd[:, None] > 0, p.w_i * sh / np.maximum(cherd, 1)[:, None], 0.0)

    Dh = X - y0[None, :]
    Rh = np.linalg.norm(Dh, axis=-1)
    _guard(Rh, "attacker-HVU")
    acc += -p.k1 * Dh / Rh[:, None]
    return acc


def reynolds_accel_vjp(
    X: FloatArray,
    V: FloatArray,
    Y: FloatArray,
    y0: FloatArray,
    p: Model2Params,
    seed: FloatArray,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Jacobian-transpose products of `reynolds_accelerations` against ``seed``.

    Neighbour-set membership is treated as locally constant (the force is
    piecewise smooth in the positions; the boundary set has measure zero).
    """
    D = X[:, None, :] - X[None, :, :]
    R = np.linalg.norm(D, axis=-1)
    off = ~np.eye(X.shape[0], dtype=bool)
    Rsafe = np.where(off, R, 1.0)
    xbar = np.zeros_like(X)
    vbar = np.zeros_like(V)

    mal = _neighbor_mask(R, p.r_al)
    cal = mal.sum(axis=1)
    has = (cal > 0)[:, None]
    vbar += np.where(has, -p.w_al * seed, 0.0)
    w = np.where(has, seed / np.maximum(cal, 1)[:, None], 0.0)
    vbar += p.w_al * (mal.astype(float).T @ w)

    mcoh = _neighbor_mask(R, p.r_coh)
    ccoh = mcoh.sum(axis=1)
    has = (ccoh > 0)[:, None]
    xbar += np.where(has, -p.w_coh * seed, 0.0)
    w = np.where(has, seed / np.maximum(ccoh, 1)[:, None], 0.0)
    xbar += p.w_coh * (mcoh.astype(float).T @ w)

    msep = _neighbor_mask(R, p.r_sep)
    csep = msep.sum(axis=1)
    coef = np.where(msep, p.w_sep / np.maximum(csep, 1)[:, None], 0.0)
    ds = np.einsum("jln,jn->jl", D, seed)
    # per-pair pullback of the unit vector d/r: (I/r - d d^T / r^3) seed
    T = coef[:, :, None] * (seed[:, None, :] / Rsafe[:, :, None] - (ds / Rsafe**3)[:, :, None] * D)
    xbar += T.sum(axis=1) - T.sum(axis=0)

    ybar = np.zeros_like(Y)
    if Y.shape[0] > 0:
        Dd = X[:, None, :] - Y[None, :, :]
        Rd = np.linalg.norm(Dd, axis=-1)
        mherd = Rd < p.r_i
        cherd = mherd.sum(axis=1)
        coefd = np.where(mherd, p.w_i / np.maximum(cherd, 1)[:, None], 0.0)
        dsd = np.einsum("jkn,jn->jk", Dd, seed)
        Td = coefd[:, :, None] * (seed[:, None, :] / Rd[:, :, None] - (dsd / Rd**3)[:, :, None] * Dd)
        xbar += Td.sum(axis=1)
        ybar = -Td.sum(axis=0)

    Dh = X - y0[None, :]
    Rh = np.linalg.norm(Dh, axis=-1)
    dsh = np.einsum("jn,jn->j", Dh, seed)
    xbar += -p.k1 * (seed / Rh[:, None] - (dsh / Rh**3)[:, None] * Dh)
    return xbar, vbar, ybar


def accelerations(
    X: FloatArray, V: FloatArray, Y: FloatArray, y0: FloatArray, model: SwarmModel
) -> FloatArray:
    if model.kind == "vbap":
        return vbap_accelerations(X, V, Y, y0, model.params)
    return reynolds_accelerations(X, V, Y, y0, model.params)


def accel_vjp(
    X: FloatArray,
    V: FloatArray,
    Y: FloatArray,
    y0: FloatArray,
    model: SwarmModel,
    seed: FloatArray,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    if model.kind == "vbap":
        return vbap_accel_vjp(X, V, Y, y0, model.params, seed)
    return reynolds_accel_vjp(X, V, Y, y0, model.params, seed)
