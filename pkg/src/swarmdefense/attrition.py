"""Damage rates and single-shot survival-probability dynamics.

Each agent carries a survival probability: Q_j for attackers, P_k for
defenders (k = 1..K) and P_0 for the HVU.  Probabilities decay by
mutual attrition; rates depend on distance only.

MODELING SUBSTITUTION: the damage function is the isotropic Gaussian
d(r) = lambda * exp(-r^2 / (2 sigma^2)) with lambda the weapon
intensity and sigma the weapon range.  The originating attrition
reference parameterizes its damage kernel differently; we adopt this
form because the calibration here is purely (intensity, range).

The HVU takes damage (its survival row is P_0) but inflicts none: the
attacker decay sums over defenders k = 1..K only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]


@dataclass
class WeaponParams:
    """Attrition coefficients.

    lambda_d, sigma_d: defender-on-attacker intensity/range.
    lambda_a, sigma_a: attacker-on-defender (and, by default, on-HVU)
    intensity/range.  hvu_lambda/hvu_sigma optionally override the
    attacker weapon as felt by the HVU.
    """

    lambda_d: float
    sigma_d: float
    lambda_a: float
    sigma_a: float
    hvu_lambda: float | None = None
    hvu_sigma: float | None = None

    def __post_init__(self) -> None:
        for name in ("lambda_d", "sigma_d", "lambda_a", "sigma_a"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.sigma_d == 0.0 or self.sigma_a == 0.0:
            raise ValueError("weapon ranges must be positive")

    @property
    def lambda_hvu(self) -> float:
        return self.lambda_a if self.hvu_lambda is None else self.hvu_lambda

    @property
    def sigma_hvu(self) -> float:
        return self.sigma_a if self.hvu_sigma is None else self.hvu_sigma


def damage_rate(r, lam: float, sigma: float):
    """Gaussian damage rate lambda * exp(-r^2 / (2 sigma^2)); vectorized in r."""
    r = np.asarray(r, dtype=float)
    out = lam * np.exp(-(r**2) / (2.0 * sigma**2))
    return out if out.ndim else float(out)


def survival_rhs(
    Q: FloatArray,
    P: FloatArray,
    X: FloatArray,
    Y: FloatArray,
    y0: FloatArray,
    w: WeaponParams,
) -> tuple[FloatArray, FloatArray]:
    """Time derivatives (Qdot, Pdot) of the coupled survival ODEs.

    Q: (N,) attacker survival; P: (K+1,) with P[0] the HVU and P[1:]
    the defenders; X: (N, n) attacker positions; Y: (K, n) defender
    positions; y0: (n,) HVU position.
    """
    if Y.shape[0] > 0:
        Rd = np.linalg.norm(X[:, None, :] - Y[None, :, :], axis=-1)  # (N, K)
        Dy = damage_rate(Rd, w.lambda_d, w.sigma_d)
        Dx = damage_rate(Rd, w.lambda_a, w.sigma_a)
        Qdot = -Q * (Dy @ P[1:])
        Pdot_def = -P[1:] * (Dx.T @ Q)
    else:
        Qdot = np.zeros_like(Q)
        Pdot_def = np.zeros(0)
    Rh = np.linalg.norm(X - y0[None, :], axis=-1)  # (N,)
    Dh = damage_rate(Rh, w.lambda_hvu, w.sigma_hvu)
    Pdot = np.concatenate(([-P[0] * (Dh @ Q)], Pdot_def))
    return Qdot, Pdot


def survival_vjp(
    Q: FloatArray,
    P: FloatArray,
    X: FloatArray,
    Y: FloatArray,
    y0: FloatArray,
    w: WeaponParams,
    aQ: FloatArray,
    aP: FloatArray,
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    """Jacobian-transpose products of `survival_rhs`.

    Given adjoint seeds (aQ, aP) on (Qdot, Pdot), returns the pullbacks
    (Qbar, Pbar, Xbar, Ybar).  The Gaussian rate differentiates to
    d'(r) vec = -d(r) * (displacement) / sigma^2.
    """
    N, n = X.shape
    K = Y.shape[0]
    Qbar = np.zeros_like(Q)
    Pbar = np.zeros_like(P)
    Xbar = np.zeros_like(X)
    Ybar = np.zeros_like(Y)

    if K > 0:
        Dvec = X[:, None, :] - Y[None, :, :]  # (N, K, n)
        Rd = np.linalg.norm(Dvec, axis=-1)
        Dy = damage_rate(Rd, w.lambda_d, w.sigma_d)
        Dx = damage_rate(Rd, w.lambda_a, w.sigma_a)

        # Qdot_j = -Q_j sum_k P_k Dy_jk
        Qbar += aQ * -(Dy @ P[1:])
        Pbar[1:] += -(Dy.T @ (aQ * Q))
        cQ = -(aQ * Q)[:, None] * P[1:][None, :]  # dL/dDy_jk
        GY = -Dy / w.sigma_d**2  # dDy/dr * (1/r) premultiplied form: grad = GY * Dvec
        TQ = (cQ * GY)[:, :, None] * Dvec
        Xbar += TQ.sum(axis=1)
        Ybar += -TQ.sum(axis=0)

        # Pdot_k = -P_k sum_j Q_j Dx_jk   (k = 1..K)
        Pbar[1:] += aP[1:] * -(Dx.T @ Q)
        Qbar += -(Dx @ (aP[1:] * P[1:]))
        cP = -Q[:, None] * (aP[1:] * P[1:])[None, :]  # dL/dDx_jk
        GX = -Dx / w.sigma_a**2
        TP = (cP * GX)[:, :, None] * Dvec
        Xbar += TP.sum(axis=1)
        Ybar += -TP.sum(axis=0)

    # HVU row: Pdot_0 = -P_0 sum_j Q_j Dh_j
    Hvec = X - y0[None, :]
    Rh = np.linalg.norm(Hvec, axis=-1)
    Dh = damage_rate(Rh, w.lambda_hvu, w.sigma_hvu)
    Pbar[0] += aP[0] * -(Dh @ Q)
    Qbar += -aP[0] * P[0] * Dh
    cH = -aP[0] * P[0] * Q  # dL/dDh_j
    GH = -Dh / w.sigma_hvu**2
    Xbar += (cH * GH)[:, None] * Hvec

    return Qbar, Pbar, Xbar, Ybar
