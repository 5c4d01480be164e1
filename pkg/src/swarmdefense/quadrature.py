"""Parameter-space quadrature rules with the prior folded into the weights.

A rule approximates integrals of the form  int h(theta) phi(theta) dtheta
over a bounded 1-D domain.  Weights already include the prior density
phi, so downstream code sums value_i * weight_i and never sees phi.
For a normalized prior the weights sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

SCHEMES = ("trapezoid", "gauss-legendre")


@dataclass
class ParamDomain:
    """Bounds, prior and identity of one uncertain scalar parameter.

    ``name`` is the model/weapon field the parameter binds to (e.g.
    "d0", "h0", "lambda_a").  Only the uniform prior is implemented;
    the field exists so other densities can slot in later.
    """

    name: str
    lower: float
    upper: float
    nominal: float | None = None
    prior: str = "uniform"

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise ValueError(f"require lower < upper, got [{self.lower}, {self.upper}]")
        if self.prior != "uniform":
            raise ValueError(f"unsupported prior {self.prior!r}")
        if self.nominal is not None and not (self.lower <= self.nominal <= self.upper):
            raise ValueError(f"nominal {self.nominal} outside [{self.lower}, {self.upper}]")

    def density(self, theta) -> FloatArray:
        theta = np.asarray(theta, dtype=float)
        return np.full_like(theta, 1.0 / (self.upper - self.lower))

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


@dataclass
class QuadratureRule:
    """Nodes and prior-folded weights; immutable after construction."""

    nodes: FloatArray
    weights: FloatArray
    scheme: str = "trapezoid"
    domain: ParamDomain | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")

    @property
    def M(self) -> int:
        return self.nodes.size


def build_rule(scheme: str, M: int, domain: ParamDomain) -> QuadratureRule:
    """Construct an M-node rule on ``domain`` with the prior folded in.

    M = 1 degenerates to a single node at the domain's nominal value
    (midpoint when no nominal is given) with weight 1.
    """
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    if M == 1:
        node = domain.midpoint if domain.nominal is None else domain.nominal
        return QuadratureRule(np.array([node]), np.array([1.0]), scheme, domain)

    if scheme == "trapezoid":
        nodes = np.linspace(domain.lower, domain.upper, M)
        h = (domain.upper - domain.lower) / (M - 1)
        raw = np.full(M, h)
        raw[0] = raw[-1] = 0.5 * h
    else:
        x, w = np.polynomial.legendre.leggauss(M)
        half = 0.5 * (domain.upper - domain.lower)
        nodes = domain.midpoint + half * x
        raw = w * half
    weights = raw * domain.density(nodes)
    return QuadratureRule(nodes, weights, scheme, domain)


def rule_at(theta: float, domain: ParamDomain | None = None) -> QuadratureRule:
    """Degenerate single-node rule pinned at ``theta`` (weight 1)."""
    return QuadratureRule(np.array([float(theta)]), np.array([1.0]), "degenerate", domain)


def integrate(rule: QuadratureRule, values) -> float:
    """Weighted sum  sum_i values_i * weight_i, in ascending node order."""
    values = np.asarray(values, dtype=float)
    if values.shape != rule.nodes.shape:
        raise ValueError(f"expected {rule.M} values, got {values.shape}")
    total = 0.0
    for v, a in zip(values, rule.weights):
        total += v * a
    return float(total)
