"""First-order stationarity system for sphere-constrained maximization.

For a homogeneous objective f0 of even degree 2d and the sphere constraint
f1 = sum x_i^2 - 1, every constrained critical point makes all 2x2 minors of
the Jacobian [grad f0; grad f1] vanish:

    g_ij = (d f0 / d x_i)(2 x_j) - (d f0 / d x_j)(2 x_i),   i < j.

Each minor is homogeneous of the same degree 2d as f0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotHomogeneous, NotOnSphere, OddDegree
from .tensor_poly import (
    SparsePolynomial,
    SymmetricTensor,
    partial_derivative,
    poly_to_tensor,
)


@dataclass
class KktSystem:
    num_vars: int
    objective: SparsePolynomial
    sphere: SparsePolynomial
    minors: dict = field(default_factory=dict)  # (i, j) with i < j -> SparsePolynomial
    gamma: dict = field(default_factory=dict)  # (i, j) -> SymmetricTensor

    @property
    def half_degree(self) -> int:
        return self.objective.degree() // 2


def sphere_polynomial(num_vars: int) -> SparsePolynomial:
    terms = {}
    for i in range(num_vars):
        e = [0] * num_vars
        e[i] = 2
        terms[tuple(e)] = 1.0
    terms[(0,) * num_vars] = -1.0
    return SparsePolynomial(num_vars, terms)


def build_kkt_system(f0: SparsePolynomial, num_vars: int | None = None) -> KktSystem:
    """Sphere constraint plus all Jacobian minors of f0, with tensor forms."""
    if num_vars is not None and num_vars != f0.num_vars:
        raise DimensionMismatch(f"objective has {f0.num_vars} variables, expected {num_vars}")
    if not f0.is_homogeneous() or f0.is_zero():
        raise NotHomogeneous("objective must be a nonzero homogeneous polynomial")
    deg = f0.degree()
    if deg % 2 != 0 or deg < 2:
        raise OddDegree(f"objective degree must be even and >= 2, got {deg}")
    m = f0.num_vars
    partials = [partial_derivative(f0, i) for i in range(m)]
    xs = [SparsePolynomial.variable(m, i) for i in range(m)]
    minors = {}
    gamma = {}
    for i in range(m):
        for j in range(i + 1, m):
            g = (partials[i] * xs[j] - partials[j] * xs[i]) * 2.0
            minors[(i, j)] = g
            if g.is_zero():
                gamma[(i, j)] = SymmetricTensor(m, deg // 2, {})
            else:
                gamma[(i, j)] = poly_to_tensor(g)
    return KktSystem(m, f0, sphere_polynomial(m), minors, gamma)


def kkt_residual(system: KktSystem, x) -> float:
    """Max of |f1(x)| and all |g_ij(x)| at a point on the unit sphere."""
    x = np.asarray(x, dtype=float)
    nrm = float(np.linalg.norm(x))
    if abs(nrm - 1.0) > 1e-8:
        raise NotOnSphere(f"|x| = {nrm}, expected 1 within 1e-8")
    worst = abs(system.sphere.evaluate(x))
    for g in system.minors.values():
        worst = max(worst, abs(g.evaluate(x)))
    return worst
