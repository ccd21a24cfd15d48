"""Primal-side ground truth for sphere maximization.

Multistart projected gradient ascent gives reproducible lower bounds with a
stationarity check at the winner.  The net enumerator walks an angular grid
fine enough that a Lipschitz bound on the objective turns the grid maximum
into a certified two-sided bracket; it is only viable at very small variable
counts, which is exactly where it is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotOnSphere, TooManyVariables
from .kkt import build_kkt_system, kkt_residual
from .tensor_poly import SparsePolynomial, SymmetricTensor, partial_derivative

ASCENT_GTOL = 1e-9
ASCENT_MAX_ITER = 500
NET_CHUNK = 131072


@dataclass
class OracleResult:
    best_value: float
    best_point: np.ndarray
    kkt_residual: float
    restarts: int
    method: str  # "ascent" | "net"
    certified_upper: float | None = None


def _lipschitz(f0: SparsePolynomial) -> float:
    # |grad f0| <= deg * sum|c| on the unit ball, since each monomial factor is <= 1
    return float(f0.degree()) * f0.coeff_l1()


def _stationarity(f0: SparsePolynomial, point: np.ndarray) -> float:
    if f0.is_zero():
        return 0.0
    return kkt_residual(build_kkt_system(f0), point)


def local_ascend(target: SymmetricTensor, x0, gtol: float = ASCENT_GTOL,
                 max_iter: int = ASCENT_MAX_ITER):
    """Projected gradient ascent on the sphere from x0 with |x0| = 1.

    Moves along the Euclidean gradient and renormalizes, halving the step
    until the Armijo test against the tangential gradient norm passes.
    Returns (point, value, converged); the value never drops below f0(x0).
    """
    f0 = target.to_polynomial()
    x = np.asarray(x0, dtype=float).copy()
    nrm = float(np.linalg.norm(x))
    if abs(nrm - 1.0) > 1e-8:
        raise NotOnSphere(f"|x0| = {nrm}, expected 1 within 1e-8")
    x /= nrm
    grads = [partial_derivative(f0, i) for i in range(f0.num_vars)]
    fx = f0.evaluate(x)
    lip = max(_lipschitz(f0), 1e-12)
    step = 1.0 / lip
    for _ in range(max_iter):
        g = np.array([gi.evaluate(x) for gi in grads])
        gtan = g - float(g @ x) * x
        gnorm = float(np.linalg.norm(gtan))
        if gnorm <= gtol:
            return x, fx, True
        s = step
        accepted = False
        for _ in range(60):
            xn = x + s * g
            xn /= np.linalg.norm(xn)
            fn = f0.evaluate(xn)
            if fn >= fx + 1e-4 * s * gnorm * gnorm:
                accepted = True
                break
            s *= 0.5
        if not accepted:
            # step floor reached: numerically stationary
            return x, fx, True
        x, fx = xn, fn
        step = min(2.0 * s, 1e6 / lip)
    return x, fx, False


def multistart(target: SymmetricTensor, restarts: int, seed: int = 0,
               gtol: float = ASCENT_GTOL, max_iter: int = ASCENT_MAX_ITER) -> OracleResult:
    """Best of `restarts` independent ascents; restart i draws from key (seed, i)."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    m = target.num_vars
    best_value = -np.inf
    best_point = None
    for i in range(restarts):
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, i], dtype=np.uint64)))
        x0 = rng.standard_normal(m)
        nrm = float(np.linalg.norm(x0))
        while nrm < 1e-12:
            x0 = rng.standard_normal(m)
            nrm = float(np.linalg.norm(x0))
        x, value, _ = local_ascend(target, x0 / nrm, gtol=gtol, max_iter=max_iter)
        if value > best_value:
            best_value, best_point = value, x
    f0 = target.to_polynomial()
    best_value = f0.evaluate(best_point)
    return OracleResult(
        float(best_value), best_point, _stationarity(f0, best_point), restarts, "ascent"
    )


def _angles_to_points(grids):
    """Spherical angle grid -> cartesian rows, polar angles first."""
    mesh = np.meshgrid(*grids, indexing="ij")
    flat = [a.reshape(-1) for a in mesh]
    npts = flat[0].size
    m = len(grids) + 1
    pts = np.empty((npts, m))
    sin_run = np.ones(npts)
    for t, ang in enumerate(flat):
        pts[:, t] = sin_run * np.cos(ang)
        sin_run = sin_run * np.sin(ang)
    pts[:, m - 1] = sin_run
    return pts


def _evaluate_rows(f0: SparsePolynomial, pts: np.ndarray) -> np.ndarray:
    vals = np.zeros(pts.shape[0])
    for expo, coeff in f0.terms.items():
        term = np.full(pts.shape[0], coeff)
        for i, e in enumerate(expo):
            if e:
                term = term * pts[:, i] ** e
        vals += term
    return vals


def _net_scan(f0: SparsePolynomial, m: int, delta: float) -> np.ndarray:
    """Grid argmax over the angular net of mesh delta / max(1, m-1)."""
    if m == 1:
        one = np.array([1.0])
        return one if f0.evaluate(one) >= f0.evaluate(-one) else -one
    h = delta / max(1, m - 1)
    polar = np.linspace(0.0, np.pi, int(np.ceil(np.pi / h)) + 1)
    azim = np.linspace(0.0, 2.0 * np.pi, int(np.ceil(2.0 * np.pi / h)) + 1)
    grids = [polar] * (m - 2) + [azim]
    total = int(np.prod([g.size for g in grids]))
    lead = grids[0].size
    step = max(1, NET_CHUNK // max(1, total // lead))
    lower = -np.inf
    best = None
    for start in range(0, lead, step):
        pts = _angles_to_points([grids[0][start:start + step]] + grids[1:])
        vals = _evaluate_rows(f0, pts)
        k = int(np.argmax(vals))
        if vals[k] > lower:
            lower = float(vals[k])
            best = pts[k]
    return best / np.linalg.norm(best)


def net_enumerate(target: SymmetricTensor, delta: float):
    """Certified bracket (lower, lower + L*delta) from an angular grid.

    The mesh spacing delta / max(1, m-1) keeps every sphere point within
    geodesic distance delta of a grid point, and L = deg * sum|c| bounds the
    gradient on the ball, so the grid maximum is delta*L-close to the truth.
    """
    m = target.num_vars
    if m > 4:
        raise TooManyVariables(f"net enumeration supports at most 4 variables, got {m}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    f0 = target.to_polynomial()
    point = _net_scan(f0, m, delta)
    lower = float(f0.evaluate(point))
    return lower, float(lower + _lipschitz(f0) * delta)


def net_result(target: SymmetricTensor, delta: float) -> OracleResult:
    """net_enumerate packaged with the stationarity residual at the grid winner."""
    m = target.num_vars
    if m > 4:
        raise TooManyVariables(f"net enumeration supports at most 4 variables, got {m}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    f0 = target.to_polynomial()
    point = _net_scan(f0, m, delta)
    lower = float(f0.evaluate(point))
    upper = float(lower + _lipschitz(f0) * delta)
    return OracleResult(lower, point, _stationarity(f0, point), 0, "net",
                        certified_upper=upper)
