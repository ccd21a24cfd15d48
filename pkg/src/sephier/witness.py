"""Witness operators: construction from bounds, cone search, validation.

An upper bound nu on the product-state expectation of M makes Z = nu*I - M
nonnegative on every product state covered by the bound.  The search goes
the other way: given a target state, the best operator of the form
Z = I + sum_t y_t G_t (G_t a traceless Hermitian basis, so Tr Z is pinned to
the local dimension squared) that stays nonnegative on the symmetric
extension cone is read off the dual multipliers of one extension solve, and
its value on the target tells whether the cone excludes the state.

Validation is independent of the search: the reported margin is a certified
lower bound on Tr[Z rho'] over product states, obtained as minus the
hierarchy upper bound for -Z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SolverFailure
from .relaxation import _dps_rows, complex_to_real_block, solve_hierarchy
from .sdp_solver import SdpProblem, solve
from .tensor_poly import ComplexHermitianOperator, realify

DETECTION_TOL = 1e-6


@dataclass
class Witness:
    operator: ComplexHermitianOperator
    provenance: str  # "from_bound" | "from_search"
    validity_level: int
    margin: float | None = None


def traceless_hermitian_basis(q: int):
    """q^2 - 1 Hermitian traceless matrices spanning the traceless subspace."""
    out = []
    for a in range(q):
        for b in range(a + 1, q):
            E = np.zeros((q, q), dtype=complex)
            E[a, b] = 1.0
            E[b, a] = 1.0
            out.append(E)
            F = np.zeros((q, q), dtype=complex)
            F[a, b] = -1.0j
            F[b, a] = 1.0j
            out.append(F)
    for l in range(1, q):
        Dm = np.zeros((q, q), dtype=complex)
        for t in range(l):
            Dm[t, t] = 1.0
        Dm[l, l] = -float(l)
        out.append(Dm)
    return out


def witness_from_bound(M: ComplexHermitianOperator, nu: float, level: int = 0) -> Witness:
    """Z = nu*I - M; the certifying level of nu is carried as validity_level."""
    Z = nu * np.eye(M.side, dtype=complex) - M.entries
    op = ComplexHermitianOperator(M.local_dim, M.copies, Z)
    return Witness(op, "from_bound", level, margin=0.0)


def dps_witness_search(rho_target: ComplexHermitianOperator, level: int,
                       ppt: bool = False, gap_tol: float = 1e-9,
                       feas_tol: float = 1e-9, max_iter: int = 200,
                       verbosity: int = 0):
    """Best extension-cone witness for a bipartite state; returns (Witness, value).

    Solves max -Tr[omega] over cone elements whose reduction to the first
    two factors matches rho_target on every traceless direction.  The
    multipliers of the matching rows assemble Z with Tr[Z rho_target] =
    1 + dual objective; a negative value certifies that no cone element
    reduces to the target.
    """
    if rho_target.copies != 2:
        raise DimensionMismatch(f"expected a bipartite state, got {rho_target.copies} factors")
    if level < 1:
        raise ValueError("level must be >= 1")
    n = rho_target.local_dim
    k = level
    D = n ** (k + 1)
    sizes, rows = _dps_rows(n, k, ppt)
    nstruct = len(rows)
    rhs = [0.0] * nstruct
    basis = traceless_hermitian_basis(n * n)
    eye_rest = np.eye(n ** (k - 1))
    for G in basis:
        rows.append({0: 0.5 * complex_to_real_block(np.kron(G, eye_rest))})
        rhs.append(float(np.real(np.trace(rho_target.entries @ G))))
    C = {0: -0.5 * complex_to_real_block(np.eye(D))}
    problem = SdpProblem(
        block_sizes=sizes,
        C=C,
        constraints=rows,
        b=np.array(rhs),
        sense="max",
        meta={"kind": "witness_search", "local_dim": n, "extensions": k, "ppt": ppt},
    )
    solution = solve(problem, gap_tol=gap_tol, feas_tol=feas_tol,
                     max_iter=max_iter, verbosity=verbosity)
    if solution.status != "Optimal":
        raise SolverFailure(f"witness search did not converge: {solution.status}")
    y = solution.y[nstruct:]
    Z = np.eye(n * n, dtype=complex)
    for coeff, G in zip(y, basis):
        Z = Z + coeff * G
    Z = 0.5 * (Z + Z.conj().T)
    value = 1.0 + solution.dual_objective
    witness = Witness(ComplexHermitianOperator(n, 2, Z), "from_search", level)
    return witness, float(value)


def validate_witness(Z: ComplexHermitianOperator, level: int, kkt: bool = True,
                     gap_tol: float = 1e-9, feas_tol: float = 1e-9,
                     max_iter: int = 200) -> float:
    """Certified lower bound on Tr[Z rho'] over product states.

    Runs the moment hierarchy on -Z at the requested level; minus the
    returned upper bound is a floor for Z on every product state, so a
    nonnegative margin proves Z is a genuine witness.
    """
    negated = ComplexHermitianOperator(Z.local_dim, Z.copies, -Z.entries)
    target = realify(negated)
    _, solution = solve_hierarchy(target, level, kkt=kkt, gap_tol=gap_tol,
                                  feas_tol=feas_tol, max_iter=max_iter)
    if solution.status != "Optimal":
        raise SolverFailure(f"validation solve did not converge: {solution.status}")
    return -float(solution.dual_objective)
