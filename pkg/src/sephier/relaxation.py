"""Semidefinite relaxations: a sphere moment hierarchy and symmetric extensions.

The sphere hierarchy works in reduced monomial coordinates.  The matrix
variable is indexed by the C(m+d+r-1, d+r) monomials of degree exactly d+r;
structure rows tie together every entry pair with the same monomial sum, the
trace against the spread form of ||x||^(2(d+r)) is normalized to one, and
first order rows <spread(x^a g_ij), X> = 0 restrict to moment vectors of
measures on the critical set.  Dual multipliers of that program assemble
into an explicit weighted sum of squares identity, which is what certify()
style callers consume.

The symmetric extension family is the bipartite separability test: a state
on A B_1 .. B_k, invariant under permuting the B factors, whose reduction to
A B_1 carries the objective, optionally with positive partial transposes.
Complex Hermitian matrices are carried as real embeddings [[Re, -Im], [Im,
Re]] with explicit rows forcing the embedding structure, so a factor 1/2 on
embedded objectives reproduces the complex trace pairing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    DualInfeasible,
    DimensionMismatch,
    NotHermitian,
    NotHomogeneous,
    ShapeMismatch,
    SizeOverflow,
)
from .kkt import build_kkt_system
from .sdp_solver import (
    DEFAULT_FEAS_TOL,
    DEFAULT_GAP_TOL,
    DEFAULT_MAX_ITER,
    SdpProblem,
    SdpSolution,
    solve,
)
from .tensor_poly import (
    ComplexHermitianOperator,
    SparsePolynomial,
    SymmetricTensor,
    monomial_count,
    monomials_of_degree,
)

DEFAULT_MAX_MOMENT_SIDE = 3000
KKT_PRUNE_TOL = 1e-8


@dataclass(frozen=True)
class HierarchyConfig:
    """Shape of one hierarchy rung: m variables, half degree d, level r."""

    num_vars: int
    half_degree: int
    level: int = 0
    kkt_enabled: bool = True

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("num_vars must be >= 1")
        if self.half_degree < 1:
            raise ValueError("half_degree must be >= 1")
        if self.level < 0:
            raise ValueError("level must be >= 0")

    @property
    def moment_side(self) -> int:
        return monomial_count(self.num_vars, self.half_degree + self.level)


def _pair_table(monomials):
    """monomial sum -> list of basis index pairs (u <= v) producing it."""
    table: dict = {}
    for iu, mu in enumerate(monomials):
        for iv in range(iu, len(monomials)):
            g = tuple(a + b for a, b in zip(mu, monomials[iv]))
            table.setdefault(g, []).append((iu, iv))
    return table


def _spread(poly: SparsePolynomial, table: dict, side: int) -> np.ndarray:
    """Symmetric R with m(x)' R m(x) = poly(x), coefficients split evenly.

    Every coefficient is distributed uniformly over all ordered product
    pairs yielding its monomial, so the quadratic form identity holds
    coefficient by coefficient, not just as functions on the sphere.
    """
    R = np.zeros((side, side))
    for g, c in poly.terms.items():
        members = table.get(g)
        if members is None:
            raise NotHomogeneous(
                f"monomial {g} is not a product of two basis monomials"
            )
        n_ordered = sum(1 if u == v else 2 for u, v in members)
        w = c / n_ordered
        for u, v in members:
            R[u, v] += w
            if u != v:
                R[v, u] += w
    return R


def representative_matrix(poly: SparsePolynomial, monomials) -> np.ndarray:
    """Public spread matrix for a homogeneous polynomial of twice basis degree."""
    return _spread(poly, _pair_table(monomials), len(monomials))


def _norm_square(m: int) -> SparsePolynomial:
    return SparsePolynomial(
        m, {tuple(2 if t == i else 0 for t in range(m)): 1.0 for i in range(m)}
    )


def _add_sym(row: dict, blk: int, size: int, i: int, j: int, w: float) -> None:
    # accumulate w * X[blk][i, j] into a symmetric constraint row
    M = row.get(blk)
    if M is None:
        M = row[blk] = np.zeros((size, size))
    if i == j:
        M[i, i] += w
    else:
        M[i, j] += 0.5 * w
        M[j, i] += 0.5 * w


def build_moment_sdp(
    target: SymmetricTensor,
    config: HierarchyConfig,
    max_side: int = DEFAULT_MAX_MOMENT_SIDE,
) -> SdpProblem:
    """Level-r reduced moment relaxation of max <target, x^(2d)> on the sphere.

    Constraint order: structure rows, one normalization row, then the first
    order rows that survive pruning.  The first order rows carry exact
    linear dependencies for m >= 3 and r >= 1 (multiply the three cyclic
    minors on variables i, j, k by x_k, x_i, x_j and they cancel), so each
    candidate is Gram-Schmidt tested against the rows already kept and
    dropped when dependent; dropped rows are recorded in the meta dict.
    """
    m = target.num_vars
    d = target.half_rank
    if config.num_vars != m or config.half_degree != d:
        raise ShapeMismatch(
            f"config shape ({config.num_vars}, {config.half_degree}) "
            f"does not match target ({m}, {d})"
        )
    r = config.level
    K = d + r
    N = config.moment_side
    if N > max_side:
        raise SizeOverflow(f"moment matrix side {N} exceeds the cap {max_side}")

    monomials = monomials_of_degree(m, K)
    table = _pair_table(monomials)
    f0 = target.to_polynomial()
    norm2 = _norm_square(m)

    constraints: list[dict] = []
    rhs: list[float] = []

    # entries with equal monomial sum share one value; star against first pair
    for g in sorted(table, reverse=True):
        members = table[g]
        u0, v0 = members[0]
        for u, v in members[1:]:
            row: dict = {}
            _add_sym(row, 0, N, u, v, 1.0)
            _add_sym(row, 0, N, u0, v0, -1.0)
            constraints.append(row)
            rhs.append(0.0)
    n_structure = len(constraints)

    norm_row = len(constraints)
    constraints.append({0: _spread(norm2**K, table, N)})
    rhs.append(1.0)

    kkt_rows: list = []
    kkt_dropped: list = []
    minor_keys: list = []
    if config.kkt_enabled and not f0.is_zero():
        system = build_kkt_system(f0)
        minor_keys = sorted(system.minors)
        alphas = monomials_of_degree(m, 2 * r)
        basis = np.zeros((0, N * N))
        kept = 0
        for key in minor_keys:
            g_ij = system.minors[key]
            for alpha in alphas:
                R = _spread(SparsePolynomial(m, {alpha: 1.0}) * g_ij, table, N)
                v = R.ravel().copy()
                nrm0 = float(np.linalg.norm(v))
                if nrm0 == 0.0:
                    kkt_dropped.append((key[0], key[1], alpha, "zero"))
                    continue
                for _ in range(2):  # modified Gram-Schmidt, one reorthogonalization
                    if kept:
                        v -= basis[:kept].T @ (basis[:kept] @ v)
                if float(np.linalg.norm(v)) <= KKT_PRUNE_TOL * nrm0:
                    kkt_dropped.append((key[0], key[1], alpha, "dependent"))
                    continue
                if kept == basis.shape[0]:
                    grow = np.zeros((max(16, 2 * basis.shape[0]), N * N))
                    grow[: basis.shape[0]] = basis
                    basis = grow
                basis[kept] = v / float(np.linalg.norm(v))
                kept += 1
                kkt_rows.append((key[0], key[1], alpha, len(constraints)))
                constraints.append({0: R})
                rhs.append(0.0)

    C = {0: _spread(f0 * norm2**r, table, N)}
    meta = {
        "kind": "moment",
        "config": config,
        "monomials": monomials,
        "n_structure": n_structure,
        "norm_row": norm_row,
        "kkt_rows": kkt_rows,
        "kkt_dropped": kkt_dropped,
        "minor_keys": minor_keys,
    }
    return SdpProblem((N,), C, constraints, np.array(rhs), "max", meta)


@dataclass
class SosCertificate:
    """Data of one weighted sum of squares identity.

    Over the column vector mvec(x) of the degree d+r monomials,

        nu ||x||^(2(d+r)) - f0(x) ||x||^(2r) - sum_ij chi_ij(x) g_ij(x)
            = mvec(x)' gram mvec(x),

    with every chi_ij homogeneous of degree 2r.  When gram is positive
    semidefinite this pins nu above every critical value of f0 on the
    sphere, hence above the maximum.
    """

    nu: float
    gram: np.ndarray
    chi: dict
    monomials: list
    num_vars: int
    half_degree: int
    level: int

    def gram_min_eigenvalue(self) -> float:
        G = np.asarray(self.gram, dtype=float)
        return float(np.min(np.linalg.eigvalsh(0.5 * (G + G.T))))


def extract_certificate(problem: SdpProblem, solution: SdpSolution) -> SosCertificate:
    """Assemble the identity data from the dual multipliers.

    The gram matrix is recomputed as sum_k y_k A_k - C from the exact
    problem data, so the identity defect is at rounding level no matter how
    loosely the solver converged; only positivity of the gram inherits the
    solver's dual accuracy.
    """
    meta = problem.meta
    if meta.get("kind") != "moment":
        raise ValueError("certificate extraction needs a moment relaxation problem")
    if solution.status != "Optimal":
        raise DualInfeasible(
            f"no usable dual point, solver finished with status {solution.status}"
        )
    config: HierarchyConfig = meta["config"]
    m = config.num_vars
    y = solution.y
    Q = -np.array(problem.C[0], dtype=float)
    for k, row in enumerate(problem.constraints):
        A0 = row.get(0)
        if A0 is not None and y[k] != 0.0:
            Q += y[k] * A0
    chi = {key: SparsePolynomial.zero(m) for key in meta["minor_keys"]}
    for i, j, alpha, k in meta["kkt_rows"]:
        chi[(i, j)] = chi[(i, j)] + SparsePolynomial(m, {alpha: -float(y[k])})
    return SosCertificate(
        nu=float(y[meta["norm_row"]]),
        gram=0.5 * (Q + Q.T),
        chi=chi,
        monomials=list(meta["monomials"]),
        num_vars=m,
        half_degree=config.half_degree,
        level=config.level,
    )


def verify_certificate(target: SymmetricTensor, cert: SosCertificate) -> float:
    """Max abs coefficient of the defect in the certificate identity.

    Everything on the left side is recomputed from the target (objective,
    sphere minors, monomial basis), so a certificate cannot vouch for
    itself.  Positivity of the gram matrix is a separate check left to the
    caller; see SosCertificate.gram_min_eigenvalue.
    """
    m = target.num_vars
    d = target.half_rank
    r = cert.level
    if cert.num_vars != m or cert.half_degree != d or r < 0:
        raise ShapeMismatch(
            f"certificate shape ({cert.num_vars}, {cert.half_degree}, {r}) "
            f"does not fit target ({m}, {d})"
        )
    K = d + r
    monomials = monomials_of_degree(m, K)
    if list(cert.monomials) != monomials:
        raise ShapeMismatch("certificate monomial basis disagrees with the target shape")
    G = np.asarray(cert.gram, dtype=float)
    if G.shape != (len(monomials), len(monomials)):
        raise ShapeMismatch(
            f"gram shape {G.shape}, expected {(len(monomials), len(monomials))}"
        )

    f0 = target.to_polynomial()
    norm2 = _norm_square(m)
    lhs = norm2**K * cert.nu - f0 * norm2**r
    minors = {} if f0.is_zero() else build_kkt_system(f0).minors
    unknown = set(cert.chi) - set(minors)
    if unknown:
        raise ShapeMismatch(f"multipliers for unknown minor keys {sorted(unknown)}")
    for key, g_ij in minors.items():
        chi = cert.chi.get(key)
        if chi is None or chi.is_zero():
            continue
        if not chi.is_homogeneous() or chi.degree() != 2 * r:
            raise ShapeMismatch(
                f"multiplier for {key} must be homogeneous of degree {2 * r}"
            )
        lhs = lhs - chi * g_ij

    gram_terms: dict = {}
    for iu, mu in enumerate(monomials):
        for iv in range(iu, len(monomials)):
            w = G[iu, iu] if iu == iv else G[iu, iv] + G[iv, iu]
            if w != 0.0:
                g = tuple(a + b for a, b in zip(mu, monomials[iv]))
                gram_terms[g] = gram_terms.get(g, 0.0) + w
    defect = lhs - SparsePolynomial(m, gram_terms)
    return defect.max_abs_coeff()


@dataclass
class MomentSolution:
    """Primal side of a solved rung: the moment matrix in monomial coordinates."""

    rho: np.ndarray
    objective: float
    residuals: dict

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho)[0])


def moment_solution(problem: SdpProblem, solution: SdpSolution) -> MomentSolution:
    if problem.meta.get("kind") != "moment":
        raise ValueError("expected a moment relaxation problem")
    return MomentSolution(
        rho=np.array(solution.X[0]),
        objective=solution.primal_objective,
        residuals=dict(solution.residuals),
    )


def solve_hierarchy(
    target: SymmetricTensor,
    level: int,
    kkt: bool = True,
    gap_tol: float = DEFAULT_GAP_TOL,
    feas_tol: float = DEFAULT_FEAS_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    max_side: int = DEFAULT_MAX_MOMENT_SIDE,
    verbosity: int = 0,
):
    """Build and solve one rung; returns (problem, solution)."""
    config = HierarchyConfig(target.num_vars, target.half_rank, level, kkt)
    problem = build_moment_sdp(target, config, max_side=max_side)
    solution = solve(
        problem,
        gap_tol=gap_tol,
        feas_tol=feas_tol,
        max_iter=max_iter,
        verbosity=verbosity,
    )
    return problem, solution


def complex_to_real_block(H) -> np.ndarray:
    """Real embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.

    The result is symmetric with the spectrum of H doubled, and
    Tr[emb(A) emb(B)] = 2 Tr[A B] for Hermitian A, B.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {H.shape}")
    if H.size and float(np.max(np.abs(H - H.conj().T))) > 1e-12:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


def _dps_rows(n: int, k: int, ppt: bool):
    """Rows shared by the extension programs; every right-hand side is zero.

    Block 0 carries the embedded extension state on A B_1 .. B_k; blocks
    1..k (present with ppt) carry the embeddings of the partial transposes
    over the last 1..k copies of B.  Row groups, in order: embedding
    structure per block, permutation ties on block 0, transpose links.
    Within block b the complex entry is omega[I, J] = X[I, J] - i X[I, D+J]
    for I < J, which is what the helper lookups below encode.
    """
    D = n ** (k + 1)
    side = 2 * D
    nblocks = 1 + (k if ppt else 0)
    rows: list[dict] = []

    for blk in range(nblocks):
        for I in range(D):
            for J in range(I, D):
                row: dict = {}
                _add_sym(row, blk, side, I, J, 1.0)
                _add_sym(row, blk, side, D + I, D + J, -1.0)
                rows.append(row)
                row = {}
                _add_sym(row, blk, side, I, D + J, 1.0)
                _add_sym(row, blk, side, J, D + I, 1.0)
                rows.append(row)

    if k >= 2:
        # permutation invariance over the B factors, one orbit at a time
        npow = [n ** (k - 1 - t) for t in range(k)]
        maps = []
        for pi in itertools.permutations(range(k)):
            mp = np.empty(D, dtype=np.intp)
            for I in range(D):
                iA, rest = divmod(I, n**k)
                digs = []
                for t in range(k):
                    q, rest = divmod(rest, npow[t])
                    digs.append(q)
                mp[I] = iA * n**k + sum(
                    digs[pi[t]] * npow[t] for t in range(k)
                )
            maps.append(mp)
        visited = set()
        for I in range(D):
            for J in range(I, D):
                if (I, J) in visited:
                    continue
                seen: dict = {}
                for mp in maps:
                    A0, B0 = int(mp[I]), int(mp[J])
                    a, b = (A0, B0) if A0 <= B0 else (B0, A0)
                    seen.setdefault((a, b), set()).add(1 if A0 <= B0 else -1)
                visited.update(seen)
                for a, b in sorted(seen):
                    if (a, b) != (I, J):
                        row = {}
                        _add_sym(row, 0, side, a, b, 1.0)
                        _add_sym(row, 0, side, I, J, -1.0)
                        rows.append(row)
                if I == J:
                    continue
                if any(len(s) == 2 for s in seen.values()):
                    # orbit reachable with both orientations: imaginary parts die
                    for a, b in sorted(seen):
                        row = {}
                        _add_sym(row, 0, side, a, D + b, 1.0)
                        rows.append(row)
                else:
                    for a, b in sorted(seen):
                        if (a, b) == (I, J):
                            continue
                        (s,) = seen[(a, b)]
                        row = {}
                        _add_sym(row, 0, side, a, D + b, -float(s))
                        _add_sym(row, 0, side, I, D + J, 1.0)
                        rows.append(row)

    if ppt:
        for t in range(1, k + 1):
            mod = n**t
            for I in range(D):
                iA, ir = divmod(I, n**k)
                ih, it_ = divmod(ir, mod)
                for J in range(I, D):
                    jA, jr = divmod(J, n**k)
                    jh, jt = divmod(jr, mod)
                    I2 = iA * n**k + ih * mod + jt
                    J2 = jA * n**k + jh * mod + it_
                    a2, b2 = (I2, J2) if I2 <= J2 else (J2, I2)
                    row = {}
                    _add_sym(row, t, side, I, J, 1.0)
                    _add_sym(row, 0, side, a2, b2, -1.0)
                    rows.append(row)
                    if I == J:
                        continue
                    # Im omega^T_t[I, J] matches Im omega[I2, J2]
                    row = {}
                    _add_sym(row, t, side, I, D + J, -1.0)
                    if I2 < J2:
                        _add_sym(row, 0, side, I2, D + J2, 1.0)
                    else:
                        _add_sym(row, 0, side, J2, D + I2, -1.0)
                    rows.append(row)

    return (side,) * nblocks, rows


def build_dps_bipartite(
    M: ComplexHermitianOperator, extensions: int, ppt: bool = False
) -> SdpProblem:
    """Extension upper bound on max Tr[M rho] over bipartite separable rho.

    The variable is a unit trace state on A and `extensions` copies of B,
    invariant under permuting the copies; with ppt=True every partial
    transpose over a tail of copies must stay positive as well.  The
    objective acts on the real embedding so <C, X> equals Tr[M rho] with
    rho the reduction to A B_1.
    """
    if M.copies != 2:
        raise DimensionMismatch(f"need a two party operator, got copies={M.copies}")
    if extensions < 1:
        raise ValueError("extensions must be >= 1")
    n = M.local_dim
    k = extensions
    D = n ** (k + 1)
    side = 2 * D
    sizes, rows = _dps_rows(n, k, ppt)
    rhs = [0.0] * len(rows)
    trace_row = len(rows)
    row: dict = {}
    for I in range(D):
        _add_sym(row, 0, side, I, I, 1.0)
    rows.append(row)
    rhs.append(1.0)

    big = np.kron(M.entries, np.eye(n ** (k - 1), dtype=complex))
    C = {0: 0.5 * complex_to_real_block(big)}
    meta = {
        "kind": "dps",
        "local_dim": n,
        "extensions": k,
        "ppt": ppt,
        "ext_side": D,
        "trace_row": trace_row,
    }
    return SdpProblem(sizes, C, rows, np.array(rhs), "max", meta)
