"""Dense semidefinite programming by a primal-dual path-following method.

Standard form handled here:

    primal:  max <C, X>   s.t.  <A_i, X> = b_i,  X >= 0 (block diagonal)
    dual:    min b' y     s.t.  sum_i y_i A_i - C = S >= 0

The iteration is infeasible-start Nesterov-Todd scaling with a Mehrotra
style predictor-corrector: the affine direction sets the centering weight
sigma = (mu_aff / mu)^3, and step lengths follow a fraction-to-boundary
rule with factor 0.98.  Everything is deterministic dense numpy.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentConstraints

DEFAULT_FEAS_TOL = 1e-7
DEFAULT_GAP_TOL = 1e-6
DEFAULT_MAX_ITER = 200
BOUNDARY_FACTOR = 0.98
DIVERGENCE_LIMIT = 1e12


@dataclass
class SdpProblem:
    """Block-diagonal SDP data.

    C and each constraint are dicts mapping block index -> dense symmetric
    array; blocks absent from a dict are zero there.  b holds the right-hand
    sides.  sense is "max" or "min" for the primal objective.
    """

    block_sizes: tuple
    C: dict
    constraints: list
    b: np.ndarray
    sense: str = "max"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.block_sizes = tuple(int(s) for s in self.block_sizes)
        if any(s < 1 for s in self.block_sizes):
            raise ValueError("block sizes must be positive")
        self.b = np.asarray(self.b, dtype=float)
        if self.b.shape != (len(self.constraints),):
            raise ValueError("b length disagrees with constraint count")
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        for mats in [self.C] + self.constraints:
            for blk, M in mats.items():
                sz = self.block_sizes[blk]
                M = np.asarray(M, dtype=float)
                if M.shape != (sz, sz):
                    raise ValueError(f"block {blk} matrix shape {M.shape} != {sz}")
                if np.max(np.abs(M - M.T), initial=0.0) > 1e-10 * max(
                    1.0, np.max(np.abs(M), initial=0.0)
                ):
                    raise ValueError(f"block {blk} matrix is not symmetric")
                mats[blk] = 0.5 * (M + M.T)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def _offsets(self):
        offs = []
        pos = 0
        for s in self.block_sizes:
            offs.append(pos)
            pos += s * s
        return offs, pos

    def stack(self, mats: dict) -> np.ndarray:
        """Flatten a block dict into one vector (full matrices, row-major)."""
        offs, total = self._offsets()
        v = np.zeros(total)
        for blk, M in mats.items():
            s = self.block_sizes[blk]
            v[offs[blk] : offs[blk] + s * s] = np.asarray(M, dtype=float).ravel()
        return v

    def unstack(self, v: np.ndarray) -> list:
        offs, _ = self._offsets()
        out = []
        for blk, s in enumerate(self.block_sizes):
            out.append(v[offs[blk] : offs[blk] + s * s].reshape(s, s).copy())
        return out

    def constraint_stack(self) -> np.ndarray:
        return np.vstack([self.stack(a) for a in self.constraints])


@dataclass
class SdpSolution:
    X: list
    y: np.ndarray
    S: list
    primal_objective: float
    dual_objective: float
    status: str
    iterations: int
    residuals: dict


@dataclass
class PresolveReport:
    kept: list
    dropped_duplicates: list
    dropped_zero: list
    scales: np.ndarray


def presolve(problem: SdpProblem) -> tuple[SdpProblem, PresolveReport]:
    """Drop zero and exactly duplicated constraints, scale rows to unit norm."""
    kept, dup, zero = [], [], []
    seen: dict[bytes, int] = {}
    stacks = []
    for i, a in enumerate(problem.constraints):
        v = problem.stack(a)
        if not np.any(v):
            if problem.b[i] != 0.0:
                raise InconsistentConstraints(
                    f"constraint {i} has zero matrix but b = {problem.b[i]}"
                )
            zero.append(i)
            continue
        key = v.tobytes()
        if key in seen:
            j = seen[key]
            if problem.b[j] != problem.b[i]:
                raise InconsistentConstraints(
                    f"constraints {j} and {i} duplicate A with different b"
                )
            dup.append(i)
            continue
        seen[key] = i
        kept.append(i)
        stacks.append(v)

    scales = np.ones(len(kept))
    new_cons = []
    new_b = np.zeros(len(kept))
    for pos, i in enumerate(kept):
        nrm = float(np.linalg.norm(stacks[pos]))
        scales[pos] = nrm
        new_cons.append(
            {blk: np.asarray(M, dtype=float) / nrm for blk, M in problem.constraints[i].items()}
        )
        new_b[pos] = problem.b[i] / nrm
    reduced = SdpProblem(
        problem.block_sizes, dict(problem.C), new_cons, new_b, problem.sense, problem.meta
    )
    return reduced, PresolveReport(kept, dup, zero, scales)


def _max_step(X_blocks, D_blocks) -> float:
    """Largest t with X + t D staying positive semidefinite, via Cholesky scaling."""
    t = np.inf
    for X, D in zip(X_blocks, D_blocks):
        L = np.linalg.cholesky(X)
        Li = np.linalg.inv(L)
        M = Li @ D @ Li.T
        M = 0.5 * (M + M.T)
        lam = float(np.min(np.linalg.eigvalsh(M)))
        if lam < 0:
            t = min(t, -1.0 / lam)
    return t


def _nt_scaling(X, S):
    """W with W S W = X for symmetric positive definite X, S."""
    Rx = np.linalg.cholesky(X)
    Rs = np.linalg.cholesky(S)
    U, sig, Vt = np.linalg.svd(Rs.T @ Rx)
    W = Rx @ Vt.T @ np.diag(1.0 / sig) @ Vt @ Rx.T
    return 0.5 * (W + W.T)


def solve(
    problem: SdpProblem,
    gap_tol: float = DEFAULT_GAP_TOL,
    feas_tol: float = DEFAULT_FEAS_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    verbosity: int = 0,
    use_presolve: bool = True,
) -> SdpSolution:
    """Solve the block SDP; returns primal, dual, and slack with a status tag.

    Statuses: Optimal, MaxIterations, NumericalFailure,
    PrimalInfeasibleSuspected, DualInfeasibleSuspected.
    """
    t0 = time.perf_counter()
    work = problem
    if problem.sense == "min":
        work = SdpProblem(
            problem.block_sizes,
            {blk: -M for blk, M in problem.C.items()},
            problem.constraints,
            problem.b,
            "max",
            problem.meta,
        )
    report = None
    if use_presolve:
        work, report = presolve(work)

    sizes = work.block_sizes
    nblocks = len(sizes)
    p = work.num_constraints
    ntot = sum(sizes)
    A = work.constraint_stack() if p else np.zeros((0, work.stack({}).size))
    Cst = work.stack(work.C)
    b = work.b

    def unstack(v):
        return work.unstack(v)

    def blocks_stack(blocks):
        return np.concatenate([B.ravel() for B in blocks]) if nblocks else np.zeros(0)

    scale_p = 10.0 * max(1.0, float(np.max(np.abs(b), initial=0.0)))
    scale_d = 10.0 * max(
        1.0,
        float(np.max(np.abs(Cst), initial=0.0)),
        float(np.max(np.abs(A), initial=0.0)) if p else 1.0,
    )
    X = [scale_p * np.eye(s) for s in sizes]
    S = [scale_d * np.eye(s) for s in sizes]
    y = np.zeros(p)

    status = "MaxIterations"
    iters = 0
    residuals = {}

    def primal_res():
        return b - A @ blocks_stack(X) if p else np.zeros(0)

    def dual_res_stack():
        return Cst + blocks_stack(S) - (A.T @ y if p else 0.0)

    # feasibility is judged row by row against 1 + |b_i|
    bden = 1.0 + np.abs(b)
    cnorm = 1.0 + float(np.max(np.abs(Cst), initial=0.0))
    gap_trace = []

    for it in range(max_iter):
        iters = it
        rp = primal_res()
        Rd = dual_res_stack()
        pobj = float(Cst @ blocks_stack(X))
        dobj = float(b @ y)
        mu = sum(float(np.tensordot(Xb, Sb)) for Xb, Sb in zip(X, S)) / ntot
        pinf = float(np.max(np.abs(rp) / bden, initial=0.0))
        dinf = float(np.max(np.abs(Rd), initial=0.0)) / cnorm
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        gap_trace.append(gap)
        if verbosity:
            print(
                f"  it {it:3d}  pobj {pobj:+.8e}  dobj {dobj:+.8e}  "
                f"gap {gap:.2e}  pinf {pinf:.2e}  dinf {dinf:.2e}  mu {mu:.2e}"
            )
        residuals = {"primal": pinf, "dual": dinf, "gap": gap, "mu": mu}
        if pinf <= feas_tol and dinf <= feas_tol and gap <= gap_tol:
            status = "Optimal"
            break
        if abs(pobj) > DIVERGENCE_LIMIT or np.max(np.abs(y), initial=0.0) > DIVERGENCE_LIMIT:
            # runaway primal objective with stubborn dual infeasibility
            status = (
                "DualInfeasibleSuspected" if dinf > 1e3 * feas_tol else "PrimalInfeasibleSuspected"
            )
            break

        try:
            W = [_nt_scaling(Xb, Sb) for Xb, Sb in zip(X, S)]
            Sinv = [np.linalg.inv(Sb) for Sb in S]
        except np.linalg.LinAlgError:
            status = "NumericalFailure"
            break

        Rd_blocks = unstack(Rd)
        WRdW = blocks_stack([Wb @ Rb @ Wb for Wb, Rb in zip(W, Rd_blocks)])
        Sinv_st = blocks_stack(Sinv)

        if p:
            # Schur complement M_ij = <A_i, W A_j W>
            WAW = np.empty_like(A)
            for i in range(p):
                Ablocks = unstack(A[i])
                WAW[i] = blocks_stack([Wb @ Ab @ Wb for Wb, Ab in zip(W, Ablocks)])
            Mschur = A @ WAW.T
            Mschur = 0.5 * (Mschur + Mschur.T)
            jitter = 0.0
            base = float(np.trace(Mschur)) / p
            for attempt in range(6):
                try:
                    Lsc = np.linalg.cholesky(Mschur + jitter * np.eye(p))
                    break
                except np.linalg.LinAlgError:
                    jitter = max(1e-14 * base, 10.0 * jitter) if jitter else 1e-14 * base
            else:
                status = "NumericalFailure"
                break

            def schur_solve(rhs):
                z = np.linalg.solve(Lsc, rhs)
                sol = np.linalg.solve(Lsc.T, z)
                # one step of iterative refinement
                resid = rhs - Mschur @ sol
                z = np.linalg.solve(Lsc, resid)
                return sol + np.linalg.solve(Lsc.T, z)

        def directions(sigma_mu):
            # dX + W dS W = sigma_mu S^-1 - X, A(dX) = rp, A*(dy) - dS = Rd
            rhs_v = sigma_mu * Sinv_st + WRdW
            if p:
                dy = schur_solve(A @ rhs_v - b)
                dS_st = A.T @ dy - Rd
            else:
                dy = np.zeros(0)
                dS_st = -Rd
            dS_blocks = unstack(dS_st)
            dX_blocks = [
                sigma_mu * Si - Xb - Wb @ dSb @ Wb
                for Si, Xb, Wb, dSb in zip(Sinv, X, W, dS_blocks)
            ]
            dX_blocks = [0.5 * (Db + Db.T) for Db in dX_blocks]
            dS_blocks = [0.5 * (Db + Db.T) for Db in dS_blocks]
            return dX_blocks, dy, dS_blocks

        try:
            dXa, dya, dSa = directions(0.0)
            ap = min(1.0, BOUNDARY_FACTOR * _max_step(X, dXa))
            ad = min(1.0, BOUNDARY_FACTOR * _max_step(S, dSa))
            mu_aff = sum(
                float(np.tensordot(Xb + ap * dXb, Sb + ad * dSb))
                for Xb, dXb, Sb, dSb in zip(X, dXa, S, dSa)
            ) / ntot
            sigma = min(1.0, max(0.0, (max(mu_aff, 0.0) / mu) ** 3))
            dX, dy, dS = directions(sigma * mu)
            ap = min(1.0, BOUNDARY_FACTOR * _max_step(X, dX))
            ad = min(1.0, BOUNDARY_FACTOR * _max_step(S, dS))
        except np.linalg.LinAlgError:
            status = "NumericalFailure"
            break

        X = [Xb + ap * dXb for Xb, dXb in zip(X, dX)]
        S = [Sb + ad * dSb for Sb, dSb in zip(S, dS)]
        y = y + ad * dy

    # final residuals at the returned point
    Xst = blocks_stack(X)
    rp_v = b - (A @ Xst) if p else np.zeros(0)
    Rd_st = Cst + blocks_stack(S) - (A.T @ y if p else 0.0)
    pobj = float(Cst @ Xst)
    dobj_int = float(b @ y)
    residuals = {
        "primal": float(np.max(np.abs(rp_v) / bden, initial=0.0)),
        "dual": float(np.max(np.abs(Rd_st), initial=0.0)) / cnorm,
        "gap": abs(pobj - dobj_int) / (1.0 + abs(pobj) + abs(dobj_int)),
        "mu": sum(float(np.tensordot(Xb, Sb)) for Xb, Sb in zip(X, S)) / ntot,
        "gap_trace": gap_trace,
    }
    # recover multipliers for the original constraint list
    if report is not None:
        y_full = np.zeros(problem.num_constraints)
        for pos, i in enumerate(report.kept):
            y_full[i] = y[pos] / report.scales[pos]
        y = y_full
    dobj = float(np.asarray(problem.b) @ y) if problem.num_constraints else 0.0
    if problem.sense == "min":
        pobj, dobj, y = -pobj, -dobj, -y
    residuals["solve_seconds"] = time.perf_counter() - t0
    min_eig_X = min(
        (float(np.min(np.linalg.eigvalsh(Xb))) for Xb in X), default=0.0
    )
    min_eig_S = min(
        (float(np.min(np.linalg.eigvalsh(Sb))) for Sb in S), default=0.0
    )
    residuals["min_eig_X"] = min_eig_X
    residuals["min_eig_S"] = min_eig_S
    return SdpSolution(
        X=X,
        y=y,
        S=S,
        primal_objective=pobj,
        dual_objective=dobj,
        status=status,
        iterations=iters + 1,
        residuals=residuals,
    )


def export_problem(problem: SdpProblem, path: str) -> None:
    """Plain-text dump: header, sizes, rhs, then (k, block, i, j, value) rows.

    Constraint index 0 is the objective.  Values are written with repr so the
    round trip is exact.
    """
    lines = [f"SEPHIER-SDP 1 {problem.sense}"]
    lines.append(f"{problem.num_constraints} {len(problem.block_sizes)}")
    lines.append(" ".join(str(s) for s in problem.block_sizes))
    lines.append(" ".join(repr(float(v)) for v in problem.b))
    def emit(k, mats):
        out = []
        for blk in sorted(mats):
            M = mats[blk]
            s = M.shape[0]
            for i in range(s):
                for j in range(i, s):
                    if M[i, j] != 0.0:
                        out.append(f"{k} {blk} {i} {j} {repr(float(M[i, j]))}")
        return out

    lines.extend(emit(0, problem.C))
    for k, a in enumerate(problem.constraints, start=1):
        lines.extend(emit(k, a))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def import_problem(path: str) -> SdpProblem:
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    tag, version, sense = raw[0].split()
    if tag != "SEPHIER-SDP" or version != "1":
        raise ValueError(f"unrecognized header {raw[0]!r}")
    p, nblocks = (int(v) for v in raw[1].split())
    sizes = tuple(int(v) for v in raw[2].split())
    if len(sizes) != nblocks:
        raise ValueError("block size count mismatch")
    b = np.array([float(v) for v in raw[3].split()]) if p else np.zeros(0)
    if b.shape != (p,):
        raise ValueError("rhs length mismatch")
    C: dict = {}
    cons: list = [dict() for _ in range(p)]
    for ln in raw[4:]:
        k_s, blk_s, i_s, j_s, val_s = ln.split()
        k, blk, i, j = int(k_s), int(blk_s), int(i_s), int(j_s)
        val = float(val_s)
        target = C if k == 0 else cons[k - 1]
        if blk not in target:
            target[blk] = np.zeros((sizes[blk], sizes[blk]))
        target[blk][i, j] = val
        target[blk][j, i] = val
    return SdpProblem(sizes, C, cons, b, sense)
