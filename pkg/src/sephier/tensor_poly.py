"""Sparse polynomials, symmetric tensors, and the complex-to-real reduction.

A multi-index is a tuple of nonnegative integer exponents, one slot per
variable.  A symmetric tensor of rank 2k over m symbols is stored by the
sorted index multiset of each entry, so storage is one coefficient per
degree-2k monomial rather than m^(2k) entries.  Coefficients here are
float64 throughout; exact rational arithmetic lives in the groebner module.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import (
    DimensionMismatch,
    NotHermitian,
    NotHomogeneous,
    OddDegree,
    RankMismatch,
)


def monomial_count(m: int, degree: int) -> int:
    """Number of degree-`degree` monomials in m variables, C(m+degree-1, degree)."""
    if m < 1 or degree < 0:
        raise ValueError(f"need m >= 1 and degree >= 0, got m={m}, degree={degree}")
    return math.comb(m + degree - 1, degree)


def monomials_of_degree(m: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree `degree`, graded-lex descending."""
    out = []
    for combo in itertools.combinations_with_replacement(range(m), degree):
        e = [0] * m
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    out.sort(reverse=True)
    return out


def multiset_to_exponents(multiset: tuple[int, ...], m: int) -> tuple[int, ...]:
    e = [0] * m
    for i in multiset:
        e[i] += 1
    return tuple(e)


def exponents_to_multiset(exponents: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    for i, e in enumerate(exponents):
        out.extend([i] * e)
    return tuple(out)


def _arrangement_count(exponents) -> int:
    """Number of distinct orderings of the index multiset with these multiplicities."""
    total = sum(exponents)
    c = math.factorial(total)
    for e in exponents:
        c //= math.factorial(e)
    return c


class SparsePolynomial:
    """Real polynomial as a map from exponent tuples to float coefficients."""

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars: int, terms=None):
        if num_vars < 1:
            raise ValueError("num_vars must be >= 1")
        self.num_vars = num_vars
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars:
                raise DimensionMismatch(
                    f"exponent tuple {exps} has length {len(exps)}, expected {num_vars}"
                )
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = float(c)
            if c != 0.0:
                clean[exps] = clean.get(exps, 0.0) + c
                if clean[exps] == 0.0:
                    del clean[exps]
        self.terms = clean

    @classmethod
    def zero(cls, num_vars: int) -> "SparsePolynomial":
        return cls(num_vars, {})

    @classmethod
    def constant(cls, num_vars: int, c: float) -> "SparsePolynomial":
        return cls(num_vars, {(0,) * num_vars: c})

    @classmethod
    def variable(cls, num_vars: int, var: int) -> "SparsePolynomial":
        e = [0] * num_vars
        e[var] = 1
        return cls(num_vars, {tuple(e): 1.0})

    def degree(self) -> int:
        """Total degree; zero polynomial has degree 0."""
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = SparsePolynomial.constant(self.num_vars, other)
        if self.num_vars != other.num_vars:
            raise DimensionMismatch("variable count mismatch in add")
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return SparsePolynomial(self.num_vars, out)

    def __neg__(self):
        return SparsePolynomial(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = SparsePolynomial.constant(self.num_vars, other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return SparsePolynomial(
                self.num_vars, {e: c * other for e, c in self.terms.items()}
            )
        if self.num_vars != other.num_vars:
            raise DimensionMismatch("variable count mismatch in mul")
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return SparsePolynomial(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = SparsePolynomial.constant(self.num_vars, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.num_vars,):
            raise DimensionMismatch(
                f"point has shape {x.shape}, expected ({self.num_vars},)"
            )
        total = 0.0
        for e, c in self.terms.items():
            v = c
            for xi, ei in zip(x, e):
                if ei:
                    v *= xi**ei
            total += v
        return total

    def coefficient(self, exps) -> float:
        return self.terms.get(tuple(exps), 0.0)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def coeff_l1(self) -> float:
        return sum(abs(c) for c in self.terms.values())

    def __eq__(self, other):
        return (
            isinstance(other, SparsePolynomial)
            and self.num_vars == other.num_vars
            and self.terms == other.terms
        )

    def __repr__(self):
        if not self.terms:
            return "SparsePolynomial(0)"
        bits = []
        for e in sorted(self.terms, key=lambda t: (sum(t), t), reverse=True):
            mono = "*".join(
                f"x{i + 1}^{k}" if k > 1 else f"x{i + 1}"
                for i, k in enumerate(e)
                if k
            )
            bits.append(f"{self.terms[e]:+g}{'*' + mono if mono else ''}")
        return "SparsePolynomial(" + " ".join(bits) + ")"


def partial_derivative(p: SparsePolynomial, var: int) -> SparsePolynomial:
    """d p / d x_var, 0-based variable index."""
    if not 0 <= var < p.num_vars:
        raise DimensionMismatch(f"variable index {var} out of range")
    out = {}
    for e, c in p.terms.items():
        if e[var] == 0:
            continue
        d = list(e)
        d[var] -= 1
        out[tuple(d)] = out.get(tuple(d), 0.0) + c * e[var]
    return SparsePolynomial(p.num_vars, out)


class SymmetricTensor:
    """Fully symmetric rank-2k tensor stored by sorted index multisets.

    coeffs maps a sorted tuple of 2k indices (each in [0, num_vars)) to the
    common value of every tensor entry with that index multiset.
    """

    __slots__ = ("num_vars", "half_rank", "coeffs")

    def __init__(self, num_vars: int, half_rank: int, coeffs=None):
        if num_vars < 1 or half_rank < 0:
            raise ValueError("need num_vars >= 1 and half_rank >= 0")
        self.num_vars = num_vars
        self.half_rank = half_rank
        rank = 2 * half_rank
        clean = {}
        for ms, c in (coeffs or {}).items():
            ms = tuple(int(i) for i in ms)
            if len(ms) != rank:
                raise RankMismatch(f"index tuple {ms} has length {len(ms)}, expected {rank}")
            if tuple(sorted(ms)) != ms:
                raise ValueError(f"index tuple {ms} is not sorted")
            if ms and not (0 <= ms[0] and ms[-1] < num_vars):
                raise DimensionMismatch(f"index out of range in {ms}")
            c = float(c)
            if c != 0.0:
                clean[ms] = c
        self.coeffs = clean

    @property
    def rank(self) -> int:
        return 2 * self.half_rank

    def evaluate(self, x) -> float:
        """Contract against x^(rank): sum over entries T[i1..i2k] x_i1 ... x_i2k."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.num_vars,):
            raise DimensionMismatch(
                f"point has shape {x.shape}, expected ({self.num_vars},)"
            )
        total = 0.0
        for ms, c in self.coeffs.items():
            e = multiset_to_exponents(ms, self.num_vars)
            v = c * _arrangement_count(e)
            for xi, ei in zip(x, e):
                if ei:
                    v *= xi**ei
            total += v
        return total

    def to_polynomial(self) -> SparsePolynomial:
        terms = {}
        for ms, c in self.coeffs.items():
            e = multiset_to_exponents(ms, self.num_vars)
            terms[e] = c * _arrangement_count(e)
        return SparsePolynomial(self.num_vars, terms)

    @classmethod
    def from_polynomial(cls, p: SparsePolynomial) -> "SymmetricTensor":
        if not p.is_homogeneous():
            raise NotHomogeneous("tensor form requires a homogeneous polynomial")
        deg = p.degree()
        if deg % 2 != 0:
            raise OddDegree(f"tensor form requires even degree, got {deg}")
        coeffs = {}
        for e, c in p.terms.items():
            ms = exponents_to_multiset(e)
            coeffs[ms] = c / _arrangement_count(e)
        return cls(p.num_vars, deg // 2, coeffs)

    def to_dense(self) -> np.ndarray:
        """Expand to the full num_vars^rank coefficient array (small cases only)."""
        A = np.zeros((self.num_vars,) * self.rank)
        for ms, c in self.coeffs.items():
            for perm in set(itertools.permutations(ms)):
                A[perm] = c
        return A

    def __eq__(self, other):
        return (
            isinstance(other, SymmetricTensor)
            and self.num_vars == other.num_vars
            and self.half_rank == other.half_rank
            and self.coeffs == other.coeffs
        )

    def __repr__(self):
        return (
            f"SymmetricTensor(num_vars={self.num_vars}, half_rank={self.half_rank}, "
            f"{len(self.coeffs)} entries)"
        )


def tensor_to_poly(T: SymmetricTensor) -> SparsePolynomial:
    return T.to_polynomial()


def poly_to_tensor(p: SparsePolynomial) -> SymmetricTensor:
    return SymmetricTensor.from_polynomial(p)


def identity_tensor(num_vars: int, half_rank: int) -> SymmetricTensor:
    """Symmetric tensor of rank 2*half_rank contracting to ||x||^(2*half_rank)."""
    norm_sq = SparsePolynomial(
        num_vars,
        {multiset_to_exponents((i, i), num_vars): 1.0 for i in range(num_vars)},
    )
    return SymmetricTensor.from_polynomial(norm_sq**half_rank)


def symmetrize(A: np.ndarray) -> SymmetricTensor:
    """Average a raw even-rank coefficient array over all index orderings."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 0 or A.ndim % 2 != 0:
        raise RankMismatch(f"array rank {A.ndim} is not a positive even number")
    m = A.shape[0]
    if any(s != m for s in A.shape):
        raise RankMismatch(f"array shape {A.shape} is not cubical")
    rank = A.ndim
    coeffs = {}
    for ms in itertools.combinations_with_replacement(range(m), rank):
        vals = [A[u] for u in set(itertools.permutations(ms))]
        coeffs[ms] = float(np.mean(vals))
    return SymmetricTensor(m, rank // 2, coeffs)


class ComplexHermitianOperator:
    """Hermitian operator on (C^n)^(x d), indexed base-n big-endian."""

    __slots__ = ("local_dim", "copies", "entries")

    HERMITICITY_TOL = 1e-12

    def __init__(self, local_dim: int, copies: int, entries):
        if local_dim < 1 or copies < 1:
            raise ValueError("need local_dim >= 1 and copies >= 1")
        entries = np.asarray(entries, dtype=complex)
        side = local_dim**copies
        if entries.shape != (side, side):
            raise DimensionMismatch(
                f"entries shape {entries.shape}, expected ({side}, {side})"
            )
        if np.max(np.abs(entries - entries.conj().T)) > self.HERMITICITY_TOL:
            raise NotHermitian("entries are not Hermitian within tolerance")
        self.local_dim = local_dim
        self.copies = copies
        self.entries = entries

    @property
    def side(self) -> int:
        return self.local_dim**self.copies

    @classmethod
    def identity(cls, local_dim: int, copies: int) -> "ComplexHermitianOperator":
        return cls(local_dim, copies, np.eye(local_dim**copies, dtype=complex))

    def __repr__(self):
        return (
            f"ComplexHermitianOperator(local_dim={self.local_dim}, "
            f"copies={self.copies})"
        )


def _index_tuples(n: int, d: int):
    return itertools.product(range(n), repeat=d)


def realify(M: ComplexHermitianOperator) -> SymmetricTensor:
    """Real tensor form of <a^(x d)| M |a^(x d)> under a_j = x_j + i x_(n+j).

    Variables are ordered real parts first, then imaginary parts, so the
    output has 2n variables and rank 2d.  evaluate(realify(M), x) equals the
    complex quadratic form at a = x[:n] + i x[n:].
    """
    n, d = M.local_dim, M.copies
    nv = 2 * n
    acc: dict[tuple[int, ...], complex] = {(0,) * nv: 0.0 + 0.0j}

    def mul_linear(poly, var_re, var_im, sign_im):
        # multiply by (x_re + sign_im * i * x_im)
        out: dict[tuple[int, ...], complex] = {}
        for e, c in poly.items():
            e1 = list(e)
            e1[var_re] += 1
            k = tuple(e1)
            out[k] = out.get(k, 0.0 + 0.0j) + c
            e2 = list(e)
            e2[var_im] += 1
            k = tuple(e2)
            out[k] = out.get(k, 0.0 + 0.0j) + c * (1j * sign_im)
        return out

    for I in _index_tuples(n, d):
        row = sum(i * n**p for p, i in enumerate(reversed(I)))
        for J in _index_tuples(n, d):
            col = sum(j * n**p for p, j in enumerate(reversed(J)))
            c = M.entries[row, col]
            if c == 0:
                continue
            term = {(0,) * nv: complex(c)}
            for i in I:  # conjugated bra factors
                term = mul_linear(term, i, n + i, -1.0)
            for j in J:  # ket factors
                term = mul_linear(term, j, n + j, +1.0)
            for e, v in term.items():
                acc[e] = acc.get(e, 0.0 + 0.0j) + v

    scale = max(1.0, float(np.max(np.abs(M.entries))))
    terms = {}
    for e, v in acc.items():
        if abs(v.imag) > 1e-9 * scale:
            raise NotHermitian(f"imaginary residue {v.imag} in realified coefficient")
        if v.real != 0.0:
            terms[e] = v.real
    p = SparsePolynomial(nv, terms)
    if p.is_zero():
        return SymmetricTensor(nv, d, {})
    return SymmetricTensor.from_polynomial(p)
