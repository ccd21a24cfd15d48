"""Exact Groebner basis machinery over the rationals, graded-lex order.

Monomials are exponent tuples; x1 > x2 > ... and degree compares first.
All coefficients are fractions.Fraction, so membership tests and division
remainders are exact.  A degree cap bounds intermediate S-polynomial work
and raises CapExceeded instead of running away.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import CapExceeded, DimensionMismatch, NotHomogeneous
from .tensor_poly import SparsePolynomial


def grlex_key(exps: tuple[int, ...]):
    return (sum(exps), exps)


def _divides(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _mono_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _mono_div(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _mono_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


class RationalPolynomial:
    """Polynomial with Fraction coefficients keyed by exponent tuples."""

    __slots__ = ("num_vars", "terms", "_lm")

    def __init__(self, num_vars: int, terms=None):
        if num_vars < 1:
            raise ValueError("num_vars must be >= 1")
        self.num_vars = num_vars
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != num_vars:
                raise DimensionMismatch(f"exponent tuple {e} length != {num_vars}")
            c = Fraction(c)
            if c != 0:
                clean[e] = clean.get(e, Fraction(0)) + c
                if clean[e] == 0:
                    del clean[e]
        self.terms = clean
        self._lm = None

    @classmethod
    def zero(cls, num_vars: int) -> "RationalPolynomial":
        return cls(num_vars, {})

    @classmethod
    def variable(cls, num_vars: int, var: int) -> "RationalPolynomial":
        e = [0] * num_vars
        e[var] = 1
        return cls(num_vars, {tuple(e): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def leading_monomial(self) -> tuple[int, ...]:
        if self._lm is None:
            self._lm = max(self.terms, key=grlex_key)
        return self._lm

    def leading_coeff(self) -> Fraction:
        return self.terms[self.leading_monomial()]

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return RationalPolynomial(self.num_vars, out)

    def __neg__(self):
        return RationalPolynomial(
            self.num_vars, {e: -c for e, c in self.terms.items()}
        )

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalPolynomial(
                self.num_vars, {e: c * other for e, c in self.terms.items()}
            )
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _mono_mul(e1, e2)
                v = out.get(e)
                out[e] = c1 * c2 if v is None else v + c1 * c2
        return RationalPolynomial(self.num_vars, out)

    __rmul__ = __mul__

    def term_mul(self, exps, coeff) -> "RationalPolynomial":
        return RationalPolynomial(
            self.num_vars,
            {_mono_mul(e, exps): c * coeff for e, c in self.terms.items()},
        )

    def monic(self) -> "RationalPolynomial":
        lc = self.leading_coeff()
        return RationalPolynomial(
            self.num_vars, {e: c / lc for e, c in self.terms.items()}
        )

    def primitive(self) -> "RationalPolynomial":
        """Scale to coprime integer coefficients with positive leading sign."""
        if self.is_zero():
            return self
        den = 1
        for c in self.terms.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        num = 0
        for c in self.terms.values():
            num = math.gcd(num, abs(c.numerator * (den // c.denominator)))
        scale = Fraction(den, num)
        if self.leading_coeff() < 0:
            scale = -scale
        return self * scale

    def __eq__(self, other):
        return (
            isinstance(other, RationalPolynomial)
            and self.num_vars == other.num_vars
            and self.terms == other.terms
        )

    def __repr__(self):
        if not self.terms:
            return "RationalPolynomial(0)"
        bits = []
        for e in sorted(self.terms, key=grlex_key, reverse=True):
            mono = "*".join(
                f"x{i + 1}^{k}" if k > 1 else f"x{i + 1}"
                for i, k in enumerate(e)
                if k
            )
            c = self.terms[e]
            bits.append(f"{'+' if c > 0 else '-'}{abs(c)}{'*' + mono if mono else ''}")
        return "RationalPolynomial(" + " ".join(bits) + ")"


def reduce(f: RationalPolynomial, basis) -> tuple[list[RationalPolynomial], RationalPolynomial]:
    """Multivariate division: f = sum a_i g_i + remainder.

    Divisors are tried in list order.  In graded-lex order every quotient has
    degree at most deg(f), and no remainder term is divisible by any leading
    monomial of the basis.
    """
    divisors = list(basis.elements) if isinstance(basis, GroebnerBasis) else list(basis)
    if any(g.is_zero() for g in divisors):
        raise ValueError("zero divisor in basis")
    nv = f.num_vars
    quotients = [RationalPolynomial.zero(nv) for _ in divisors]
    remainder: dict[tuple[int, ...], Fraction] = {}
    work = dict(f.terms)
    lms = [g.leading_monomial() for g in divisors]
    lcs = [g.leading_coeff() for g in divisors]
    while work:
        lt = max(work, key=grlex_key)
        c = work.pop(lt)
        for i, g in enumerate(divisors):
            if _divides(lms[i], lt):
                q_exps = _mono_div(lt, lms[i])
                q_coeff = c / lcs[i]
                quotients[i].terms[q_exps] = (
                    quotients[i].terms.get(q_exps, Fraction(0)) + q_coeff
                )
                for e, gc in g.terms.items():
                    if e == lms[i]:
                        continue
                    k = _mono_mul(e, q_exps)
                    v = work.get(k, Fraction(0)) - q_coeff * gc
                    if v == 0:
                        work.pop(k, None)
                    else:
                        work[k] = v
                break
        else:
            remainder[lt] = c
    quotients = [RationalPolynomial(nv, q.terms) for q in quotients]
    return quotients, RationalPolynomial(nv, remainder)


@dataclass
class GroebnerBasis:
    ordering: str
    elements: list
    max_degree: int

    def leading_monomials(self) -> list[tuple[int, ...]]:
        return [g.leading_monomial() for g in self.elements]


def _s_polynomial(f: RationalPolynomial, g: RationalPolynomial) -> RationalPolynomial:
    lcm = _mono_lcm(f.leading_monomial(), g.leading_monomial())
    uf = _mono_div(lcm, f.leading_monomial())
    ug = _mono_div(lcm, g.leading_monomial())
    return f.term_mul(uf, Fraction(1) / f.leading_coeff()) - g.term_mul(
        ug, Fraction(1) / g.leading_coeff()
    )


def buchberger(generators, degree_cap: int = 30) -> GroebnerBasis:
    """Reduced graded-lex Groebner basis by Buchberger's algorithm.

    Pairs are processed lowest lcm degree first.  The product criterion and
    the chain criterion prune useless pairs.  Any S-polynomial whose lcm
    degree exceeds degree_cap raises CapExceeded.
    """
    gens = [g.primitive() for g in generators if not g.is_zero()]
    if not gens:
        raise ValueError("no nonzero generators")
    nv = gens[0].num_vars
    if any(g.num_vars != nv for g in gens):
        raise DimensionMismatch("generators disagree on variable count")
    worst = max(g.degree() for g in gens)
    if worst > degree_cap:
        raise CapExceeded(worst, degree_cap)

    G: list[RationalPolynomial] = []
    pair_heap: list = []
    done_pairs: set = set()

    def push_pairs(new_idx: int):
        lm_new = G[new_idx].leading_monomial()
        for i in range(new_idx):
            lcm = _mono_lcm(G[i].leading_monomial(), lm_new)
            heapq.heappush(pair_heap, (sum(lcm), i, new_idx, lcm))

    for g in gens:
        G.append(g)
        push_pairs(len(G) - 1)

    while pair_heap:
        lcm_deg, i, j, lcm = heapq.heappop(pair_heap)
        done_pairs.add((i, j))
        lmi = G[i].leading_monomial()
        lmj = G[j].leading_monomial()
        # product criterion: coprime leading monomials reduce to zero
        if _mono_mul(lmi, lmj) == lcm:
            continue
        # chain criterion: some k with LM(k) | lcm and both pairs handled
        skip = False
        for k in range(len(G)):
            if k in (i, j):
                continue
            if _divides(G[k].leading_monomial(), lcm):
                pik = (min(i, k), max(i, k))
                pjk = (min(j, k), max(j, k))
                if pik in done_pairs and pjk in done_pairs:
                    skip = True
                    break
        if skip:
            continue
        if lcm_deg > degree_cap:
            raise CapExceeded(lcm_deg, degree_cap)
        s = _s_polynomial(G[i], G[j])
        if s.is_zero():
            continue
        _, r = reduce(s, G)
        if r.is_zero():
            continue
        G.append(r.primitive())
        push_pairs(len(G) - 1)

    # minimal basis: drop elements whose leading monomial is divisible by another's
    keep = []
    lms = [g.leading_monomial() for g in G]
    for i, g in enumerate(G):
        if any(
            k != i
            and _divides(lms[k], lms[i])
            and (lms[k] != lms[i] or k < i)
            for k in keep + list(range(i + 1, len(G)))
        ):
            continue
        keep.append(i)
    minimal = [G[i] for i in keep]

    # fully reduce tails against the rest, then make monic
    reduced = []
    for i, g in enumerate(minimal):
        others = [h for k, h in enumerate(minimal) if k != i]
        if others:
            _, r = reduce(g, others)
        else:
            r = g
        reduced.append(r.monic())
    reduced.sort(key=lambda p: grlex_key(p.leading_monomial()))
    max_deg = max(g.degree() for g in reduced)
    return GroebnerBasis("grlex", reduced, max_deg)


def is_zero_dimensional(basis: GroebnerBasis) -> bool:
    """True iff every variable has a pure-power leading monomial in the basis."""
    if not basis.elements:
        return False
    nv = basis.elements[0].num_vars
    lms = basis.leading_monomials()
    if any(sum(lm) == 0 for lm in lms):
        return True  # ideal is the whole ring
    for v in range(nv):
        ok = False
        for lm in lms:
            if lm[v] > 0 and all(e == 0 for k, e in enumerate(lm) if k != v):
                ok = True
                break
        if not ok:
            return False
    return True


def homogenize(f: RationalPolynomial) -> RationalPolynomial:
    """Introduce x0 as the new first variable so every term reaches deg(f)."""
    if f.is_zero():
        return RationalPolynomial.zero(f.num_vars + 1)
    d = f.degree()
    return RationalPolynomial(
        f.num_vars + 1,
        {(d - sum(e),) + e: c for e, c in f.terms.items()},
    )


def dehomogenize(f: RationalPolynomial) -> RationalPolynomial:
    """Drop the homogenizing first variable (set x0 = 1)."""
    if not f.is_homogeneous():
        raise NotHomogeneous("dehomogenize expects a homogeneous polynomial")
    if f.num_vars < 2:
        raise DimensionMismatch("nothing to dehomogenize")
    out: dict[tuple[int, ...], Fraction] = {}
    for e, c in f.terms.items():
        k = e[1:]
        out[k] = out.get(k, Fraction(0)) + c
    return RationalPolynomial(f.num_vars - 1, out)


def degree_bound_report(n: int, d: int, r: int) -> int:
    """Worst-case basis degree figure 2*(d^(n-r)/2 + d)^(2^r), reporting only.

    Evaluated exactly in rational arithmetic; the rare non-integer values
    (odd d with r >= 1) round up.
    """
    if n < 1 or d < 1 or r < 0 or r > n:
        raise ValueError(f"bad arguments n={n}, d={d}, r={r}")
    val = 2 * (Fraction(d ** (n - r), 2) + d) ** (2**r)
    return math.ceil(val)


def remainder_degree_bound(n: int, max_basis_degree: int) -> int:
    """Degree bound n*(D-1) for division remainders modulo a zero-dimensional basis."""
    if n < 1 or max_basis_degree < 1:
        raise ValueError("need n >= 1 and max_basis_degree >= 1")
    return n * (max_basis_degree - 1)


def snap_to_rational(
    p: SparsePolynomial, denominator_cap: int = 10**6
) -> tuple[RationalPolynomial, float]:
    """Best rational approximation of each coefficient with bounded denominator.

    Returns the snapped polynomial and the largest absolute snap distance.
    """
    if denominator_cap < 1:
        raise ValueError("denominator_cap must be >= 1")
    terms = {}
    worst = 0.0
    for e, c in p.terms.items():
        q = Fraction(c).limit_denominator(denominator_cap)
        worst = max(worst, abs(float(q) - c))
        terms[e] = q
    return RationalPolynomial(p.num_vars, terms), worst


def kkt_generators(f0: RationalPolynomial) -> list[RationalPolynomial]:
    """Exact sphere + Jacobian-minor generators of the stationarity ideal."""
    if not f0.is_homogeneous() or f0.is_zero():
        raise NotHomogeneous("objective must be nonzero homogeneous")
    m = f0.num_vars
    partials = []
    for v in range(m):
        terms = {}
        for e, c in f0.terms.items():
            if e[v]:
                k = list(e)
                k[v] -= 1
                terms[tuple(k)] = terms.get(tuple(k), Fraction(0)) + c * e[v]
        partials.append(RationalPolynomial(m, terms))
    xs = [RationalPolynomial.variable(m, v) for v in range(m)]
    sphere_terms = {}
    for v in range(m):
        e = [0] * m
        e[v] = 2
        sphere_terms[tuple(e)] = Fraction(1)
    sphere_terms[(0,) * m] = Fraction(-1)
    gens = [RationalPolynomial(m, sphere_terms)]
    for i in range(m):
        for j in range(i + 1, m):
            g = (partials[i] * xs[j] - partials[j] * xs[i]) * 2
            if not g.is_zero():
                gens.append(g)
    return gens
