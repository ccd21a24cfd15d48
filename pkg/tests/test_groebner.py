"""Exact rational Groebner layer: Buchberger, division, degree reports."""

from fractions import Fraction

import numpy as np
import pytest

from sephier import (
    RationalPolynomial,
    SparsePolynomial,
    buchberger,
    degree_bound_report,
    dehomogenize,
    homogenize,
    is_zero_dimensional,
    kkt_generators,
    reduce,
    remainder_degree_bound,
    snap_to_rational,
)
from sephier.errors import CapExceeded, NotHomogeneous


def worked_basis():
    # stationarity ideal of x1^2 on the circle: variety {(+-1,0),(0,+-1)}
    gens = [
        RationalPolynomial(2, {(1, 1): Fraction(4)}),
        RationalPolynomial(2, {(2, 0): 1, (0, 2): 1, (0, 0): -1}),
    ]
    return buchberger(gens)


def random_rational(rng, num_vars, max_degree, max_terms=6, den_cap=9):
    terms = {}
    for _ in range(int(rng.integers(1, max_terms + 1))):
        e = tuple(int(v) for v in rng.integers(0, max_degree + 1, size=num_vars))
        if sum(e) > max_degree:
            continue
        num = int(rng.integers(-20, 21))
        den = int(rng.integers(1, den_cap + 1))
        terms[e] = terms.get(e, Fraction(0)) + Fraction(num, den)
    return RationalPolynomial(num_vars, terms)


def test_single_generator_is_its_own_basis():
    g = RationalPolynomial(1, {(2,): 1, (0,): -1})
    basis = buchberger([g])
    assert len(basis.elements) == 1
    assert basis.elements[0] == g
    assert basis.ordering == "grlex"


def test_coordinate_ideal():
    gens = [RationalPolynomial.variable(2, 0), RationalPolynomial.variable(2, 1)]
    basis = buchberger(gens)
    assert sorted(basis.leading_monomials()) == [(0, 1), (1, 0)]
    assert is_zero_dimensional(basis)


def test_worked_ideal_basis():
    basis = worked_basis()
    lms = set(basis.leading_monomials())
    assert lms == {(1, 1), (2, 0), (0, 3)}
    # x2^3 - x2 must appear: x2 * circle - x1 * (x1 x2)
    cubic = RationalPolynomial(2, {(0, 3): 1, (0, 1): -1})
    assert any(g == cubic for g in basis.elements)
    assert basis.max_degree == 3
    assert is_zero_dimensional(basis)


def test_spolynomials_of_basis_reduce_to_zero():
    basis = worked_basis()
    elems = basis.elements
    for i in range(len(elems)):
        for j in range(i + 1, len(elems)):
            lmi, lmj = elems[i].leading_monomial(), elems[j].leading_monomial()
            lcm = tuple(max(a, b) for a, b in zip(lmi, lmj))
            s = elems[i].term_mul(
                tuple(l - a for l, a in zip(lcm, lmi)),
                Fraction(1) / elems[i].leading_coeff(),
            ) - elems[j].term_mul(
                tuple(l - a for l, a in zip(lcm, lmj)),
                Fraction(1) / elems[j].leading_coeff(),
            )
            _, r = reduce(s, basis)
            assert r.is_zero()


def test_reduce_univariate():
    basis = [RationalPolynomial(1, {(2,): 1, (0,): -1})]
    qs, r = reduce(RationalPolynomial(1, {(3,): 1}), basis)
    assert qs[0] == RationalPolynomial(1, {(1,): 1})
    assert r == RationalPolynomial(1, {(1,): 1})
    assert r.degree() <= remainder_degree_bound(1, 2)


def test_reduce_membership():
    basis = worked_basis()
    member = RationalPolynomial(2, {(2, 0): 1, (0, 2): 1, (0, 0): -1})
    _, r = reduce(member, basis)
    assert r.is_zero()


def test_reduce_reconstruction_random():
    rng = np.random.default_rng(17)
    basis = worked_basis()
    bound = remainder_degree_bound(2, basis.max_degree)
    lms = basis.leading_monomials()
    for _ in range(20):
        f = random_rational(rng, 2, 8)
        qs, r = reduce(f, basis)
        rebuilt = r
        for q, g in zip(qs, basis.elements):
            rebuilt = rebuilt + q * g
            assert q.degree() <= max(f.degree(), 0)
        assert rebuilt == f
        assert r.is_zero() or r.degree() <= bound
        for e in r.terms:
            assert not any(all(a <= b for a, b in zip(lm, e)) for lm in lms)


def test_zero_dimensionality_detection():
    no_power = buchberger([RationalPolynomial(2, {(1, 1): 1})])
    assert not is_zero_dimensional(no_power)
    assert is_zero_dimensional(worked_basis())


def test_homogenize_dehomogenize():
    f = RationalPolynomial(2, {(2, 0): 1, (0, 2): 1, (0, 0): -1})
    hf = homogenize(f)
    assert hf == RationalPolynomial(3, {(0, 2, 0): 1, (0, 0, 2): 1, (2, 0, 0): -1})
    assert hf.is_homogeneous()
    assert dehomogenize(hf) == f
    with pytest.raises(NotHomogeneous):
        dehomogenize(RationalPolynomial(2, {(1, 0): 1, (0, 0): 1, (2, 0): 3}))


def test_homogeneous_generators_give_homogeneous_basis():
    rng = np.random.default_rng(41)
    for _ in range(5):
        gens = []
        for deg in (2, 3):
            terms = {}
            for e in [(deg, 0), (deg - 1, 1), (0, deg)]:
                terms[e] = Fraction(int(rng.integers(-5, 6)))
            g = RationalPolynomial(2, terms)
            if not g.is_zero():
                gens.append(g)
        basis = buchberger(gens)
        assert all(g.is_homogeneous() for g in basis.elements)


def test_degree_bound_report_values():
    assert degree_bound_report(1, 1, 0) == 3
    assert degree_bound_report(5, 1, 0) == 3
    assert degree_bound_report(2, 2, 0) == 8
    assert degree_bound_report(3, 2, 1) == 32


def test_remainder_degree_bound_values():
    assert remainder_degree_bound(2, 3) == 4
    assert remainder_degree_bound(1, 2) == 1


def test_degree_cap_trips():
    gens = [RationalPolynomial(1, {(31,): 1})]
    with pytest.raises(CapExceeded):
        buchberger(gens, degree_cap=30)


def test_snap_to_rational_simple():
    p = SparsePolynomial(1, {(1,): 0.5, (0,): 0.333333})
    q, dist = snap_to_rational(p, denominator_cap=10)
    assert q.terms[(1,)] == Fraction(1, 2)
    assert q.terms[(0,)] == Fraction(1, 3)
    assert dist <= 1e-6
    assert dist > 0.0


def test_snap_recovers_bounded_denominators():
    rng = np.random.default_rng(8)
    for _ in range(20):
        fr = Fraction(int(rng.integers(-50, 51)), int(rng.integers(1, 50)))
        p = SparsePolynomial(1, {(1,): float(fr)})
        q, dist = snap_to_rational(p, denominator_cap=10**6)
        assert q.terms.get((1,), Fraction(0)) == fr
        assert dist <= 1e-12


def test_kkt_generators_exact():
    f0 = RationalPolynomial(2, {(2, 0): 1})
    gens = kkt_generators(f0)
    assert gens[0] == RationalPolynomial(2, {(2, 0): 1, (0, 2): 1, (0, 0): -1})
    assert gens[1] == RationalPolynomial(2, {(1, 1): 4})
    # radially aligned objective leaves only the sphere
    norm2 = RationalPolynomial(2, {(2, 0): 1, (0, 2): 1})
    assert len(kkt_generators(norm2)) == 1
