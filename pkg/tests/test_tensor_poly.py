"""Polynomial and symmetric tensor layer."""

import itertools
import math

import numpy as np
import pytest

from sephier import (
    ComplexHermitianOperator,
    SparsePolynomial,
    SymmetricTensor,
    identity_tensor,
    monomial_count,
    monomials_of_degree,
    partial_derivative,
    poly_to_tensor,
    realify,
    symmetrize,
    tensor_to_poly,
)
from sephier.errors import (
    DimensionMismatch,
    NotHermitian,
    NotHomogeneous,
    OddDegree,
    RankMismatch,
)


def random_homogeneous(rng, m, degree, scale=1.0):
    monos = monomials_of_degree(m, degree)
    return SparsePolynomial(m, {e: scale * rng.standard_normal() for e in monos})


def test_monomial_count_small():
    assert monomial_count(2, 2) == 3
    assert monomial_count(1, 7) == 1
    assert monomial_count(4, 4) == 35
    assert monomial_count(3, 0) == 1


def test_monomial_count_matches_enumeration():
    for m in range(1, 5):
        for deg in range(0, 6):
            assert monomial_count(m, deg) == len(monomials_of_degree(m, deg))


def test_monomial_count_rejects_bad_args():
    with pytest.raises(ValueError):
        monomial_count(0, 2)
    with pytest.raises(ValueError):
        monomial_count(2, -1)


def test_monomials_graded_lex_descending():
    monos = monomials_of_degree(3, 3)
    assert len(monos) == len(set(monos))
    assert all(sum(e) == 3 for e in monos)
    assert monos == sorted(monos, reverse=True)
    assert monos[0] == (3, 0, 0)
    assert monos[-1] == (0, 0, 3)


def test_polynomial_arithmetic():
    x = SparsePolynomial.variable(2, 0)
    y = SparsePolynomial.variable(2, 1)
    p = (x + y) ** 2
    assert p.coefficient((2, 0)) == 1.0
    assert p.coefficient((1, 1)) == 2.0
    assert p.coefficient((0, 2)) == 1.0
    q = p - x * x - y * y - x * y * 2.0
    assert q.is_zero()
    assert (x * y).degree() == 2
    assert p.is_homogeneous()
    assert not (p + SparsePolynomial.constant(2, 1.0)).is_homogeneous()


def test_polynomial_evaluate_matches_horner_free_form():
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = random_homogeneous(rng, 3, 4)
        x = rng.standard_normal(3)
        direct = sum(
            c * np.prod([x[i] ** e for i, e in enumerate(expo)])
            for expo, c in p.terms.items()
        )
        assert abs(p.evaluate(x) - direct) <= 1e-12 * (1.0 + abs(direct))


def test_partial_derivative_simple():
    # d/dx1 (x1^2 x2) = 2 x1 x2
    p = SparsePolynomial(2, {(2, 1): 1.0})
    dp = partial_derivative(p, 0)
    assert dp == SparsePolynomial(2, {(1, 1): 2.0})
    assert partial_derivative(SparsePolynomial.constant(2, 5.0), 1).is_zero()


def test_partial_derivative_matches_finite_differences():
    rng = np.random.default_rng(23)
    h = 1e-6
    for _ in range(20):
        p = random_homogeneous(rng, 3, 4)
        x = rng.standard_normal(3)
        i = int(rng.integers(0, 3))
        e = np.zeros(3)
        e[i] = h
        fd = (p.evaluate(x + e) - p.evaluate(x - e)) / (2 * h)
        exact = partial_derivative(p, i).evaluate(x)
        assert abs(fd - exact) <= 1e-5 * (1.0 + abs(exact))


def test_poly_tensor_roundtrip_simple():
    # x1 x2 spreads evenly over its two orderings
    p = SparsePolynomial(2, {(1, 1): 1.0})
    T = poly_to_tensor(p)
    assert T.coeffs == {(0, 1): 0.5}
    assert tensor_to_poly(T) == p


def test_poly_tensor_roundtrip_random():
    # coefficients pass through one divide and one multiply, so match to an ulp
    rng = np.random.default_rng(3)
    for _ in range(10):
        p = random_homogeneous(rng, 3, 4)
        q = tensor_to_poly(poly_to_tensor(p))
        diff = q - p
        assert diff.max_abs_coeff() <= 1e-15 * (1.0 + p.max_abs_coeff())


def test_tensor_rejects_bad_polynomials():
    with pytest.raises(NotHomogeneous):
        poly_to_tensor(SparsePolynomial(2, {(2, 0): 1.0, (1, 0): 1.0}))
    with pytest.raises(OddDegree):
        poly_to_tensor(SparsePolynomial(2, {(2, 1): 1.0}))


def test_tensor_key_validation():
    with pytest.raises(RankMismatch):
        SymmetricTensor(2, 1, {(0, 1, 1): 1.0})
    with pytest.raises(ValueError):
        SymmetricTensor(2, 1, {(1, 0): 1.0})
    with pytest.raises(DimensionMismatch):
        SymmetricTensor(2, 1, {(0, 5): 1.0})


def test_identity_tensor_is_norm_power():
    for m, k in [(2, 1), (3, 2), (4, 1)]:
        T = identity_tensor(m, k)
        rng = np.random.default_rng(m * 10 + k)
        for _ in range(5):
            x = rng.standard_normal(m)
            want = float(np.dot(x, x)) ** k
            assert abs(T.evaluate(x) - want) <= 1e-12 * (1.0 + abs(want))


def test_tensor_evaluate_matches_polynomial():
    rng = np.random.default_rng(71)
    for _ in range(10):
        p = random_homogeneous(rng, 3, 4)
        T = poly_to_tensor(p)
        x = rng.standard_normal(3)
        assert abs(T.evaluate(x) - p.evaluate(x)) <= 1e-11 * (1.0 + abs(p.evaluate(x)))


def test_symmetrize_two_orderings():
    A = np.zeros((2, 2))
    A[0, 1] = 1.0
    T = symmetrize(A)
    assert T.coeffs == {(0, 1): 0.5}


def test_symmetrize_idempotent_on_symmetric_input():
    T = poly_to_tensor(SparsePolynomial(2, {(2, 2): 1.0}))
    assert symmetrize(T.to_dense()) == T


def test_symmetrize_matches_permutation_average():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((3, 3, 3, 3))
    T = symmetrize(A)
    S = np.zeros_like(A)
    for perm in itertools.permutations(range(4)):
        S += np.transpose(A, perm)
    S /= math.factorial(4)
    assert np.max(np.abs(T.to_dense() - S)) <= 1e-12


def test_symmetrize_rejects_bad_shapes():
    with pytest.raises(RankMismatch):
        symmetrize(np.zeros((2, 2, 2)))
    with pytest.raises(RankMismatch):
        symmetrize(np.zeros((2, 3)))


def test_hermitian_operator_checks():
    ComplexHermitianOperator(2, 1, np.eye(2))
    bad = np.eye(2, dtype=complex)
    bad[0, 1] = 1e-6
    with pytest.raises(NotHermitian):
        ComplexHermitianOperator(2, 1, bad)
    with pytest.raises(DimensionMismatch):
        ComplexHermitianOperator(2, 2, np.eye(3))
    assert ComplexHermitianOperator.identity(2, 2).side == 4


def test_hermitian_tolerance_is_absolute():
    # a large matrix does not get a proportionally looser check
    bad = 1e6 * np.eye(2, dtype=complex)
    bad[0, 1] = 1e-9
    with pytest.raises(NotHermitian):
        ComplexHermitianOperator(2, 1, bad)


def test_realify_single_mode():
    T = realify(ComplexHermitianOperator(1, 1, np.array([[1.0]])))
    assert tensor_to_poly(T) == SparsePolynomial(2, {(2, 0): 1.0, (0, 2): 1.0})


def test_realify_diagonal_two_modes():
    # variable order: real parts first, then imaginary parts
    T = realify(ComplexHermitianOperator(2, 1, np.diag([1.0, -1.0])))
    want = SparsePolynomial(4, {(2, 0, 0, 0): 1.0, (0, 0, 2, 0): 1.0,
                                (0, 2, 0, 0): -1.0, (0, 0, 0, 2): -1.0})
    assert tensor_to_poly(T) == want


def test_realify_point_evaluation():
    T = realify(ComplexHermitianOperator(2, 1, np.diag([1.0, 0.0])))
    assert abs(T.evaluate(np.array([1.0, 0.0, 0.0, 0.0])) - 1.0) <= 1e-14


def test_realify_matches_complex_expectation():
    # <a^(d) | M | a^(d)> with a_j = x_j + i x_{n+j}
    rng = np.random.default_rng(2024)
    n, d = 2, 2
    side = n ** d
    for _ in range(8):
        G = rng.standard_normal((side, side)) + 1j * rng.standard_normal((side, side))
        M = 0.5 * (G + G.conj().T)
        T = realify(ComplexHermitianOperator(n, d, M))
        for _ in range(6):
            x = rng.standard_normal(2 * n)
            x /= np.linalg.norm(x)
            a = x[:n] + 1j * x[n:]
            vec = a
            for _ in range(d - 1):
                vec = np.kron(vec, a)
            want = float(np.real(vec.conj() @ M @ vec))
            assert abs(T.evaluate(x) - want) <= 1e-10 * (1.0 + abs(want))
