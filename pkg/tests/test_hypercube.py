import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubelearn.hypercube import (
    DimensionMismatchError,
    Polynomial,
    all_points,
    enumerate_monomials,
    eval_monomial,
    fourier_transform,
    monomial_matrix,
    point_index,
)


def random_polynomial(rng, d, k, terms=6):
    monomials = enumerate_monomials(d, k)
    picks = rng.choice(len(monomials), size=min(terms, len(monomials)), replace=False)
    return Polynomial({monomials[i]: float(rng.normal()) for i in picks}, degree_bound=k)


class TestEvalMonomial:
    def test_single_coordinate(self):
        assert eval_monomial([1, -1, 1], (2,)) == -1

    def test_two_negatives(self):
        assert eval_monomial([-1, -1], (1, 2)) == 1

    def test_empty_product(self):
        assert eval_monomial([1, -1], ()) == 1
        assert eval_monomial([-1, -1, -1], ()) == 1

    def test_out_of_range(self):
        with pytest.raises(DimensionMismatchError):
            eval_monomial([1, -1], (3,))


class TestEvalPoly:
    def test_direct_sum(self):
        p = Polynomial({(1,): 2.0, (2, 3): -3.0})
        assert p.evaluate(np.array([1, 1, 1])) == -1.0

    def test_constant(self):
        p = Polynomial({(): 0.5})
        assert p.evaluate(np.array([1, -1])) == 0.5
        assert p.evaluate(np.array([-1, -1, -1])) == 0.5

    def test_single_monomial(self):
        p = Polynomial({(1, 2): 1.0})
        assert p.evaluate(np.array([-1, 1])) == -1.0

    def test_dimension_mismatch(self):
        p = Polynomial({(3,): 1.0})
        with pytest.raises(DimensionMismatchError):
            p.evaluate(np.array([1, -1]))

    def test_batch_matches_single(self):
        rng = np.random.default_rng(0)
        p = random_polynomial(rng, 5, 3)
        pts = rng.choice(np.array([-1, 1], dtype=np.int8), size=(20, 5))
        batch = p.evaluate(pts)
        for i in range(20):
            assert batch[i] == pytest.approx(p.evaluate(pts[i]), abs=1e-12)


class TestCoefNorm:
    def test_two_terms(self):
        assert Polynomial({(1,): 2.0, (2, 3): -3.0}).coef_norm() == 5.0

    def test_zero(self):
        assert Polynomial.zero().coef_norm() == 0.0

    def test_constant(self):
        assert Polynomial({(): -1.5}).coef_norm() == 1.5


class TestUniformMoments:
    def test_mean_reads_constant_term(self):
        assert Polynomial({(): 0.3, (1, 2): 4.0}).uniform_mean() == 0.3

    def test_mean_of_parity_is_zero(self):
        assert Polynomial({(1, 2, 3): 1.0}).uniform_mean() == 0.0

    def test_mean_of_constant(self):
        assert Polynomial({(): -2.25}).uniform_mean() == -2.25

    def test_l2_two_terms(self):
        assert Polynomial({(1,): 2.0, (2, 3): -3.0}).uniform_l2_squared() == 13.0

    def test_l2_zero(self):
        assert Polynomial.zero().uniform_l2_squared() == 0.0

    def test_l2_constant(self):
        assert Polynomial({(): 1.5}).uniform_l2_squared() == pytest.approx(2.25)

    def test_moments_match_enumeration(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            d = int(rng.integers(2, 9))
            k = int(rng.integers(0, d + 1))
            p = random_polynomial(rng, d, k)
            values = p.evaluate(all_points(d))
            assert p.uniform_mean() == pytest.approx(values.mean(), abs=1e-10)
            assert p.uniform_l2_squared() == pytest.approx((values ** 2).mean(), abs=1e-10)


class TestEnumerateMonomials:
    def test_d3_k1(self):
        assert enumerate_monomials(3, 1) == [(), (1,), (2,), (3,)]

    def test_d2_k2(self):
        assert enumerate_monomials(2, 2) == [(), (1,), (2,), (1, 2)]

    def test_d4_k0(self):
        assert enumerate_monomials(4, 0) == [()]

    def test_count_formula(self):
        from math import comb

        for d in (3, 5, 8):
            for k in range(d + 1):
                assert len(enumerate_monomials(d, k)) == sum(comb(d, j) for j in range(k + 1))

    def test_k_above_d_rejected(self):
        with pytest.raises(ValueError):
            enumerate_monomials(3, 4)


class TestFourierTransform:
    def test_dictator(self):
        table = all_points(3)[:, 0]
        p = fourier_transform(table)
        assert p.coefficients == {(1,): 1.0}

    def test_and2_solved_system(self):
        # Oracle: the unique multilinear interpolant from the 4x4 linear system.
        pts = all_points(2)
        table = np.where((pts[:, 0] == 1) & (pts[:, 1] == 1), 1.0, -1.0)
        design = monomial_matrix(pts, enumerate_monomials(2, 2))
        oracle = np.linalg.solve(design, table)
        assert oracle == pytest.approx([-0.5, 0.5, 0.5, 0.5])
        p = fourier_transform(table)
        assert p.coefficients == {(): -0.5, (1,): 0.5, (2,): 0.5, (1, 2): 0.5}

    def test_constant_true(self):
        p = fourier_transform(np.ones(8))
        assert p.coefficients == {(): 1.0}

    def test_bad_length(self):
        with pytest.raises(ValueError):
            fourier_transform([1.0, -1.0, 1.0])

    def test_pointwise_reconstruction(self):
        rng = np.random.default_rng(7)
        table = rng.choice([-1.0, 1.0], size=16)
        p = fourier_transform(table)
        assert p.evaluate(all_points(4)) == pytest.approx(table, abs=1e-12)


class TestPolynomialAlgebra:
    def test_product_folds_squares(self):
        # (x1 + x2)^2 = 2 + 2 x1 x2 on the cube
        p = Polynomial({(1,): 1.0, (2,): 1.0})
        sq = p * p
        assert sq.coefficients == {(): 2.0, (1, 2): 2.0}

    def test_product_matches_pointwise(self):
        rng = np.random.default_rng(3)
        a = random_polynomial(rng, 5, 2)
        b = random_polynomial(rng, 5, 2)
        pts = all_points(5)
        assert (a * b).evaluate(pts) == pytest.approx(a.evaluate(pts) * b.evaluate(pts), abs=1e-9)

    def test_json_roundtrip(self):
        rng = np.random.default_rng(5)
        p = random_polynomial(rng, 6, 3)
        q = Polynomial.from_json(p.to_json())
        assert q == p

    def test_invalid_index_rejected(self):
        with pytest.raises(ValueError):
            Polynomial({(0,): 1.0})
        with pytest.raises(ValueError):
            Polynomial({(2, 2): 1.0})


@st.composite
def polynomials(draw):
    d = draw(st.integers(min_value=2, max_value=6))
    k = draw(st.integers(min_value=0, max_value=d))
    monomials = enumerate_monomials(d, k)
    n_terms = draw(st.integers(min_value=1, max_value=min(6, len(monomials))))
    idx = draw(st.lists(st.integers(0, len(monomials) - 1), min_size=n_terms,
                        max_size=n_terms, unique=True))
    coefs = draw(st.lists(st.floats(-5, 5, allow_nan=False), min_size=n_terms, max_size=n_terms))
    return d, Polynomial({monomials[i]: c for i, c in zip(idx, coefs)}, degree_bound=k)


@settings(max_examples=60, deadline=None)
@given(polynomials())
def test_eval_bounded_by_coef_norm(poly_and_d):
    d, p = poly_and_d
    values = np.atleast_1d(p.evaluate(all_points(d)))
    assert np.all(np.abs(values) <= p.coef_norm() + 1e-9)


def test_coef_norm_bound_via_l2():
    # |c|_1 <= d^(k/2) * sqrt(E[p^2]) for degree k in [2, d]
    rng = np.random.default_rng(11)
    for _ in range(50):
        d = int(rng.integers(2, 10))
        k = int(rng.integers(2, d + 1))
        p = random_polynomial(rng, d, k, terms=8)
        assert p.coef_norm() <= d ** (k / 2.0) * np.sqrt(p.uniform_l2_squared()) + 1e-9


def test_empirical_hypercontractivity():
    # sqrt(E[p^2]) <= e^k * E|p| for p = q^2 with deg(q) <= k/2, by enumeration
    rng = np.random.default_rng(13)
    for _ in range(30):
        d = int(rng.integers(2, 9))
        half = int(rng.integers(0, d // 2 + 1))
        q = random_polynomial(rng, d, half, terms=5)
        p = q * q
        k = 2 * half
        values = np.atleast_1d(p.evaluate(all_points(d)))
        mean_abs = np.abs(values).mean()
        assert np.sqrt(p.uniform_l2_squared()) <= np.exp(k) * mean_abs + 1e-9


def test_all_points_roundtrip():
    pts = all_points(4)
    assert pts.shape == (16, 4)
    for r in range(16):
        assert point_index(pts[r]) == r
