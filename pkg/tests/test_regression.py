import itertools

import numpy as np
import pytest

from cubelearn.concepts import and_circuit, named_circuit
from cubelearn.contamination import sample_clean
from cubelearn.hypercube import (
    Polynomial,
    all_points,
    enumerate_monomials,
    fourier_transform,
    monomial_matrix,
)
from cubelearn.regression import (
    PTFHypothesis,
    choose_threshold,
    fit_l1,
    l1_loss,
    learn_ptf,
    misclassification_count,
)


def brute_force_l1_optimum(points, labels, degree):
    """Enumerate interpolating basic solutions; the L1 optimum sits on one."""
    design = monomial_matrix(points, enumerate_monomials(points.shape[1], degree))
    n, m = design.shape
    best = float(np.abs(labels).sum())  # the zero polynomial
    for rows in itertools.combinations(range(n), m):
        sub = design[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-9:
            continue
        coef = np.linalg.solve(sub, labels[list(rows)])
        best = min(best, float(np.abs(labels - design @ coef).sum()))
    return best


class TestFitL1:
    def test_parity_table_is_exact(self):
        # labels given by the product x1*x2 itself: recovered exactly
        pts = all_points(2)
        labels = pts[:, 0] * pts[:, 1]
        poly = fit_l1(pts, labels, 2)
        assert poly.coefficients == pytest.approx({(1, 2): 1.0})
        assert l1_loss(poly, pts, labels) == pytest.approx(0.0, abs=1e-9)

    def test_xor_circuit_table_is_exact(self):
        c = named_circuit("parity:1,2", 2)
        pts = all_points(2)
        labels = c.evaluate(pts)
        poly = fit_l1(pts, labels, 2)
        assert poly.coefficients == pytest.approx({(1, 2): -1.0})

    def test_constant_labels_degree_zero(self):
        pts = all_points(3)
        labels = np.ones(8, dtype=np.int8)
        poly = fit_l1(pts, labels, 0)
        assert poly.coefficients == pytest.approx({(): 1.0})
        assert l1_loss(poly, pts, labels) == pytest.approx(0.0, abs=1e-9)

    def test_and_like_matches_basic_solution_enumeration(self):
        pts = all_points(2)
        labels = np.array([1, 1, 1, -1], dtype=np.int8)
        oracle = brute_force_l1_optimum(pts, labels.astype(float), 1)
        assert oracle == pytest.approx(2.0)  # frozen after first computation
        poly = fit_l1(pts, labels, 1)
        assert l1_loss(poly, pts, labels) == pytest.approx(oracle, abs=1e-6 * len(pts))

    def test_duplicates_weighted_like_repeats(self):
        rng = np.random.default_rng(1)
        pts = rng.choice(np.array([-1, 1], dtype=np.int8), size=(30, 3))
        labels = rng.choice(np.array([-1, 1], dtype=np.int8), size=30)
        doubled = np.repeat(pts, 2, axis=0)
        doubled_labels = np.repeat(labels, 2)
        a = fit_l1(pts, labels, 1)
        b = fit_l1(doubled, doubled_labels, 1)
        assert l1_loss(b, pts, labels) == pytest.approx(l1_loss(a, pts, labels), abs=1e-6)

    def test_loss_not_above_random_polynomials(self):
        rng = np.random.default_rng(2)
        d, k = 5, 2
        pts = all_points(d)
        labels = named_circuit("tribes:w=2,m=2", d).evaluate(pts)
        fitted = fit_l1(pts, labels, k)
        fitted_loss = l1_loss(fitted, pts, labels)
        monomials = enumerate_monomials(d, k)
        for _ in range(100):
            coefs = rng.normal(size=len(monomials))
            rival = Polynomial({m: c for m, c in zip(monomials, coefs)}, k)
            assert fitted_loss <= l1_loss(rival, pts, labels) + 1e-6

    def test_loss_not_above_fourier_truncation(self):
        d, k = 6, 2
        pts = all_points(d)
        labels = named_circuit("tribes:w=2,m=3", d).evaluate(pts)
        transform = fourier_transform(labels.astype(float))
        truncated = Polynomial(
            {index: c for index, c in transform.coefficients.items() if len(index) <= k}, k)
        fitted = fit_l1(pts, labels, k)
        assert l1_loss(fitted, pts, labels) <= l1_loss(truncated, pts, labels) + 1e-6

    def test_rejects_bad_labels(self):
        pts = all_points(2)
        with pytest.raises(ValueError):
            fit_l1(pts, np.array([1, 2, 1, -1]), 1)
        with pytest.raises(ValueError):
            fit_l1(pts, np.ones(4, dtype=np.int8), 3)


class TestChooseThreshold:
    def test_perfect_separation(self):
        pts = all_points(3)
        labels = np.where(pts[:, 0] == 1, 1, -1).astype(np.int8)
        poly = Polynomial({(1,): 1.0})
        h = choose_threshold(poly, pts, labels)
        assert misclassification_count(h, pts, labels) == 0
        assert -1.0 < h.theta < 1.0

    def test_constant_positive_labels(self):
        pts = all_points(2)
        labels = np.ones(4, dtype=np.int8)
        poly = Polynomial({(1,): 0.5, (): 0.25})
        h = choose_threshold(poly, pts, labels)
        assert misclassification_count(h, pts, labels) == 0
        assert h.theta < np.min(np.atleast_1d(poly.evaluate(pts)))

    def test_dictator_on_a_line(self):
        pts = all_points(1)
        labels = pts[:, 0].copy()
        h = choose_threshold(Polynomial({(1,): 1.0}), pts, labels)
        assert -1.0 < h.theta < 1.0
        assert misclassification_count(h, pts, labels) == 0

    def test_never_worse_than_zero_threshold(self):
        rng = np.random.default_rng(3)
        pts = all_points(5)
        for _ in range(20):
            labels = rng.choice(np.array([-1, 1], dtype=np.int8), size=len(pts))
            monomials = enumerate_monomials(5, 2)
            poly = Polynomial({m: rng.normal() for m in monomials}, 2)
            swept = choose_threshold(poly, pts, labels)
            zero = PTFHypothesis(poly, 0.0)
            assert misclassification_count(swept, pts, labels) <= misclassification_count(zero, pts, labels)

    def test_tie_breaks_toward_smaller_theta(self):
        pts = all_points(1)
        labels = np.array([1, 1], dtype=np.int8)
        # any theta below min achieves 0 errors; sweep must pick the smallest candidate
        h = choose_threshold(Polynomial({(1,): 1.0}), pts, labels)
        assert h.theta == pytest.approx(-2.0)


class TestPredict:
    def test_sign_convention(self):
        h = PTFHypothesis(Polynomial({(1,): 1.0}), 0.0)
        assert h.predict(np.array([1])) == 1
        assert h.predict(np.array([-1])) == -1
        # exact tie goes positive
        tie = PTFHypothesis(Polynomial({(1,): 1.0}), 1.0)
        assert tie.predict(np.array([1])) == 1
        above = PTFHypothesis(Polynomial({(1,): 1.0}), 2.0)
        assert above.predict(np.array([1])) == -1

    def test_json_roundtrip(self):
        h = PTFHypothesis(Polynomial({(1, 2): -1.0, (): 0.25}), -0.125)
        back = PTFHypothesis.from_json(h.to_json())
        assert back.theta == h.theta
        assert back.polynomial == h.polynomial


class TestAgnosticBound:
    def test_error_within_twice_class_approximation(self):
        # Corrupted labels from a small explicit class: the learned PTF's error
        # must be within opt + 2 * (best degree-k L1 approximation of the class).
        d, k = 4, 1
        pts = all_points(d)
        concepts = [named_circuit(s, d) for s in
                    ("and:1,2", "or:1,2", "parity:1", "parity:2", "const:+1")]
        rng = np.random.default_rng(4)
        # worst-case class approximation error under the empirical (full cube) distribution
        class_eps = 0.0
        for c in concepts:
            table = c.evaluate(pts)
            approx = fit_l1(pts, table, k)
            class_eps = max(class_eps, l1_loss(approx, pts, table) / len(pts))
        for trial in range(5):
            truth = concepts[trial % len(concepts)]
            labels = truth.evaluate(pts).copy()
            flips = rng.choice(len(pts), size=2, replace=False)
            labels[flips] = -labels[flips]
            h = learn_ptf(pts, labels, k)
            err = misclassification_count(h, pts, labels) / len(pts)
            opt = min(
                (c.evaluate(pts) != labels).sum() for c in concepts) / len(pts)
            assert err <= opt + 2.0 * class_eps + 1e-9


def test_learn_ptf_pipeline_exactness():
    c = named_circuit("parity:2,5", 6)
    sample = sample_clean(c, 800, seed=9)
    h = learn_ptf(sample.points, sample.labels, 2)
    assert misclassification_count(h, sample.points, sample.labels) == 0
