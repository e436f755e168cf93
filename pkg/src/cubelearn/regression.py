"""Degree-k least-absolute-deviation polynomial regression and PTF thresholding.

The fit minimizes sum |y - p(x)| over degree-k polynomials by LP, with one
residual variable per example (duplicate (point, label) rows are merged into
weighted rows, which leaves the objective identical).  The hypothesis is
sign(p(x) - theta) with theta chosen by an exhaustive threshold sweep.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .hypercube import Polynomial, enumerate_monomials, monomial_matrix, validate_points
from .lp import EQUAL, LinearProgram, LPSolverError, solve


def fit_l1(points: np.ndarray, labels: np.ndarray, degree: int,
           backend: str = "simplex") -> Polynomial:
    """LP-optimal L1 fit of the labels by a degree-bounded polynomial.

    Equality form: p(x_j) + e+_j - e-_j = y_j with e's >= 0, minimizing the
    weighted residual sum.  Two numerical safeguards, both within the 1e-6*|S|
    loss tolerance: the targets are shifted by the least-squares fit (an exact
    change of variables that removes the pivot-tie degeneracy of +-1 targets),
    and the shifted targets get a deterministic stagger of relative size 1e-9
    so that ratio ties cannot stall the simplex when residuals repeat.
    """
    points = validate_points(points)
    labels = np.asarray(labels, dtype=np.int8)
    n, d = points.shape
    if n < 1:
        raise ValueError("need at least one example")
    if labels.shape != (n,) or not np.all(np.abs(labels) == 1):
        raise ValueError("labels must be one +-1 value per point")
    if degree < 0 or degree > d:
        raise ValueError(f"degree must be in [0, {d}], got {degree}")

    rows = np.column_stack([points, labels])
    unique, counts = np.unique(rows, axis=0, return_counts=True)
    upoints = unique[:, :d]
    ulabels = unique[:, d].astype(np.float64)
    weights = counts.astype(np.float64)

    monomials = enumerate_monomials(d, degree)
    m = len(monomials)
    design = monomial_matrix(upoints, monomials)

    sqrt_w = np.sqrt(weights)
    base_coef, *_ = np.linalg.lstsq(design * sqrt_w[:, None], ulabels * sqrt_w, rcond=None)
    targets = ulabels - design @ base_coef
    scale = float(np.max(np.abs(targets)))
    if scale <= 1e-12:
        # The least-squares fit already interpolates (exactly representable
        # labels); it is the unique zero-loss L1 optimum.
        return Polynomial.from_vector(base_coef, monomials, degree)

    n_u = len(unique)
    stagger = 1e-8 * scale * np.random.default_rng(1729).random(n_u)
    n_vars = m + 2 * n_u
    objective = np.zeros(n_vars)
    objective[m:] = np.concatenate([-weights, -weights])
    lhs = np.zeros((n_u, n_vars))
    lhs[:, :m] = design
    idx = np.arange(n_u)
    lhs[idx, m + idx] = 1.0
    lhs[idx, m + n_u + idx] = -1.0
    bounds = [(None, None)] * m + [(0.0, None)] * (2 * n_u)
    lp = LinearProgram(objective, lhs, [EQUAL] * n_u, targets + stagger, bounds=bounds)
    solution = solve(lp, backend=backend)
    if not solution.is_optimal:
        raise LPSolverError(f"regression LP failed with status {solution.status}")
    coef = base_coef + solution.values[:m]
    return Polynomial.from_vector(coef, monomials, degree)


def l1_loss(poly: Polynomial, points: np.ndarray, labels: np.ndarray) -> float:
    values = poly.evaluate(validate_points(points))
    return float(np.abs(np.asarray(labels, dtype=np.float64) - values).sum())


@dataclass
class PTFHypothesis:
    """Polynomial threshold function: predicts sign(p(x) - theta), sign(0) = +1."""

    polynomial: Polynomial
    theta: float

    def predict(self, points: np.ndarray) -> np.ndarray | int:
        values = self.polynomial.evaluate(points)
        if np.isscalar(values) or getattr(values, "ndim", 0) == 0:
            return 1 if values - self.theta >= 0 else -1
        return np.where(values - self.theta >= 0, 1, -1).astype(np.int8)

    __call__ = predict

    def to_json_obj(self) -> dict:
        return {"polynomial": self.polynomial.to_json_obj(), "theta": self.theta}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PTFHypothesis":
        return cls(Polynomial.from_json_obj(obj["polynomial"]), float(obj["theta"]))

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json(cls, text: str) -> "PTFHypothesis":
        return cls.from_json_obj(json.loads(text))


def choose_threshold(poly: Polynomial, points: np.ndarray, labels: np.ndarray) -> PTFHypothesis:
    """Best empirical threshold for sign(p(x) - theta).

    Candidates are midpoints between consecutive distinct values of p on the
    sample plus one sentinel below the minimum and one above the maximum; ties
    in error count break toward the smaller theta.  Never worse empirically
    than theta = 0.
    """
    points = validate_points(points)
    labels = np.asarray(labels, dtype=np.int8)
    values = np.asarray(poly.evaluate(points), dtype=np.float64)
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    sorted_labels = labels[order]
    distinct, starts = np.unique(sorted_vals, return_index=True)
    boundaries = np.append(starts, len(sorted_vals))

    candidates = np.empty(len(distinct) + 1)
    candidates[0] = distinct[0] - 1.0
    candidates[1:-1] = (distinct[:-1] + distinct[1:]) / 2.0
    candidates[-1] = distinct[-1] + 1.0

    # theta below everything predicts +1 everywhere; raising theta past a value
    # group flips that group to -1.
    errors = int((sorted_labels == -1).sum())
    best_errors = errors
    best_theta = float(candidates[0])
    for g in range(len(distinct)):
        lo, hi = boundaries[g], boundaries[g + 1]
        group = sorted_labels[lo:hi]
        errors += int((group == 1).sum()) - int((group == -1).sum())
        if errors < best_errors:
            best_errors = errors
            best_theta = float(candidates[g + 1])
    return PTFHypothesis(poly, best_theta)


def misclassification_count(hypothesis: PTFHypothesis, points: np.ndarray, labels: np.ndarray) -> int:
    preds = hypothesis.predict(validate_points(points))
    return int((preds != np.asarray(labels, dtype=np.int8)).sum())


def learn_ptf(points: np.ndarray, labels: np.ndarray, degree: int,
              backend: str = "simplex") -> PTFHypothesis:
    """fit_l1 followed by the threshold sweep; the end-to-end regression step."""
    poly = fit_l1(points, labels, degree, backend=backend)
    return choose_threshold(poly, points, labels)
