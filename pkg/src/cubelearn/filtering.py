"""Iterative LP-driven outlier removal for contaminated hypercube samples.

Each round solves one LP: find the nonnegative degree-k polynomial with
bounded coefficient norm and small reference-sample mean that has the largest
sum over the surviving sample.  If the normalized optimum exceeds eps, the
points where that polynomial is above an adaptively chosen tail threshold get
dropped; otherwise the surviving set is certified and returned.  Labels are
carried through untouched and never read.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .contamination import SampleView, TAG_ADVERSARIAL, TAG_CLEAN
from .hypercube import Polynomial, enumerate_monomials, monomial_matrix, validate_points
from .lp import LESS_EQUAL, LinearProgram, LPSolverError, solve

# Points whose witness value is within this of the threshold are retained
# (conservative removal under solver roundoff).
THRESHOLD_SLACK = 1e-9


@dataclass
class FilterParams:
    """Knobs of the removal loop; ``None`` fields resolve to spec defaults.

    coef_bound defaults to 3^k * d^(k/2) and tail_margin to eps / (2 * coef_bound);
    reference size and iteration cap default to the input size N.
    """

    eps: float
    degree: int
    coef_bound: float | None = None
    tail_margin: float | None = None
    ref_size: int | None = None
    max_iters: int | None = None

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must be in (0, 1), got {self.eps}")
        if self.degree < 0:
            raise ValueError(f"degree must be >= 0, got {self.degree}")

    def resolve(self, d: int, n: int) -> "ResolvedFilterParams":
        coef_bound = self.coef_bound
        if coef_bound is None:
            coef_bound = (3.0 ** self.degree) * d ** (self.degree / 2.0)
        tail_margin = self.tail_margin
        if tail_margin is None:
            tail_margin = self.eps / (2.0 * coef_bound)
        if coef_bound <= 0 or tail_margin <= 0:
            raise ValueError("coef_bound and tail_margin must be positive")
        return ResolvedFilterParams(
            eps=self.eps,
            degree=self.degree,
            coef_bound=coef_bound,
            tail_margin=tail_margin,
            n=n,
            ref_size=self.ref_size if self.ref_size is not None else n,
            max_iters=self.max_iters if self.max_iters is not None else n,
        )


@dataclass
class ResolvedFilterParams:
    eps: float
    degree: int
    coef_bound: float
    tail_margin: float
    n: int
    ref_size: int
    max_iters: int

    def to_json_obj(self) -> dict:
        return {
            "eps": self.eps,
            "degree": self.degree,
            "coef_bound": self.coef_bound,
            "tail_margin": self.tail_margin,
            "n": self.n,
            "ref_size": self.ref_size,
            "max_iters": self.max_iters,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ResolvedFilterParams":
        return cls(**obj)


def draw_reference(d: int, n: int, seed: int) -> np.ndarray:
    """n fresh i.i.d. uniform points; the learner can draw these itself because
    the covariate distribution is known."""
    if n < 1:
        raise ValueError(f"reference size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    return rng.choice(np.array([-1, 1], dtype=np.int8), size=(n, d))


class _FilterProgram:
    """The per-run LP with its constraint block built once.

    Variables are the polynomial coefficients c_I (free) followed by
    auxiliaries u_I >= 0 with |c_I| <= u_I; constraints are the coefficient-norm
    cap sum(u) <= B, pointwise nonnegativity on every distinct observed point
    (duplicates collapsed -- nonnegativity is pointwise), and the reference-mean
    cap mean_{S_ref} p <= eps/4.  Only the objective changes across iterations.
    """

    def __init__(self, input_points: np.ndarray, ref_points: np.ndarray, params: ResolvedFilterParams):
        d = input_points.shape[1]
        self.params = params
        self.monomials = enumerate_monomials(d, params.degree)
        m = len(self.monomials)
        self.input_values = monomial_matrix(input_points, self.monomials)
        self.ref_values = monomial_matrix(ref_points, self.monomials)
        distinct = np.unique(np.vstack([ref_points, input_points]), axis=0)
        distinct_values = monomial_matrix(distinct, self.monomials)

        n_rows = 2 * m + 1 + distinct.shape[0] + 1
        lhs = np.zeros((n_rows, 2 * m))
        rhs = np.zeros(n_rows)
        r = 0
        for j in range(m):
            lhs[r, j] = 1.0
            lhs[r, m + j] = -1.0
            r += 1
            lhs[r, j] = -1.0
            lhs[r, m + j] = -1.0
            r += 1
        lhs[r, m:] = 1.0
        rhs[r] = params.coef_bound
        r += 1
        lhs[r:r + distinct.shape[0], :m] = -distinct_values
        r += distinct.shape[0]
        lhs[r, :m] = self.ref_values.sum(axis=0) / ref_points.shape[0]
        rhs[r] = params.eps / 4.0
        self._lhs = lhs
        self._rhs = rhs
        self._bounds = [(None, None)] * m + [(0.0, None)] * m

    def lp_for_mask(self, surviving: np.ndarray) -> LinearProgram:
        m = len(self.monomials)
        objective = np.zeros(2 * m)
        objective[:m] = self.input_values[surviving].sum(axis=0)
        return LinearProgram(objective, self._lhs, [LESS_EQUAL] * self._lhs.shape[0], self._rhs,
                             bounds=[tuple(b) for b in self._bounds])

    def witness_from(self, values: np.ndarray) -> Polynomial:
        m = len(self.monomials)
        return Polynomial.from_vector(values[:m], self.monomials, self.params.degree)


def build_filter_lp(current_points: np.ndarray, ref_points: np.ndarray, input_points: np.ndarray,
                    n: int, params: FilterParams | ResolvedFilterParams) -> tuple[LinearProgram, list]:
    """Assemble one round's LP explicitly; returns (program, monomial order).

    ``current_points`` is the surviving multiset the objective sums over;
    nonnegativity rows cover every distinct point of ref_points + input_points.
    """
    current_points = validate_points(current_points)
    input_points = validate_points(input_points)
    ref_points = validate_points(ref_points)
    if isinstance(params, FilterParams):
        params = params.resolve(input_points.shape[1], n)
    program = _FilterProgram(input_points, ref_points, params)
    current_values = monomial_matrix(current_points, program.monomials)
    m = len(program.monomials)
    objective = np.zeros(2 * m)
    objective[:m] = current_values.sum(axis=0)
    lp = LinearProgram(objective, program._lhs, [LESS_EQUAL] * program._lhs.shape[0],
                       program._rhs, bounds=[tuple(b) for b in program._bounds])
    return lp, program.monomials


def removal_threshold(current_values: np.ndarray, ref_values: np.ndarray, n: int,
                      margin: float) -> float | None:
    """Smallest tau >= 0 where the surviving tail outweighs twice the reference tail.

    Candidates are 0 and the observed witness values: the two tail fractions
    are right-continuous step functions that only change there, so scanning
    candidates is exhaustive.  Returns None when no candidate qualifies.
    """
    current_sorted = np.sort(np.asarray(current_values, dtype=np.float64))
    ref_sorted = np.sort(np.asarray(ref_values, dtype=np.float64))
    candidates = np.unique(np.concatenate([[0.0], current_sorted, ref_sorted]))
    candidates = candidates[candidates >= 0.0]
    n_cur = current_sorted.size
    n_ref = ref_sorted.size
    tail_cur = n_cur - np.searchsorted(current_sorted, candidates, side="right")
    tail_ref = n_ref - np.searchsorted(ref_sorted, candidates, side="right")
    ok = tail_cur / n >= 2.0 * tail_ref / n_ref + margin
    hits = np.nonzero(ok)[0]
    if hits.size == 0:
        return None
    return float(candidates[hits[0]])


def tail_decomposition_mean(values: np.ndarray) -> float:
    """Mean of an empirical distribution recovered from its tail function.

    Sums gap * Pr[X > t] over consecutive observed thresholds starting at 0
    (or at the minimum, if roundoff pushed any value below 0), which is the
    discrete form of integrating the upper tail of a bounded nonnegative
    variable.
    """
    vals = np.sort(np.asarray(values, dtype=np.float64))
    if vals.size == 0:
        return 0.0
    start = min(0.0, float(vals[0]))
    distinct = np.unique(vals)
    total = start
    prev = start
    n = vals.size
    for u in distinct:
        if u > prev:
            tail = n - np.searchsorted(vals, prev, side="right")
            total += (u - prev) * (tail / n)
            prev = u
    return float(total)


@dataclass
class FilterIteration:
    """Trace of one round: the witness polynomial, its normalized LP value,
    the tail threshold used (None on the terminating round), and what got cut."""

    witness: Polynomial
    objective_mean: float
    threshold: float | None
    removed_indices: np.ndarray
    size_before: int
    size_after: int
    terminal: bool = False
    fallback: bool = False
    removed_clean: int | None = None
    removed_adversarial: int | None = None

    @property
    def removed_count(self) -> int:
        return int(self.removed_indices.size)

    def to_json_obj(self) -> dict:
        return {
            "witness": self.witness.to_json_obj(),
            "objective_mean": self.objective_mean,
            "threshold": self.threshold,
            "removed_indices": [int(i) for i in self.removed_indices],
            "size_before": self.size_before,
            "size_after": self.size_after,
            "terminal": self.terminal,
            "fallback": self.fallback,
            "removed_clean": self.removed_clean,
            "removed_adversarial": self.removed_adversarial,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FilterIteration":
        return cls(
            witness=Polynomial.from_json_obj(obj["witness"]),
            objective_mean=obj["objective_mean"],
            threshold=obj["threshold"],
            removed_indices=np.array(obj["removed_indices"], dtype=np.int64),
            size_before=obj["size_before"],
            size_after=obj["size_after"],
            terminal=obj["terminal"],
            fallback=obj["fallback"],
            removed_clean=obj.get("removed_clean"),
            removed_adversarial=obj.get("removed_adversarial"),
        )


@dataclass
class FilterReport:
    """Everything a run produced: surviving set, reference set, and full trace."""

    input_points: np.ndarray
    input_labels: np.ndarray
    reference_points: np.ndarray
    surviving_indices: np.ndarray
    iterations: list[FilterIteration]
    params: ResolvedFilterParams
    seed: int
    terminated: bool

    @property
    def filtered_points(self) -> np.ndarray:
        return self.input_points[self.surviving_indices]

    @property
    def filtered_labels(self) -> np.ndarray:
        return self.input_labels[self.surviving_indices]

    def filtered_view(self) -> SampleView:
        return SampleView(self.filtered_points.copy(), self.filtered_labels.copy())

    @property
    def removed_indices(self) -> np.ndarray:
        mask = np.ones(len(self.input_points), dtype=bool)
        mask[self.surviving_indices] = False
        return np.nonzero(mask)[0]

    def to_json_obj(self) -> dict:
        return {
            "params": self.params.to_json_obj(),
            "seed": self.seed,
            "terminated": self.terminated,
            "input_points": self.input_points.tolist(),
            "input_labels": self.input_labels.tolist(),
            "reference_points": self.reference_points.tolist(),
            "surviving_indices": [int(i) for i in self.surviving_indices],
            "iterations": [it.to_json_obj() for it in self.iterations],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_obj(), indent=indent, sort_keys=True)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FilterReport":
        return cls(
            input_points=np.array(obj["input_points"], dtype=np.int8),
            input_labels=np.array(obj["input_labels"], dtype=np.int8),
            reference_points=np.array(obj["reference_points"], dtype=np.int8),
            surviving_indices=np.array(obj["surviving_indices"], dtype=np.int64),
            iterations=[FilterIteration.from_json_obj(o) for o in obj["iterations"]],
            params=ResolvedFilterParams.from_json_obj(obj["params"]),
            seed=obj["seed"],
            terminated=obj["terminated"],
        )

    @classmethod
    def from_json(cls, text: str) -> "FilterReport":
        return cls.from_json_obj(json.loads(text))


def filter_outliers(sample: SampleView, params: FilterParams, seed: int,
                    reference_points: np.ndarray | None = None,
                    backend: str = "simplex") -> FilterReport:
    """Run the removal loop on a labeled sample (labels carried, never read).

    The reference sample is drawn once from ``seed`` (or passed in explicitly)
    and reused across all rounds.  Terminates when the normalized LP value
    drops to eps, removing at least one point per earlier round, so it finishes
    within N rounds.
    """
    n = len(sample)
    if n < 1:
        raise ValueError("sample must be nonempty")
    d = sample.dimension
    resolved = params.resolve(d, n)
    if reference_points is None:
        reference_points = draw_reference(d, resolved.ref_size, seed)
    else:
        reference_points = validate_points(reference_points)
    program = _FilterProgram(sample.points, reference_points, resolved)

    surviving = np.ones(n, dtype=bool)
    iterations: list[FilterIteration] = []
    terminated = False

    for _ in range(resolved.max_iters + 1):
        size_before = int(surviving.sum())
        lp = program.lp_for_mask(surviving)
        solution = solve(lp, backend=backend)
        if not solution.is_optimal:
            raise LPSolverError(f"filter LP solve failed with status {solution.status}")
        witness = program.witness_from(solution.values)
        objective_mean = solution.objective_value / n

        if objective_mean <= resolved.eps:
            iterations.append(FilterIteration(
                witness=witness,
                objective_mean=objective_mean,
                threshold=None,
                removed_indices=np.empty(0, dtype=np.int64),
                size_before=size_before,
                size_after=size_before,
                terminal=True,
            ))
            terminated = True
            break

        coef = solution.values[:len(program.monomials)]
        current_values = program.input_values[surviving] @ coef
        ref_values = program.ref_values @ coef
        threshold = removal_threshold(current_values, ref_values, n, resolved.tail_margin)
        fallback = threshold is None
        surviving_positions = np.nonzero(surviving)[0]
        if fallback:
            # No qualifying threshold (possible at small N): drop the single
            # largest witness value so the loop still makes progress.
            removed_local = np.array([int(np.argmax(current_values))])
        else:
            removed_local = np.nonzero(current_values > threshold + THRESHOLD_SLACK)[0]
            if removed_local.size == 0:
                removed_local = np.nonzero(current_values > threshold)[0]
            if removed_local.size == 0:
                removed_local = np.array([int(np.argmax(current_values))])
                fallback = True
        removed = surviving_positions[removed_local]
        surviving[removed] = False
        iterations.append(FilterIteration(
            witness=witness,
            objective_mean=objective_mean,
            threshold=threshold,
            removed_indices=np.sort(removed),
            size_before=size_before,
            size_after=int(surviving.sum()),
            fallback=fallback,
        ))

    return FilterReport(
        input_points=sample.points.copy(),
        input_labels=sample.labels.copy(),
        reference_points=np.asarray(reference_points, dtype=np.int8),
        surviving_indices=np.nonzero(surviving)[0],
        iterations=iterations,
        params=resolved,
        seed=seed,
        terminated=terminated,
    )


def recheck_termination(report: FilterReport, backend: str = "simplex") -> float:
    """Re-solve the round LP on the surviving set; the certified value is <= eps."""
    program = _FilterProgram(report.input_points, report.reference_points, report.params)
    surviving = np.zeros(len(report.input_points), dtype=bool)
    surviving[report.surviving_indices] = True
    solution = solve(program.lp_for_mask(surviving), backend=backend)
    if not solution.is_optimal:
        raise LPSolverError(f"certificate re-solve failed with status {solution.status}")
    return solution.objective_value / report.params.n


def annotate_provenance(report: FilterReport, tags: np.ndarray) -> FilterReport:
    """Fill per-iteration clean/adversarial removal counts from harness-side tags."""
    tags = np.asarray(tags)
    if tags.shape != (len(report.input_points),):
        raise ValueError("tags must align with the filter's input")
    for it in report.iterations:
        removed_tags = tags[it.removed_indices]
        it.removed_clean = int((removed_tags == TAG_CLEAN).sum())
        it.removed_adversarial = int((removed_tags == TAG_ADVERSARIAL).sum())
    return report


def removed_totals(report: FilterReport) -> tuple[int, int]:
    """(clean, adversarial) removal totals; requires annotate_provenance first."""
    clean = sum(it.removed_clean or 0 for it in report.iterations)
    adversarial = sum(it.removed_adversarial or 0 for it in report.iterations)
    return clean, adversarial
