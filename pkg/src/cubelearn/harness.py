"""End-to-end experiment pipeline: sample, contaminate, filter, regress, evaluate.

Per seed the harness draws a clean sample, lets the adversary swap a fraction,
filters the learner-facing view, runs the regression + threshold step on the
survivors, and scores the hypothesis exactly against the ground-truth concept.
Provenance tags never reach the learner; the harness uses them afterwards to
split removals into the clean/adversarial accounting that the error budget is
stated in.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .concepts import Circuit, named_circuit
from .contamination import (
    TAG_ADVERSARIAL,
    TAG_CLEAN,
    Adversary,
    contaminate,
    corruption_count,
    parse_adversary,
    sample_clean,
)
from .filtering import FilterParams, FilterReport, annotate_provenance, filter_outliers, removed_totals
from .hypercube import all_points, enumerate_monomials
from .regression import PTFHypothesis, learn_ptf, misclassification_count


def exact_error(hypothesis: PTFHypothesis, concept: Circuit, d: int) -> float:
    """Exact uniform disagreement by full enumeration (d <= 20)."""
    if d > 20:
        raise ValueError("exact enumeration needs d <= 20; use monte_carlo_error instead")
    points = all_points(d)
    return float((hypothesis.predict(points) != concept.evaluate(points)).mean())


def monte_carlo_error(hypothesis: PTFHypothesis, concept: Circuit, d: int,
                      samples: int, seed: int) -> tuple[float, tuple[float, float]]:
    """Unbiased error estimate with a 95% binomial confidence interval.

    Interior intervals use the Wilson score; at zero (or all) disagreements the
    exact one-sided bound 1 - 0.05^(1/n) is used, which is at most 3/n.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    points = rng.choice(np.array([-1, 1], dtype=np.int8), size=(samples, d))
    disagreements = int((hypothesis.predict(points) != concept.evaluate(points)).sum())
    estimate = disagreements / samples
    if disagreements == 0:
        interval = (0.0, 1.0 - 0.05 ** (1.0 / samples))
    elif disagreements == samples:
        interval = (0.05 ** (1.0 / samples), 1.0)
    else:
        z = 1.959963984540054
        center = (estimate + z * z / (2 * samples)) / (1 + z * z / samples)
        half = (z / (1 + z * z / samples)) * math.sqrt(
            estimate * (1 - estimate) / samples + z * z / (4 * samples * samples)
        )
        interval = (max(0.0, center - half), min(1.0, center + half))
    return estimate, interval


@dataclass
class AccountingReport:
    """Removal/survival split of the corrupted sample plus the error ledger.

    s1 = adversarial examples the filter removed, s2 = adversarial examples that
    survived, s3 = clean examples the filter removed; s1 + s2 equals the number
    of examples the adversary swapped in.
    """

    s1: int
    s2: int
    s3: int
    corrupted: int
    clean_error: float
    exact_uniform_error: float
    error_bound: float

    def to_json_obj(self) -> dict:
        return {
            "s1": self.s1,
            "s2": self.s2,
            "s3": self.s3,
            "corrupted": self.corrupted,
            "clean_error": self.clean_error,
            "exact_uniform_error": self.exact_uniform_error,
            "error_bound": self.error_bound,
        }


def mistake_budget(report: AccountingReport, eps: float, n: int) -> float:
    """Worst-case clean-sample error implied by the accounting: every removed or
    surviving-adversarial slot counts as a mistake, plus the regression slack."""
    return (report.corrupted + report.s3 + report.s2) / n + 2.0 * eps


@dataclass
class ExperimentConfig:
    """One experiment: a concept, an adversary, filter knobs, and seeds."""

    d: int
    degree: int
    n: int
    eta: float
    eps: float
    concept: str
    adversary: str
    seeds: list[int]
    delta: float = 0.05
    coef_bound: float | None = None
    tail_margin: float | None = None
    ref_size: int | None = None
    max_iters: int | None = None
    baseline: bool = True
    error_slack: float | None = None  # bound is 2*eta + error_slack (default 3*eps)
    assertions: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("need at least one seed")
        if not 0.0 <= self.eta < 1.0:
            raise ValueError("eta must be in [0, 1)")

    @property
    def resolved_slack(self) -> float:
        return self.error_slack if self.error_slack is not None else 3.0 * self.eps

    def filter_params(self) -> FilterParams:
        return FilterParams(
            eps=self.eps,
            degree=self.degree,
            coef_bound=self.coef_bound,
            tail_margin=self.tail_margin,
            ref_size=self.ref_size,
            max_iters=self.max_iters,
        )

    def to_json_obj(self) -> dict:
        return {
            "d": self.d, "degree": self.degree, "n": self.n, "eta": self.eta,
            "eps": self.eps, "concept": self.concept, "adversary": self.adversary,
            "seeds": list(self.seeds), "delta": self.delta,
            "coef_bound": self.coef_bound, "tail_margin": self.tail_margin,
            "ref_size": self.ref_size, "max_iters": self.max_iters,
            "baseline": self.baseline, "error_slack": self.error_slack,
            "assertions": dict(self.assertions),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ExperimentConfig":
        obj = dict(obj)
        seeds = obj.get("seeds")
        if isinstance(seeds, dict):
            obj["seeds"] = list(range(seeds["start"], seeds["start"] + seeds["count"]))
        return cls(**obj)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_json_obj(json.loads(text))


def derive_seed(seed: int, stream: int) -> int:
    """Independent child seed for a named stream of one experiment run."""
    return int(np.random.SeedSequence([seed, stream]).generate_state(1, np.uint64)[0])


def _flip_coordinate(points: np.ndarray, j: int) -> np.ndarray:
    out = points.copy()
    out[:, j] = -out[:, j]
    return out


def reference_family_mistakes(concept: Circuit, points: np.ndarray, labels: np.ndarray,
                              degree: int) -> int:
    """Fewest mistakes on the labeled set over an explicit comparison family.

    The family is the concept, its negation, its single-coordinate input flips,
    both constants, and every signed parity of size <= degree.  This is a
    brute-force lower bound on the best-in-class mistake count (the family is a
    subset of any class containing the concept).
    """
    labels = np.asarray(labels, dtype=np.int8)
    n = len(labels)
    best = int((concept.evaluate(points) != labels).sum())
    best = min(best, n - best)  # negation
    d = points.shape[1]
    for j in range(d):
        mistakes = int((concept.evaluate(_flip_coordinate(points, j)) != labels).sum())
        best = min(best, mistakes)
    best = min(best, int((labels == -1).sum()), int((labels == 1).sum()))  # constants
    for index in enumerate_monomials(d, min(degree, d)):
        if not index:
            continue
        chi = points[:, [i - 1 for i in index]].prod(axis=1)
        mistakes = int((chi != labels).sum())
        best = min(best, mistakes, n - mistakes)
    return best


@dataclass
class RunRecord:
    """Flat per-seed outcome; ``row()`` yields the CSV projection."""

    seed: int
    accounting: AccountingReport
    budget: float
    filter_iterations: int
    removed_total: int
    final_objective_mean: float
    terminated: bool
    fallback_rounds: int
    theta: float
    hypothesis_mistakes_filtered: int
    family_mistakes_filtered: int
    proof_chain_ok: bool
    baseline_error: float | None
    error: str | None = None

    def row(self) -> dict:
        acc = self.accounting
        return {
            "seed": self.seed,
            "s1": acc.s1, "s2": acc.s2, "s3": acc.s3, "corrupted": acc.corrupted,
            "clean_error": acc.clean_error,
            "exact_uniform_error": acc.exact_uniform_error,
            "error_bound": acc.error_bound,
            "budget": self.budget,
            "filter_iterations": self.filter_iterations,
            "removed_total": self.removed_total,
            "final_objective_mean": self.final_objective_mean,
            "terminated": self.terminated,
            "fallback_rounds": self.fallback_rounds,
            "theta": self.theta,
            "hypothesis_mistakes_filtered": self.hypothesis_mistakes_filtered,
            "family_mistakes_filtered": self.family_mistakes_filtered,
            "proof_chain_ok": self.proof_chain_ok,
            "baseline_error": self.baseline_error,
            "error": self.error or "",
        }


@dataclass
class PipelineOutcome:
    config: ExperimentConfig
    records: list[RunRecord]
    filter_reports: list[FilterReport | None]
    hypotheses: list[PTFHypothesis | None]
    summary: dict

    def failed_assertions(self) -> list[str]:
        failures = []
        checks = self.config.assertions
        s = self.summary
        if "min_frac_s3_le_s1" in checks and s["frac_s3_le_s1"] < checks["min_frac_s3_le_s1"]:
            failures.append(f"frac_s3_le_s1 {s['frac_s3_le_s1']:.3f} < {checks['min_frac_s3_le_s1']}")
        if "min_frac_error_within_bound" in checks and s["frac_error_within_bound"] < checks["min_frac_error_within_bound"]:
            failures.append(
                f"frac_error_within_bound {s['frac_error_within_bound']:.3f} < {checks['min_frac_error_within_bound']}")
        if "min_frac_baseline_worse" in checks:
            frac = s.get("frac_baseline_worse")
            if frac is None or frac < checks["min_frac_baseline_worse"]:
                failures.append(f"frac_baseline_worse {frac} < {checks['min_frac_baseline_worse']}")
        if checks.get("require_termination") and s["frac_terminated"] < 1.0:
            failures.append("not all filter runs terminated")
        if checks.get("require_no_run_errors") and s["run_errors"] > 0:
            failures.append(f"{s['run_errors']} seeds raised errors")
        return failures


def run_single(cfg: ExperimentConfig, seed: int) -> tuple[RunRecord, FilterReport, PTFHypothesis]:
    """One seed of the pipeline; deterministic given (config, seed)."""
    concept = named_circuit(cfg.concept, cfg.d)
    adversary = parse_adversary(cfg.adversary)
    clean = sample_clean(concept, cfg.n, derive_seed(seed, 0))
    contamination = contaminate(clean, cfg.eta, adversary, concept, derive_seed(seed, 1))
    sample = contamination.sample
    view = sample.learner_view()

    report = filter_outliers(view, cfg.filter_params(), derive_seed(seed, 2))
    annotate_provenance(report, sample.tags)
    s3, s1 = removed_totals(report)
    surviving_tags = sample.tags[report.surviving_indices]
    s2 = int((surviving_tags == TAG_ADVERSARIAL).sum())

    hypothesis = learn_ptf(report.filtered_points, report.filtered_labels, cfg.degree)
    err = exact_error(hypothesis, concept, cfg.d)
    clean_error = misclassification_count(hypothesis, clean.points, clean.labels) / cfg.n

    corrupted = corruption_count(cfg.eta, cfg.n)
    accounting = AccountingReport(
        s1=s1, s2=s2, s3=s3, corrupted=corrupted,
        clean_error=clean_error,
        exact_uniform_error=err,
        error_bound=2.0 * cfg.eta + cfg.resolved_slack,
    )

    mistakes_filtered = misclassification_count(hypothesis, report.filtered_points, report.filtered_labels)
    family_mistakes = reference_family_mistakes(concept, report.filtered_points,
                                                report.filtered_labels, cfg.degree)
    proof_chain_ok = mistakes_filtered <= family_mistakes + 2.0 * cfg.eps * cfg.n

    baseline_error = None
    if cfg.baseline:
        baseline = learn_ptf(view.points, view.labels, cfg.degree)
        baseline_error = exact_error(baseline, concept, cfg.d)

    record = RunRecord(
        seed=seed,
        accounting=accounting,
        budget=mistake_budget(accounting, cfg.eps, cfg.n),
        filter_iterations=len(report.iterations),
        removed_total=int(cfg.n - report.surviving_indices.size),
        final_objective_mean=report.iterations[-1].objective_mean,
        terminated=report.terminated,
        fallback_rounds=sum(1 for it in report.iterations if it.fallback),
        theta=hypothesis.theta,
        hypothesis_mistakes_filtered=mistakes_filtered,
        family_mistakes_filtered=family_mistakes,
        proof_chain_ok=proof_chain_ok,
        baseline_error=baseline_error,
    )
    return record, report, hypothesis


def run_pipeline(cfg: ExperimentConfig) -> PipelineOutcome:
    """All seeds plus the aggregate summary; per-seed failures are recorded and
    do not stop the remaining seeds."""
    records: list[RunRecord] = []
    reports: list[FilterReport | None] = []
    hypotheses: list[PTFHypothesis | None] = []
    for seed in cfg.seeds:
        try:
            record, report, hypothesis = run_single(cfg, seed)
        except Exception as exc:  # keep going; the summary reports the failure
            empty = AccountingReport(0, 0, 0, corruption_count(cfg.eta, cfg.n),
                                     math.nan, math.nan, 2.0 * cfg.eta + cfg.resolved_slack)
            records.append(RunRecord(
                seed=seed, accounting=empty, budget=math.nan, filter_iterations=0,
                removed_total=0, final_objective_mean=math.nan, terminated=False,
                fallback_rounds=0, theta=math.nan, hypothesis_mistakes_filtered=0,
                family_mistakes_filtered=0, proof_chain_ok=False, baseline_error=None,
                error=f"{type(exc).__name__}: {exc}",
            ))
            reports.append(None)
            hypotheses.append(None)
            continue
        records.append(record)
        reports.append(report)
        hypotheses.append(hypothesis)

    good = [r for r in records if not r.error]
    n_good = len(good)
    summary: dict = {
        "seeds": len(cfg.seeds),
        "run_errors": len(records) - n_good,
        "error_bound": 2.0 * cfg.eta + cfg.resolved_slack,
    }
    if n_good:
        summary.update({
            "frac_s3_le_s1": sum(r.accounting.s3 <= r.accounting.s1 for r in good) / n_good,
            "frac_error_within_bound": sum(
                r.accounting.exact_uniform_error <= r.accounting.error_bound for r in good) / n_good,
            "frac_terminated": sum(r.terminated for r in good) / n_good,
            "frac_filter_noop": sum(r.removed_total == 0 for r in good) / n_good,
            "frac_clean_error_within_budget": sum(
                r.accounting.clean_error <= r.budget + cfg.eps for r in good) / n_good,
            "frac_proof_chain_ok": sum(r.proof_chain_ok for r in good) / n_good,
            "mean_exact_error": float(np.mean([r.accounting.exact_uniform_error for r in good])),
            "mean_clean_error": float(np.mean([r.accounting.clean_error for r in good])),
            "mean_removed": float(np.mean([r.removed_total for r in good])),
        })
        if cfg.baseline:
            summary["frac_baseline_worse"] = sum(
                r.baseline_error > r.accounting.exact_uniform_error for r in good) / n_good
            summary["mean_baseline_error"] = float(np.mean([r.baseline_error for r in good]))
    return PipelineOutcome(cfg, records, reports, hypotheses, summary)
