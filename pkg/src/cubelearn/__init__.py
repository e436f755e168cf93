"""Robust learning of Boolean concepts on the hypercube from contaminated samples.

The pipeline: generate or load an eta-contaminated labeled sample, run the
LP-based outlier filter, fit a low-degree polynomial by least absolute
deviations, threshold it into a hypothesis, and score it against the ground
truth.  Sandwiching envelopes of explicit functions are computed exactly by LP
as the small-scale oracle behind the filter's guarantees.
"""

from .concepts import (
    Circuit,
    Gate,
    and_circuit,
    constant_circuit,
    dnf_circuit,
    junta_circuit,
    named_circuit,
    or_circuit,
    parity_circuit,
    tribes_circuit,
)
from .contamination import (
    Adversary,
    ContaminationResult,
    LabeledSample,
    LabelFlipAdversary,
    PointConcentrationAdversary,
    RandomReplacementAdversary,
    SampleView,
    contaminate,
    corruption_count,
    parse_adversary,
    sample_clean,
)
from .filtering import (
    FilterIteration,
    FilterParams,
    FilterReport,
    ResolvedFilterParams,
    annotate_provenance,
    build_filter_lp,
    draw_reference,
    filter_outliers,
    recheck_termination,
    removal_threshold,
    removed_totals,
    tail_decomposition_mean,
)
from .harness import (
    AccountingReport,
    ExperimentConfig,
    PipelineOutcome,
    RunRecord,
    exact_error,
    mistake_budget,
    monte_carlo_error,
    run_pipeline,
    run_single,
)
from .hypercube import (
    DimensionMismatchError,
    Polynomial,
    all_points,
    enumerate_monomials,
    eval_monomial,
    fourier_transform,
    monomial_matrix,
    point_index,
    validate_points,
)
from .lp import (
    LinearProgram,
    LPSolution,
    LPSolverError,
    STATUS_FAILED,
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    solve,
)
from .regression import (
    PTFHypothesis,
    choose_threshold,
    fit_l1,
    l1_loss,
    learn_ptf,
    misclassification_count,
)
from .sandwiching import SandwichPair, best_sandwich, sandwich_curve, sandwich_degree

__version__ = "0.1.0"
