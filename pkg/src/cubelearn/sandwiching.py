"""Exact best pointwise upper/lower degree-k polynomial envelopes of a Boolean function.

For an explicit truth table the tightest pair is computed by two independent
LPs over all 2^d points: minimize the mean of the upper envelope subject to
p_up >= f everywhere, and maximize the mean of the lower envelope subject to
p_down <= f.  Under the uniform distribution each mean is just the constant
coefficient, so the objectives are single coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .concepts import Circuit
from .hypercube import Polynomial, all_points, enumerate_monomials, monomial_matrix
from .lp import LESS_EQUAL, LinearProgram, LPSolverError, solve

POINTWISE_TOL = 1e-7  # allowed pointwise envelope violation in a returned pair
GAP_TOL = 1e-9        # slack used when comparing gaps against a target


@dataclass
class SandwichPair:
    """Degree-k envelopes p_down <= f <= p_up with gap = E[p_up - p_down]."""

    upper: Polynomial
    lower: Polynomial
    gap: float
    max_violation: float

    def to_json_obj(self) -> dict:
        return {
            "upper": self.upper.to_json_obj(),
            "lower": self.lower.to_json_obj(),
            "gap": self.gap,
            "max_violation": self.max_violation,
        }


def _check_table(table) -> tuple[np.ndarray, int]:
    values = np.asarray(table, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("truth table must be a nonempty 1-D array")
    d = int(round(math.log2(values.size)))
    if (1 << d) != values.size:
        raise ValueError(f"truth table length {values.size} is not a power of two")
    if d > 16:
        raise ValueError("sandwiching enumerates 2^d constraint rows; d <= 16 required")
    return values, d


def _envelope(values: np.ndarray, d: int, k: int, side: str,
              backend: str = "simplex") -> Polynomial:
    """One side of the pair.

    The LP is shifted to start from the always-feasible constant (+1 for the
    upper side, -1 for the lower), which turns every row into `<=` with a
    nonnegative right side and skips the solver's feasibility phase.
    """
    monomials = enumerate_monomials(d, k)
    m = len(monomials)
    design = monomial_matrix(all_points(d), monomials)
    objective = np.zeros(m)
    if side == "upper":
        # p = 1 + q, minimize E[p] = 1 + q_const, constraints q >= f - 1
        objective[0] = -1.0
        lhs = -design
        rhs = 1.0 - values
        shift = 1.0
    else:
        # p = -1 + q, maximize E[p] = -1 + q_const, constraints q <= f + 1
        objective[0] = 1.0
        lhs = design
        rhs = values + 1.0
        shift = -1.0
    lp = LinearProgram(objective, lhs, [LESS_EQUAL] * len(rhs), rhs)
    solution = solve(lp, backend=backend)
    if not solution.is_optimal:
        raise LPSolverError(f"sandwich LP ({side}) failed with status {solution.status}")
    coef = solution.values.copy()
    coef[0] += shift
    return Polynomial.from_vector(coef, monomials, k)


def best_sandwich(table, k: int, backend: str = "simplex") -> SandwichPair:
    """Tightest degree-k sandwich of a truth table (all 2^d points as constraints).

    Never infeasible: the constants +1 and -1 always qualify.  The two sides
    decouple into independent LPs.
    """
    values, d = _check_table(table)
    if not 0 <= k <= d:
        raise ValueError(f"degree must be in [0, {d}], got {k}")
    upper = _envelope(values, d, k, "upper", backend)
    lower = _envelope(values, d, k, "lower", backend)
    gap = upper.uniform_mean() - lower.uniform_mean()
    points = all_points(d)
    up_violation = float(np.max(values - upper.evaluate(points)))
    low_violation = float(np.max(lower.evaluate(points) - values))
    max_violation = max(up_violation, low_violation, 0.0)
    if max_violation > POINTWISE_TOL:
        raise LPSolverError(f"sandwich violates pointwise envelope by {max_violation}")
    if gap < -GAP_TOL:
        raise LPSolverError(f"negative sandwich gap {gap}")
    return SandwichPair(upper, lower, max(gap, 0.0), max_violation)


def sandwich_degree(table, eps: float, backend: str = "simplex") -> int:
    """Smallest degree whose best sandwich gap is at most eps (never above d)."""
    values, d = _check_table(table)
    if eps < 0:
        raise ValueError("eps must be >= 0")
    for k in range(d + 1):
        if best_sandwich(values, k, backend).gap <= eps + GAP_TOL:
            return k
    raise LPSolverError("exact-degree sandwich exceeded the gap tolerance")


def sandwich_curve(circuits: list[Circuit], eps_grid: list[float],
                   backend: str = "simplex") -> list[dict]:
    """Empirical degree-vs-parameters table for a family of circuits.

    One row per (circuit, eps): the circuit's size and depth, the target gap,
    and the smallest sufficient degree.
    """
    rows = []
    for circuit in circuits:
        table = circuit.truth_table()
        for eps in eps_grid:
            rows.append({
                "size": circuit.size,
                "depth": circuit.depth,
                "dimension": circuit.dimension,
                "eps": float(eps),
                "degree": sandwich_degree(table, eps, backend),
            })
    return rows
