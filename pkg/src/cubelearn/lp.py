"""Deterministic dense linear-program solver (two-phase tableau simplex).

Solves max c.v subject to mixed <=/=/>= rows and optional per-variable bounds
(variables are free by default).  Pivoting is largest-reduced-cost with a
lowest-index tie break; Bland's rule engages after a degenerate stall to rule
out cycling, so every solve terminates.  Identical inputs produce identical
pivot sequences, hence identical vertices.

An adapter seam allows swapping in an external solver (``backend="scipy"``
uses scipy.optimize.linprog when scipy is installed); the embedded simplex is
the default and keeps the package dependency-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Solver tolerances (configuration constants).
FEASIBILITY_TOL = 1e-7   # max allowed constraint violation in an optimal solution
REDUCED_COST_TOL = 1e-9  # optimality threshold on reduced costs
PIVOT_TOL = 1e-9         # entries smaller than this never serve as pivots
STALL_LIMIT = 1000       # degenerate pivots tolerated before switching to Bland's rule

LESS_EQUAL = "<="
EQUAL = "="
GREATER_EQUAL = ">="
_RELATIONS = (LESS_EQUAL, EQUAL, GREATER_EQUAL)

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_FAILED = "failed"  # numerical failure / iteration limit; distinct from infeasible


class LPSolverError(RuntimeError):
    """Raised when a solve cannot produce a trustworthy status."""


Bound = tuple[float | None, float | None]


@dataclass
class LinearProgram:
    """max objective . v  subject to  lhs[i] . v  (rel[i])  rhs[i], with optional bounds.

    ``bounds`` is one (lower, upper) pair per variable, ``None`` meaning
    unbounded on that side; omitted bounds leave every variable free.
    """

    objective: np.ndarray
    lhs: np.ndarray
    relations: list[str]
    rhs: np.ndarray
    bounds: list[Bound] | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=np.float64)
        self.lhs = np.asarray(self.lhs, dtype=np.float64)
        if self.lhs.ndim != 2:
            self.lhs = self.lhs.reshape(-1, self.objective.size)
        self.rhs = np.asarray(self.rhs, dtype=np.float64)
        m, n = self.lhs.shape
        if self.objective.size != n or self.rhs.size != m or len(self.relations) != m:
            raise ValueError("objective/lhs/relations/rhs dimensions are inconsistent")
        for rel in self.relations:
            if rel not in _RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")
        if self.bounds is not None and len(self.bounds) != n:
            raise ValueError("bounds must list one (lower, upper) pair per variable")
        if not (np.all(np.isfinite(self.objective)) and np.all(np.isfinite(self.lhs)) and np.all(np.isfinite(self.rhs))):
            raise ValueError("LP data must be finite")

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_constraints(self) -> int:
        return self.rhs.size

    def constraint_violation(self, values: np.ndarray) -> float:
        """Largest violation of constraints and bounds at a candidate point."""
        values = np.asarray(values, dtype=np.float64)
        ax = self.lhs @ values
        worst = 0.0
        for i, rel in enumerate(self.relations):
            if rel == LESS_EQUAL:
                worst = max(worst, ax[i] - self.rhs[i])
            elif rel == GREATER_EQUAL:
                worst = max(worst, self.rhs[i] - ax[i])
            else:
                worst = max(worst, abs(ax[i] - self.rhs[i]))
        if self.bounds is not None:
            for j, (lo, hi) in enumerate(self.bounds):
                if lo is not None:
                    worst = max(worst, lo - values[j])
                if hi is not None:
                    worst = max(worst, values[j] - hi)
        return float(worst)

    def to_lp_format(self, name: str = "program") -> str:
        """Dump in CPLEX LP text format for cross-checking with external solvers."""
        def expr(coefs: np.ndarray) -> str:
            parts = []
            for j, c in enumerate(coefs):
                if c == 0.0:
                    continue
                sign = "+" if c >= 0 else "-"
                parts.append(f"{sign} {abs(c):.17g} v{j}")
            return " ".join(parts) if parts else "0 v0"

        lines = [f"\\ {name}", "Maximize", f" obj: {expr(self.objective)}", "Subject To"]
        for i, (row, rel, b) in enumerate(zip(self.lhs, self.relations, self.rhs)):
            op = {LESS_EQUAL: "<=", EQUAL: "=", GREATER_EQUAL: ">="}[rel]
            lines.append(f" c{i}: {expr(row)} {op} {b:.17g}")
        lines.append("Bounds")
        bounds = self.bounds or [(None, None)] * self.num_vars
        for j, (lo, hi) in enumerate(bounds):
            lo_s = "-inf" if lo is None else f"{lo:.17g}"
            hi_s = "+inf" if hi is None else f"{hi:.17g}"
            lines.append(f" {lo_s} <= v{j} <= {hi_s}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class LPSolution:
    status: str
    values: np.ndarray | None = None
    objective_value: float | None = None
    iterations: int = 0
    max_violation: float = 0.0

    @property
    def is_optimal(self) -> bool:
        return self.status == STATUS_OPTIMAL


# ---------------------------------------------------------------------------
# Standard-form conversion
#
# Variables become nonnegative via shifts/flips/splits; rows are normalized to
# nonnegative right-hand sides.  The mapping back to original variables is
# recorded as (kind, data) per variable.


@dataclass
class _StandardForm:
    matrix: np.ndarray           # m x n_std constraint rows
    rhs: np.ndarray
    objective: np.ndarray        # maximize, length n_std
    objective_shift: float
    var_map: list[tuple]         # per original variable: ("pos", j) etc.


def _to_standard_form(lp: LinearProgram) -> tuple[_StandardForm, list[str]]:
    m, n = lp.lhs.shape
    bounds = lp.bounds or [(None, None)] * n

    columns: list[np.ndarray] = []
    objective: list[float] = []
    var_map: list[tuple] = []
    shift = 0.0
    extra_rows: list[tuple[np.ndarray, str, float]] = []

    for j in range(n):
        lo, hi = bounds[j]
        col = lp.lhs[:, j]
        c = lp.objective[j]
        if lo is None and hi is None:
            var_map.append(("split", len(columns), len(columns) + 1))
            columns.append(col.copy())
            objective.append(c)
            columns.append(-col)
            objective.append(-c)
        elif hi is None:
            # v = lo + y, y >= 0
            var_map.append(("shift", len(columns), lo))
            shift += c * lo
            columns.append(col.copy())
            objective.append(c)
        elif lo is None:
            # v = hi - y, y >= 0
            var_map.append(("flip", len(columns), hi))
            shift += c * hi
            columns.append(-col)
            objective.append(-c)
        else:
            if hi < lo:
                raise ValueError(f"variable {j} has upper bound below lower bound")
            # v = lo + y, 0 <= y <= hi - lo (upper bound becomes a row)
            var_map.append(("shift", len(columns), lo))
            shift += c * lo
            unit = np.zeros(0)  # placeholder; filled after column count known
            extra_rows.append((unit, str(len(columns)), hi - lo))
            columns.append(col.copy())
            objective.append(c)

    matrix = np.column_stack(columns) if columns else np.zeros((m, 0))
    rhs = lp.rhs.copy()
    relations = list(lp.relations)

    # Shifted/flipped variables move constants into the right-hand side.
    consts = np.zeros(m)
    for j, (lo, hi) in enumerate(bounds):
        if lo is None and hi is None:
            continue
        consts += lp.lhs[:, j] * (hi if lo is None else lo)
    rhs = rhs - consts

    for unit, col_s, ub in extra_rows:
        row = np.zeros(matrix.shape[1])
        row[int(col_s)] = 1.0
        matrix = np.vstack([matrix, row])
        rhs = np.append(rhs, ub)
        relations.append(LESS_EQUAL)

    return _StandardForm(matrix, rhs, np.asarray(objective), shift, var_map), relations


def _recover_values(std: _StandardForm, y: np.ndarray, lp: LinearProgram) -> np.ndarray:
    out = np.empty(lp.num_vars)
    for j, spec in enumerate(std.var_map):
        kind = spec[0]
        if kind == "split":
            out[j] = y[spec[1]] - y[spec[2]]
        elif kind == "shift":
            out[j] = spec[2] + y[spec[1]]
        else:  # flip
            out[j] = spec[2] - y[spec[1]]
    return out


# ---------------------------------------------------------------------------
# Tableau simplex


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0


def _choose_entering(tableau: np.ndarray, allowed: int, bland: bool) -> int:
    """Steepest-edge pricing: most negative reduced cost per unit of edge length.

    Normalizing by the tableau column norm avoids the zigzagging that plain
    largest-coefficient pricing exhibits on regression-style programs.  Bland
    mode (anti-cycling fallback) picks the lowest-index improving column.
    """
    costs = tableau[-1, :allowed]
    if bland:
        idx = np.nonzero(costs < -REDUCED_COST_TOL)[0]
        return int(idx[0]) if idx.size else -1
    improving = costs < -REDUCED_COST_TOL
    if not improving.any():
        return -1
    cols = tableau[:-1, :allowed]
    norms = np.sqrt(1.0 + (cols * cols).sum(axis=0))
    score = np.where(improving, costs / norms, np.inf)
    return int(np.argmin(score))


def _choose_leaving(tableau: np.ndarray, col: int, basis: list[int], lex_cols: list[int], bland: bool) -> int:
    """Minimum-ratio row, ties broken lexicographically (or by Bland's rule).

    The lexicographic tie break compares tied rows over the columns that held
    the basis when this simplex phase started; those columns form an identity
    at that point, which makes every row lexicographically positive and rules
    out cycling regardless of the entering rule.
    """
    column = tableau[:-1, col]
    rhs = tableau[:-1, -1]
    candidates = np.nonzero(column > PIVOT_TOL)[0]
    if candidates.size == 0:
        return -1
    ratios = rhs[candidates] / column[candidates]
    best = ratios.min()
    tied = candidates[np.nonzero(ratios <= best + 1e-12 * (1.0 + abs(best)))[0]]
    if tied.size == 1:
        return int(tied[0])
    if bland:
        return int(min(tied, key=lambda r: basis[r]))
    for c in lex_cols:
        vals = tableau[tied, c] / column[tied]
        low = vals.min()
        tied = tied[np.nonzero(vals <= low + 1e-12 * (1.0 + abs(low)))[0]]
        if tied.size == 1:
            break
    return int(tied[0])


def _run_simplex(tableau: np.ndarray, basis: list[int], allowed: int, max_iters: int) -> tuple[str, int]:
    """Iterate to optimality over columns [0, allowed). Returns (status, pivots)."""
    pivots = 0
    bland = False
    stall = 0
    best_obj = tableau[-1, -1]
    lex_cols = list(basis)  # identity columns at phase start, ordered by row
    while pivots < max_iters:
        col = _choose_entering(tableau, allowed, bland)
        if col < 0:
            return STATUS_OPTIMAL, pivots
        row = _choose_leaving(tableau, col, basis, lex_cols, bland)
        if row < 0:
            return STATUS_UNBOUNDED, pivots
        _pivot(tableau, row, col)
        basis[row] = col
        pivots += 1
        obj = tableau[-1, -1]
        if obj > best_obj + 1e-12 * (1.0 + abs(best_obj)):
            best_obj = obj
            stall = 0
            bland = False
        else:
            stall += 1
            if stall >= STALL_LIMIT:
                bland = True
    return STATUS_FAILED, pivots


def _initial_basis(matrix: np.ndarray) -> tuple[list[int], list[int]]:
    """Crash a starting basis from exact unit columns; report rows still uncovered."""
    m, n = matrix.shape
    basis = [-1] * m
    nonzero_counts = (matrix != 0.0).sum(axis=0)
    for j in range(n):
        if nonzero_counts[j] != 1:
            continue
        i = int(np.nonzero(matrix[:, j])[0][0])
        if basis[i] == -1 and matrix[i, j] == 1.0:
            basis[i] = j
    uncovered = [i for i in range(m) if basis[i] == -1]
    return basis, uncovered


def _solve_simplex(lp: LinearProgram) -> LPSolution:
    std, relations = _to_standard_form(lp)
    matrix, rhs, objective = std.matrix, std.rhs, std.objective
    m = matrix.shape[0]

    # Normalize rhs >= 0, then append slack/surplus columns.
    rows = []
    for i in range(m):
        row, b, rel = matrix[i], rhs[i], relations[i]
        if b < 0:
            row = -row
            b = -b
            rel = {LESS_EQUAL: GREATER_EQUAL, GREATER_EQUAL: LESS_EQUAL, EQUAL: EQUAL}[rel]
        rows.append((row, rel, b))

    n_struct = matrix.shape[1]
    slack_cols = sum(1 for _, rel, _ in rows if rel != EQUAL)
    n_total = n_struct + slack_cols
    A = np.zeros((m, n_total))
    b_vec = np.empty(m)
    s = n_struct
    for i, (row, rel, b) in enumerate(rows):
        A[i, :n_struct] = row
        b_vec[i] = b
        if rel == LESS_EQUAL:
            A[i, s] = 1.0
            s += 1
        elif rel == GREATER_EQUAL:
            A[i, s] = -1.0
            s += 1

    basis, uncovered = _initial_basis(A)
    max_iters = max(2000, 50 * (m + n_total))
    total_pivots = 0

    if uncovered:
        # Phase 1: artificial columns on uncovered rows, minimize their sum.
        n_art = len(uncovered)
        A1 = np.hstack([A, np.zeros((m, n_art))])
        for t, i in enumerate(uncovered):
            A1[i, n_total + t] = 1.0
            basis[i] = n_total + t
        c1 = np.zeros(n_total + n_art)
        c1[n_total:] = -1.0
        tableau = np.zeros((m + 1, n_total + n_art + 1))
        tableau[:-1, :-1] = A1
        tableau[:-1, -1] = b_vec
        cb = c1[basis]
        # z-row convention: reduced costs on the left, current objective value on the right
        # (the pivot update preserves exactly this pair).
        tableau[-1, :-1] = cb @ A1 - c1
        tableau[-1, -1] = cb @ b_vec
        status, pivots = _run_simplex(tableau, basis, n_total + n_art, max_iters)
        total_pivots += pivots
        if status != STATUS_OPTIMAL:
            # Phase 1 is bounded above by zero, so anything but optimal is numerical failure.
            return LPSolution(STATUS_FAILED, iterations=total_pivots)
        phase1_value = tableau[-1, -1]
        if phase1_value < -1e-7:
            return LPSolution(STATUS_INFEASIBLE, iterations=total_pivots)
        # Drive leftover artificials out of the basis; drop redundant rows.
        keep_rows = list(range(m))
        for i in range(m):
            if basis[i] >= n_total:
                pivot_col = -1
                for j in range(n_total):
                    if abs(tableau[i, j]) > 1e-7:
                        pivot_col = j
                        break
                if pivot_col >= 0:
                    _pivot(tableau, i, pivot_col)
                    basis[i] = pivot_col
                else:
                    keep_rows.remove(i)
        rows_idx = keep_rows + [m]
        tableau = tableau[np.ix_(rows_idx, list(range(n_total)) + [n_total + n_art])]
        basis = [basis[i] for i in keep_rows]
        m = len(basis)
    else:
        tableau = np.zeros((m + 1, n_total + 1))
        tableau[:-1, :-1] = A
        tableau[:-1, -1] = b_vec

    # Phase 2: install the real objective and optimize.
    c2 = np.zeros(n_total)
    c2[:n_struct] = objective
    cb = c2[basis]
    tableau[-1, :-1] = cb @ tableau[:-1, :-1] - c2
    tableau[-1, -1] = cb @ tableau[:-1, -1]
    status, pivots = _run_simplex(tableau, basis, n_total, max_iters)
    total_pivots += pivots
    if status != STATUS_OPTIMAL:
        return LPSolution(status, iterations=total_pivots)

    y = np.zeros(n_total)
    for i, j in enumerate(basis):
        y[j] = tableau[i, -1]
    values = _recover_values(std, y[: std.matrix.shape[1]], lp)
    objective_value = float(lp.objective @ values)
    violation = lp.constraint_violation(values)
    if violation > FEASIBILITY_TOL:
        return LPSolution(STATUS_FAILED, values=values, objective_value=objective_value,
                          iterations=total_pivots, max_violation=violation)
    return LPSolution(STATUS_OPTIMAL, values=values, objective_value=objective_value,
                      iterations=total_pivots, max_violation=violation)


def _solve_scipy(lp: LinearProgram) -> LPSolution:
    from scipy.optimize import linprog  # optional dependency, imported lazily

    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for row, rel, b in zip(lp.lhs, lp.relations, lp.rhs):
        if rel == LESS_EQUAL:
            a_ub.append(row)
            b_ub.append(b)
        elif rel == GREATER_EQUAL:
            a_ub.append(-row)
            b_ub.append(-b)
        else:
            a_eq.append(row)
            b_eq.append(b)
    bounds = lp.bounds or [(None, None)] * lp.num_vars
    res = linprog(
        -lp.objective,
        A_ub=np.asarray(a_ub) if a_ub else None,
        b_ub=np.asarray(b_ub) if b_ub else None,
        A_eq=np.asarray(a_eq) if a_eq else None,
        b_eq=np.asarray(b_eq) if b_eq else None,
        bounds=bounds,
        method="highs",
    )
    if res.status == 2:
        return LPSolution(STATUS_INFEASIBLE)
    if res.status == 3:
        return LPSolution(STATUS_UNBOUNDED)
    if not res.success:
        return LPSolution(STATUS_FAILED)
    values = np.asarray(res.x)
    return LPSolution(STATUS_OPTIMAL, values=values, objective_value=float(lp.objective @ values),
                      max_violation=lp.constraint_violation(values))


_BACKENDS: dict[str, Callable[[LinearProgram], LPSolution]] = {
    "simplex": _solve_simplex,
    "scipy": _solve_scipy,
}


def solve(lp: LinearProgram, backend: str | Callable[[LinearProgram], LPSolution] = "simplex") -> LPSolution:
    """Solve an LP. ``backend`` is "simplex" (default), "scipy", or a callable."""
    if callable(backend):
        return backend(lp)
    try:
        fn = _BACKENDS[backend]
    except KeyError:
        raise LPSolverError(f"unknown LP backend {backend!r}") from None
    return fn(lp)
