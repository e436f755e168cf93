"""Points, monomials, and multilinear polynomials over the Boolean hypercube {-1,+1}^d.

Coordinates are 1-based in monomial index sets (a monomial is a sorted tuple of
distinct coordinates, the empty tuple being the constant term).  Under the
uniform distribution the monomials form an orthonormal basis, so expectations
and second moments of a polynomial are read off its coefficients exactly.
"""

from __future__ import annotations

import itertools
import json
import math
from typing import Iterable, Mapping, Sequence

import numpy as np

MonomialIndex = tuple[int, ...]


class DimensionMismatchError(ValueError):
    """A point's dimension is too small for a monomial or polynomial."""


def validate_points(points: np.ndarray) -> np.ndarray:
    """Coerce to a (n, d) int8 array and check every entry is exactly +-1."""
    arr = np.asarray(points)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise ValueError(f"points must be a (n, d) array with d > 0, got shape {arr.shape}")
    if not np.all(np.abs(arr) == 1):
        raise ValueError("hypercube points must have all coordinates in {-1, +1}")
    return arr.astype(np.int8, copy=False)


def all_points(d: int) -> np.ndarray:
    """All 2^d points of {-1,+1}^d in canonical row order.

    Row r has j-th coordinate (1-based) equal to +1 when bit j-1 of r is 0,
    and -1 when it is 1.  This order is frozen: truth tables are indexed by it.
    """
    if not 1 <= d <= 24:
        raise ValueError(f"d must be in [1, 24], got {d}")
    rows = np.arange(1 << d, dtype=np.int64)
    bits = (rows[:, None] >> np.arange(d, dtype=np.int64)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def point_index(x: Sequence[int]) -> int:
    """Inverse of the all_points row order."""
    idx = 0
    for j, v in enumerate(x):
        if v == -1:
            idx |= 1 << j
        elif v != 1:
            raise ValueError("coordinates must be +-1")
    return idx


def enumerate_monomials(d: int, k: int) -> list[MonomialIndex]:
    """All monomial index sets I with |I| <= k, by size then lexicographic.

    This order is frozen so that LP variable indices are reproducible.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not 0 <= k <= d:
        raise ValueError(f"k must satisfy 0 <= k <= d, got k={k}, d={d}")
    out: list[MonomialIndex] = []
    for size in range(k + 1):
        out.extend(itertools.combinations(range(1, d + 1), size))
    return out


def eval_monomial(x: Sequence[int] | np.ndarray, index: Iterable[int]) -> int:
    """Evaluate x^I = prod_{i in I} x_i at a single point (empty product is 1)."""
    x = np.asarray(x)
    prod = 1
    for i in index:
        if not 1 <= i <= x.shape[-1]:
            raise DimensionMismatchError(f"coordinate {i} out of range for dimension {x.shape[-1]}")
        prod *= int(x[i - 1])
    return prod


def monomial_matrix(points: np.ndarray, monomials: Sequence[MonomialIndex]) -> np.ndarray:
    """Matrix of monomial values: entry (r, j) = points[r]^monomials[j]."""
    pts = np.asarray(points)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-D array")
    n, d = pts.shape
    out = np.empty((n, len(monomials)), dtype=np.float64)
    for j, index in enumerate(monomials):
        if index:
            if index[-1] > d:
                raise DimensionMismatchError(f"coordinate {index[-1]} out of range for dimension {d}")
            cols = [i - 1 for i in index]
            out[:, j] = pts[:, cols].prod(axis=1)
        else:
            out[:, j] = 1.0
    return out


def _normalize_index(index: Iterable[int]) -> MonomialIndex:
    tup = tuple(int(i) for i in index)
    if any(i < 1 for i in tup):
        raise ValueError(f"monomial indices are 1-based positive ints, got {tup}")
    if len(set(tup)) != len(tup):
        raise ValueError(f"monomial indices must be distinct, got {tup}")
    return tuple(sorted(tup))


class Polynomial:
    """Sparse multilinear polynomial: a map from monomial index sets to real coefficients.

    Absent monomials have coefficient zero.  ``degree_bound`` is an upper bound
    on |I| over stored monomials; it is part of the value (it fixes which LP a
    polynomial is eligible for) and is validated at construction.
    """

    __slots__ = ("degree_bound", "coefficients")

    def __init__(
        self,
        coefficients: Mapping[MonomialIndex, float] | None = None,
        degree_bound: int | None = None,
    ):
        coeffs: dict[MonomialIndex, float] = {}
        max_size = 0
        if coefficients:
            for index, c in coefficients.items():
                tup = _normalize_index(index)
                c = float(c)
                if c != 0.0:
                    coeffs[tup] = coeffs.get(tup, 0.0) + c
                max_size = max(max_size, len(tup))
        if degree_bound is None:
            degree_bound = max_size
        if degree_bound < max_size:
            raise ValueError(f"degree_bound {degree_bound} below largest monomial size {max_size}")
        if degree_bound < 0:
            raise ValueError("degree_bound must be >= 0")
        self.degree_bound = int(degree_bound)
        self.coefficients = coeffs

    @classmethod
    def zero(cls, degree_bound: int = 0) -> "Polynomial":
        return cls({}, degree_bound)

    @classmethod
    def constant(cls, c: float, degree_bound: int = 0) -> "Polynomial":
        return cls({(): c}, degree_bound)

    @classmethod
    def from_vector(
        cls, values: Sequence[float], monomials: Sequence[MonomialIndex], degree_bound: int
    ) -> "Polynomial":
        """Build from a coefficient vector aligned with a monomial list."""
        if len(values) != len(monomials):
            raise ValueError("coefficient vector and monomial list lengths differ")
        return cls({m: v for m, v in zip(monomials, values)}, degree_bound)

    def min_dimension(self) -> int:
        return max((index[-1] for index in self.coefficients if index), default=1)

    def evaluate(self, points: np.ndarray | Sequence[int]) -> float | np.ndarray:
        """Evaluate at one point (shape (d,)) or many (shape (n, d))."""
        pts = np.asarray(points)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        if self.min_dimension() > pts.shape[1]:
            raise DimensionMismatchError(
                f"polynomial touches coordinate {self.min_dimension()}, points have dimension {pts.shape[1]}"
            )
        vals = np.zeros(pts.shape[0], dtype=np.float64)
        for index, c in self.coefficients.items():
            if index:
                cols = [i - 1 for i in index]
                vals += c * pts[:, cols].prod(axis=1)
            else:
                vals += c
        return float(vals[0]) if single else vals

    __call__ = evaluate

    def coef_norm(self) -> float:
        """l1 norm of the coefficient vector; pointwise |p(x)| never exceeds it."""
        return float(sum(abs(c) for c in self.coefficients.values()))

    def uniform_mean(self) -> float:
        """E[p(x)] under the uniform distribution: the constant coefficient."""
        return self.coefficients.get((), 0.0)

    def uniform_l2_squared(self) -> float:
        """E[p(x)^2] under the uniform distribution: sum of squared coefficients."""
        return float(sum(c * c for c in self.coefficients.values()))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        coeffs = dict(self.coefficients)
        for index, c in other.coefficients.items():
            coeffs[index] = coeffs.get(index, 0.0) + c
        return Polynomial(coeffs, max(self.degree_bound, other.degree_bound))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (other * -1.0)

    def __mul__(self, other: "Polynomial | float") -> "Polynomial":
        if isinstance(other, Polynomial):
            # x_i^2 = 1 on the cube, so x^I * x^J = x^(I symmetric-difference J).
            coeffs: dict[MonomialIndex, float] = {}
            for index_a, a in self.coefficients.items():
                set_a = set(index_a)
                for index_b, b in other.coefficients.items():
                    key = tuple(sorted(set_a.symmetric_difference(index_b)))
                    coeffs[key] = coeffs.get(key, 0.0) + a * b
            return Polynomial(coeffs, self.degree_bound + other.degree_bound)
        return Polynomial(
            {index: c * float(other) for index, c in self.coefficients.items()}, self.degree_bound
        )

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coefficients == other.coefficients and self.degree_bound == other.degree_bound

    def __repr__(self) -> str:
        terms = ", ".join(f"{index}: {c:g}" for index, c in sorted(self.coefficients.items(), key=_term_key))
        return f"Polynomial(degree_bound={self.degree_bound}, {{{terms}}})"

    def to_json_obj(self) -> dict:
        """Canonical form: nonzero (index list, coefficient) pairs in frozen monomial order."""
        terms = sorted(self.coefficients.items(), key=_term_key)
        return {
            "degree_bound": self.degree_bound,
            "terms": [[list(index), c] for index, c in terms],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Polynomial":
        return cls({tuple(index): c for index, c in obj["terms"]}, obj["degree_bound"])

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json(cls, text: str) -> "Polynomial":
        return cls.from_json_obj(json.loads(text))


def _term_key(item: tuple[MonomialIndex, float]):
    index = item[0]
    return (len(index), index)


def fourier_transform(table: Sequence[float] | np.ndarray) -> Polynomial:
    """The unique multilinear polynomial matching a truth table pointwise.

    ``table`` lists f(x) over all_points(d) row order and must have length 2^d
    with d <= 20.  Coefficients are exact for +-1 tables (sums of +-1 divided
    by a power of two), so parities come out as a single monomial.
    """
    values = np.asarray(table, dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("truth table must be one-dimensional")
    d = int(round(math.log2(len(values)))) if len(values) > 0 else -1
    if d < 1 or (1 << d) != len(values):
        raise ValueError(f"truth table length {len(values)} is not 2^d for some d >= 1")
    if d > 20:
        raise ValueError("fourier_transform enumerates 2^d points; d <= 20 required")
    pts = all_points(d)
    scale = 1.0 / len(values)
    coeffs: dict[MonomialIndex, float] = {}
    for index in enumerate_monomials(d, d):
        if index:
            cols = [i - 1 for i in index]
            chi = pts[:, cols].prod(axis=1, dtype=np.int64)
            c = float(values @ chi) * scale
        else:
            c = float(values.sum()) * scale
        if c != 0.0:
            coeffs[index] = c
    return Polynomial(coeffs, degree_bound=d)
