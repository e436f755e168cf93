"""Clean sample generation and substitution-style sample corruption.

An adversary sees the full clean labeled sample and the target concept, picks
floor(eta*N) examples to delete, and substitutes the same number of arbitrary
labeled examples.  Provenance tags (clean vs adversarial) ride along on the
harness-side objects only; anything learner-facing goes through
``learner_view`` which strips them.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .concepts import Circuit
from .hypercube import validate_points

TAG_CLEAN = 0
TAG_ADVERSARIAL = 1


@dataclass
class SampleView:
    """Learner-facing view: points and labels only, no provenance."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.points = validate_points(self.points)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if self.labels.shape != (self.points.shape[0],):
            raise ValueError("labels must be one +-1 value per point")
        if not np.all(np.abs(self.labels) == 1):
            raise ValueError("labels must be +-1")

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


@dataclass
class LabeledSample:
    """Harness-side labeled multiset with provenance tags.

    Substitution keeps the size equal to the original clean sample size N, so
    ``len(sample)`` is N throughout.
    """

    points: np.ndarray
    labels: np.ndarray
    tags: np.ndarray

    def __post_init__(self):
        self.points = validate_points(self.points)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        self.tags = np.asarray(self.tags, dtype=np.int8)
        n = self.points.shape[0]
        if self.labels.shape != (n,) or self.tags.shape != (n,):
            raise ValueError("labels and tags must have one entry per point")

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def learner_view(self) -> SampleView:
        return SampleView(self.points.copy(), self.labels.copy())

    def adversarial_count(self) -> int:
        return int((self.tags == TAG_ADVERSARIAL).sum())

    def to_csv(self, include_tags: bool = False) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        d = self.dimension
        header = [f"x_{j}" for j in range(1, d + 1)] + ["label"]
        if include_tags:
            header.append("tag")
        writer.writerow(header)
        for i in range(len(self)):
            row = [int(v) for v in self.points[i]] + [int(self.labels[i])]
            if include_tags:
                row.append("adversarial" if self.tags[i] == TAG_ADVERSARIAL else "clean")
            writer.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "LabeledSample":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        has_tags = header and header[-1] == "tag"
        d = len(header) - 1 - (1 if has_tags else 0)
        points, labels, tags = [], [], []
        for row in reader:
            if not row:
                continue
            points.append([int(v) for v in row[:d]])
            labels.append(int(row[d]))
            tags.append(TAG_ADVERSARIAL if has_tags and row[d + 1] == "adversarial" else TAG_CLEAN)
        return cls(np.array(points, dtype=np.int8), np.array(labels, dtype=np.int8), np.array(tags, dtype=np.int8))


def sample_clean(concept: Circuit, n: int, seed: int) -> LabeledSample:
    """n i.i.d. uniform points labeled by the concept, all tagged clean."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    points = rng.choice(np.array([-1, 1], dtype=np.int8), size=(n, concept.dimension))
    labels = concept.evaluate(points)
    return LabeledSample(points, labels, np.full(n, TAG_CLEAN, dtype=np.int8))


def corruption_count(eta: float, n: int) -> int:
    """floor(eta*N), with a tiny guard against binary rounding of eta*N."""
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta must be in [0, 1), got {eta}")
    return int(math.floor(eta * n + 1e-9))


class Adversary:
    """Strategy hook: sees the clean sample and the concept, returns the swap.

    ``corrupt`` must return (remove_indices, new_points, new_labels) with
    exactly ``count`` entries each; which clean examples get removed is part of
    the strategy.
    """

    def corrupt(self, clean: LabeledSample, concept: Circuit, count: int,
                rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError


class LabelFlipAdversary(Adversary):
    """Re-inserts removed points with flipped labels.

    By default the flipped subset is random; given a polynomial, it flips the
    ``count`` points where |poly| is largest (the most regression-relevant ones).
    """

    def __init__(self, poly=None):
        self.poly = poly

    def corrupt(self, clean, concept, count, rng):
        if self.poly is not None:
            scores = np.abs(self.poly.evaluate(clean.points))
            remove = np.argsort(-scores, kind="stable")[:count]
        else:
            remove = rng.choice(len(clean), size=count, replace=False)
        remove = np.sort(remove)
        return remove, clean.points[remove].copy(), -clean.labels[remove]


class PointConcentrationAdversary(Adversary):
    """Replaces random clean examples with mislabeled copies of one target point.

    The default target is the all-ones point and the default label is the
    negation of the concept's value there.
    """

    def __init__(self, target=None, label: int | None = None):
        self.target = None if target is None else np.asarray(target, dtype=np.int8)
        self.label = label

    def corrupt(self, clean, concept, count, rng):
        d = clean.dimension
        target = np.ones(d, dtype=np.int8) if self.target is None else self.target
        if target.shape != (d,) or not np.all(np.abs(target) == 1):
            raise ValueError("target must be a +-1 point of the sample's dimension")
        label = -int(concept.evaluate(target)) if self.label is None else int(self.label)
        remove = np.sort(rng.choice(len(clean), size=count, replace=False))
        points = np.tile(target, (count, 1))
        labels = np.full(count, label, dtype=np.int8)
        return remove, points, labels


class RandomReplacementAdversary(Adversary):
    """Sanity baseline: fresh uniform points with uniform random labels."""

    def corrupt(self, clean, concept, count, rng):
        remove = np.sort(rng.choice(len(clean), size=count, replace=False))
        points = rng.choice(np.array([-1, 1], dtype=np.int8), size=(count, clean.dimension))
        labels = rng.choice(np.array([-1, 1], dtype=np.int8), size=count)
        return remove, points, labels


class CustomAdversary(Adversary):
    def __init__(self, fn):
        self.fn = fn

    def corrupt(self, clean, concept, count, rng):
        return self.fn(clean, concept, count, rng)


def parse_adversary(spec: str) -> Adversary:
    """Adversary spec strings: ``label_flip``, ``point_concentration[:1,1,-1,...]``,
    ``random_replacement``."""
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name == "label_flip":
        return LabelFlipAdversary()
    if name == "point_concentration":
        target = None
        if arg.strip():
            target = np.array([int(t) for t in arg.split(",")], dtype=np.int8)
        return PointConcentrationAdversary(target)
    if name == "random_replacement":
        return RandomReplacementAdversary()
    raise ValueError(f"unknown adversary {spec!r}")


@dataclass
class ContaminationResult:
    sample: LabeledSample            # the eta-contaminated sample (size N)
    removed_points: np.ndarray       # what the adversary deleted, for accounting
    removed_labels: np.ndarray
    removed_indices: np.ndarray      # positions in the clean sample


def contaminate(clean: LabeledSample, eta: float, adversary: Adversary,
                concept: Circuit, seed: int) -> ContaminationResult:
    """Apply a substitution adversary: remove floor(eta*N) examples, insert as many.

    Inserted examples take the slots of removed ones, so output size equals
    input size.  eta = 0 returns the input unchanged.
    """
    if clean.adversarial_count() != 0:
        raise ValueError("contaminate expects an all-clean sample")
    n = len(clean)
    count = corruption_count(eta, n)
    if count == 0:
        return ContaminationResult(
            LabeledSample(clean.points.copy(), clean.labels.copy(), clean.tags.copy()),
            np.empty((0, clean.dimension), dtype=np.int8),
            np.empty(0, dtype=np.int8),
            np.empty(0, dtype=np.int64),
        )
    rng = np.random.default_rng(seed)
    remove, new_points, new_labels = adversary.corrupt(clean, concept, count, rng)
    remove = np.asarray(remove, dtype=np.int64)
    if remove.shape != (count,) or len(np.unique(remove)) != count:
        raise ValueError("adversary must remove exactly count distinct examples")
    new_points = validate_points(new_points)
    new_labels = np.asarray(new_labels, dtype=np.int8)
    if new_points.shape != (count, clean.dimension) or new_labels.shape != (count,):
        raise ValueError("adversary must insert exactly count labeled examples")
    removed_points = clean.points[remove].copy()
    removed_labels = clean.labels[remove].copy()
    points = clean.points.copy()
    labels = clean.labels.copy()
    tags = clean.tags.copy()
    points[remove] = new_points
    labels[remove] = new_labels
    tags[remove] = TAG_ADVERSARIAL
    return ContaminationResult(LabeledSample(points, labels, tags),
                               removed_points, removed_labels, remove)
