"""Shared numeric core: norms, their duals, labeled datasets, and error types.

Everything downstream (exact distances, attacks, curve algebra, inter-class
scans) runs on the three classic vector norms and on finite weighted point
collections, so those live here together with the package-wide comparison
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Absolute tolerance for distance / breakpoint comparisons.
ATOL = 1e-9

# Outcome of one minimal-perturbation search; shared by attack records and
# curve construction.
STATUS_MISCLASSIFIED = "misclassified"
STATUS_FOUND = "found"
STATUS_CENSORED = "censored"


class InvalidInputError(ValueError):
    """Input violates an operation's contract (shape, range, norm kind...)."""


class DegenerateInputError(InvalidInputError):
    """Input is mathematically degenerate for the operation (e.g. a point
    sitting exactly on a decision boundary)."""


class ParseError(ValueError):
    """A byte-level container (IDX, CSV, model file) could not be decoded."""


class ValidationError(ValueError):
    """A decoded container carries inconsistent contents (e.g. layer shapes
    that do not compose)."""


class HorizonError(ValueError):
    """An evaluation threshold lies beyond a curve's meaningful range."""


class UnsupportedDimensionError(InvalidInputError):
    """Operation restricted to low dimensions was called on a larger input."""


class UnsupportedNormError(InvalidInputError):
    """No estimator is available for the requested norm."""


class NormKind(Enum):
    """The three perturbation norms the toolkit measures distances in."""

    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @classmethod
    def parse(cls, text: str) -> "NormKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise UnsupportedNormError(
                f"unknown norm {text!r}; expected one of l1, l2, linf"
            ) from None


def _as_finite_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError(f"expected a non-empty 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("vector contains non-finite entries")
    return arr


def norm(v, kind: NormKind) -> float:
    """Length of ``v`` under the given norm; >= 0, zero only for the zero vector."""
    arr = _as_finite_vector(v)
    if kind is NormKind.L1:
        return float(np.sum(np.abs(arr)))
    if kind is NormKind.L2:
        return float(np.sqrt(np.sum(arr * arr)))
    if kind is NormKind.LINF:
        return float(np.max(np.abs(arr)))
    raise UnsupportedNormError(f"unknown norm kind {kind!r}")


def dual_exponent(p: NormKind) -> float:
    """Exponent q with 1/p + 1/q = 1 (taking 1/inf = 0)."""
    if p is NormKind.L1:
        return math.inf
    if p is NormKind.L2:
        return 2.0
    if p is NormKind.LINF:
        return 1.0
    raise UnsupportedNormError(f"unknown norm kind {p!r}")


def dual_norm(p: NormKind) -> NormKind:
    """The norm kind dual to ``p``."""
    return {NormKind.L1: NormKind.LINF, NormKind.L2: NormKind.L2, NormKind.LINF: NormKind.L1}[p]


def dual_norm_value(w, p: NormKind) -> float:
    """Length of ``w`` in the norm dual to ``p``.

    This is the quantity that turns a decision-value margin into a
    point-to-hyperplane distance under ``p``.
    """
    return norm(w, dual_norm(p))


@dataclass(frozen=True)
class LabeledPoint:
    """A feature vector with its class label and probability mass."""

    x: np.ndarray
    y: int
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "x", _as_finite_vector(self.x))
        if self.y < 0:
            raise InvalidInputError(f"label must be >= 0, got {self.y}")
        if not self.weight > 0:
            raise InvalidInputError(f"weight must be > 0, got {self.weight}")


@dataclass(frozen=True)
class Dataset:
    """An ordered, weighted collection of labeled points of fixed dimension.

    Stored columnar (``xs`` is n x dim) so full-test-set scans stay cheap;
    ``points`` materializes the per-point view on demand. Weights are
    explicit so point-mass distributions and uniform empirical sets share
    one representation; they must sum to 1 (within ATOL) unless the dataset
    is empty.
    """

    xs: np.ndarray
    ys: np.ndarray
    weights: np.ndarray
    num_classes: int
    name: str = ""

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if xs.ndim != 2:
            raise InvalidInputError(f"xs must be 2-d (n, dim), got shape {xs.shape}")
        n = xs.shape[0]
        if ys.shape != (n,) or weights.shape != (n,):
            raise InvalidInputError("xs, ys and weights must agree on the number of points")
        if self.num_classes < 2:
            raise InvalidInputError(f"num_classes must be >= 2, got {self.num_classes}")
        if n > 0:
            if not np.all(np.isfinite(xs)):
                raise InvalidInputError("feature matrix contains non-finite entries")
            if ys.min() < 0 or ys.max() >= self.num_classes:
                raise InvalidInputError(
                    f"labels must lie in [0, {self.num_classes}), got range "
                    f"[{ys.min()}, {ys.max()}]"
                )
            if np.any(weights <= 0):
                raise InvalidInputError("all weights must be > 0")
            total = float(weights.sum())
            if abs(total - 1.0) > ATOL:
                raise InvalidInputError(f"weights must sum to 1 (got {total!r})")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_arrays(cls, xs, ys, weights=None, num_classes=None, name="") -> "Dataset":
        """Build a dataset, defaulting to uniform weights and inferred classes."""
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.int64)
        if weights is None:
            n = xs.shape[0]
            weights = np.full(n, 1.0 / n) if n else np.zeros(0)
        if num_classes is None:
            num_classes = int(ys.max()) + 1 if ys.size else 2
            num_classes = max(num_classes, 2)
        return cls(xs=xs, ys=ys, weights=np.asarray(weights, dtype=np.float64),
                   num_classes=num_classes, name=name)

    @classmethod
    def from_points(cls, points, num_classes=None, name="") -> "Dataset":
        points = list(points)
        if not points:
            raise InvalidInputError("from_points requires at least one point")
        xs = np.stack([p.x for p in points])
        ys = np.array([p.y for p in points], dtype=np.int64)
        weights = np.array([p.weight for p in points], dtype=np.float64)
        return cls.from_arrays(xs, ys, weights, num_classes=num_classes, name=name)

    def __len__(self) -> int:
        return self.xs.shape[0]

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    @property
    def points(self) -> list[LabeledPoint]:
        return [
            LabeledPoint(self.xs[i], int(self.ys[i]), float(self.weights[i]))
            for i in range(len(self))
        ]

    def labels_present(self) -> set[int]:
        return {int(y) for y in np.unique(self.ys)}
