"""Robustness curves as right-continuous step functions.

A curve R(eps) is the cumulative weight of points whose minimal adversarial
distance is <= eps, i.e. the CDF of the distance distribution. Mass that was
misclassified without any perturbation sits at eps = 0. Attack-estimated
curves carry a finite ``horizon``: beyond it the curve is only a lower bound,
because the search gave up on censored points.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

from .core import (
    ATOL,
    STATUS_CENSORED,
    STATUS_FOUND,
    STATUS_MISCLASSIFIED,
    HorizonError,
    InvalidInputError,
    NormKind,
    ParseError,
)

EXACT = "exact"
LOWER_BOUND = "lower_bound_beyond_horizon"

A_BECOMES_SMALLER = "a_becomes_smaller"
B_BECOMES_SMALLER = "b_becomes_smaller"
TOUCH = "touch"


@dataclass(frozen=True)
class CurveMeta:
    """Provenance of a curve: which norm, model, dataset, and estimator."""

    norm: Optional[NormKind] = None
    model: str = ""
    dataset: str = ""
    estimator: str = EXACT

    def __post_init__(self):
        if self.estimator not in (EXACT, "attack"):
            raise InvalidInputError(
                f"estimator must be 'exact' or 'attack', got {self.estimator!r}"
            )


@dataclass(frozen=True)
class CurveValue:
    value: float
    bound_quality: str  # EXACT or LOWER_BOUND


@dataclass(frozen=True)
class Crossing:
    epsilon: float
    direction: str  # A_BECOMES_SMALLER, B_BECOMES_SMALLER, or TOUCH


@dataclass(frozen=True)
class RobustnessCurve:
    breakpoints: np.ndarray
    values: np.ndarray
    horizon: float = math.inf
    meta: CurveMeta = field(default_factory=CurveMeta)

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        if bp.ndim != 1 or vals.ndim != 1 or bp.shape != vals.shape:
            raise InvalidInputError("breakpoints and values must be 1-d and equal length")
        if bp.size:
            if not np.all(np.isfinite(bp)) or bp[0] < 0.0:
                raise InvalidInputError("breakpoints must be finite and >= 0")
            if np.any(np.diff(bp) <= 0.0):
                raise InvalidInputError("breakpoints must be strictly increasing")
            if np.any(np.diff(vals) < -ATOL) or vals[0] < -ATOL or vals[-1] > 1.0 + ATOL:
                raise InvalidInputError("values must be nondecreasing within [0, 1]")
        h = float(self.horizon)
        if math.isnan(h) or h < 0.0:
            raise InvalidInputError(f"horizon must be >= 0 or +inf, got {h}")
        if self.meta.estimator == EXACT and not math.isinf(h):
            raise InvalidInputError("exact curves must have horizon = +inf")
        if bp.size and bp[-1] > h:
            raise InvalidInputError("breakpoints must not exceed the horizon")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "horizon", h)

    @property
    def id(self) -> str:
        return self.meta.model or self.meta.dataset or "curve"

    def __call__(self, eps: float) -> float:
        """Raw step evaluation, no horizon bookkeeping."""
        if eps < 0.0:
            raise InvalidInputError(f"epsilon must be >= 0, got {eps}")
        k = int(np.searchsorted(self.breakpoints, eps, side="right"))
        return 0.0 if k == 0 else float(self.values[k - 1])


def build_curve(
    records: Iterable,
    weights,
    horizon: float = math.inf,
    meta: CurveMeta = None,
) -> RobustnessCurve:
    """Aggregate per-point search records into a curve.

    Each record needs ``status`` (misclassified / found / censored) and
    ``distance``. Censored mass is simply excluded, which is what makes the
    result a lower bound past the horizon.
    """
    records = list(records)
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != len(records):
        raise InvalidInputError(
            f"got {w.size} weights for {len(records)} records"
        )
    if len(records) and (np.any(w <= 0.0) or abs(w.sum() - 1.0) > ATOL):
        raise InvalidInputError("weights must be positive and sum to 1")
    if meta is None:
        meta = CurveMeta()

    dists, mass = [], []
    censored = 0.0
    for rec, wi in zip(records, w):
        if rec.status == STATUS_MISCLASSIFIED:
            dists.append(0.0)
        elif rec.status == STATUS_FOUND:
            d = float(rec.distance)
            if not math.isfinite(d) or d < 0.0:
                raise InvalidInputError(f"found record has invalid distance {rec.distance}")
            dists.append(d)
        elif rec.status == STATUS_CENSORED:
            censored += wi
            continue
        else:
            raise InvalidInputError(f"unknown record status {rec.status!r}")
        mass.append(wi)

    if not dists:
        return RobustnessCurve(np.array([]), np.array([]), horizon=horizon, meta=meta)
    dists = np.asarray(dists)
    mass = np.asarray(mass)
    order = np.argsort(dists, kind="stable")
    bp, inverse = np.unique(dists[order], return_inverse=True)
    vals = np.zeros(bp.shape[0])
    np.add.at(vals, inverse, mass[order])
    vals = np.cumsum(vals)
    if bp[-1] > horizon:
        raise InvalidInputError(
            f"record distance {bp[-1]} exceeds horizon {horizon}"
        )
    curve = RobustnessCurve(bp, vals, horizon=horizon, meta=meta)
    assert curve.values[-1] + censored <= 1.0 + ATOL
    return curve


def evaluate(curve: RobustnessCurve, eps: float) -> CurveValue:
    """R(eps) plus a flag marking whether the value is exact or censored-low."""
    value = curve(eps)
    quality = LOWER_BOUND if eps > curve.horizon else EXACT
    return CurveValue(value, quality)


def rank_at(curves, eps: float):
    """Ascending (id, value) ranking at one eps; ties break by id.

    Every curve must cover eps: ranking against a censored lower bound would
    silently compare incommensurate numbers.
    """
    for c in curves:
        if eps > c.horizon:
            raise HorizonError(
                f"epsilon {eps} is beyond the horizon {c.horizon} of curve {c.id!r}"
            )
    pairs = [(c.id, evaluate(c, eps).value) for c in curves]
    return sorted(pairs, key=lambda p: (p[1], p[0]))


def _joint_breakpoints(a: RobustnessCurve, b: RobustnessCurve, lim: float) -> np.ndarray:
    pts = np.union1d(a.breakpoints, b.breakpoints)
    return pts[pts <= lim]


def intersections(a: RobustnessCurve, b: RobustnessCurve):
    """Sign-change walk of a-b over the joint breakpoints.

    Steps only change value at breakpoints, so every crossing is localized at
    a joint breakpoint. A zero plateau between opposite signs counts as one
    crossing at the plateau start; a plateau that rejoins the same sign is a
    touch; plateaus at the very start or end (e.g. two curves both saturated
    at mass 1) are not events.
    """
    if a.meta.norm is not None and b.meta.norm is not None and a.meta.norm != b.meta.norm:
        warnings.warn(
            f"comparing curves with different norms ({a.meta.norm.value} vs "
            f"{b.meta.norm.value})",
            stacklevel=2,
        )
    lim = min(a.horizon, b.horizon)
    out = []
    prev_sign = 0
    zero_start = None
    for eps in _joint_breakpoints(a, b, lim):
        diff = a(eps) - b(eps)
        sign = (diff > 0.0) - (diff < 0.0)
        if sign == 0:
            if zero_start is None:
                zero_start = eps
            continue
        if prev_sign == 0:
            prev_sign = sign  # leading zeros (both curves still at 0): no event
            zero_start = None
            continue
        if sign != prev_sign:
            where = eps if zero_start is None else zero_start
            out.append(Crossing(float(where), A_BECOMES_SMALLER if sign < 0 else B_BECOMES_SMALLER))
        elif zero_start is not None:
            out.append(Crossing(float(zero_start), TOUCH))
        prev_sign = sign
        zero_start = None
    return out


# -- CSV serialization -------------------------------------------------------
#
# Layout: '#'-prefixed metadata comments, a fixed header, then one row per
# breakpoint. Floats use their shortest round-tripping decimal form (at most
# 17 significant digits), so import is bit-exact.

_HEADER = "epsilon,robust_error"


def export_curve(curve: RobustnessCurve) -> bytes:
    lines = [
        "# robustness curve",
        f"# norm: {curve.meta.norm.value if curve.meta.norm else 'unknown'}",
        f"# model: {curve.meta.model}",
        f"# dataset: {curve.meta.dataset}",
        f"# estimator: {curve.meta.estimator}",
        f"# horizon: {repr(curve.horizon)}",
        _HEADER,
    ]
    for e, v in zip(curve.breakpoints, curve.values):
        lines.append(f"{float(e)!r},{float(v)!r}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def import_curve(data) -> RobustnessCurve:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"curve CSV is not UTF-8: {exc}") from exc
    fields = {}
    eps, vals = [], []
    saw_header = False
    for ln, raw in enumerate(data.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, _, val = body.partition(":")
                fields[key.strip()] = val.strip()
            continue
        if not saw_header:
            if line != _HEADER:
                raise ParseError(f"line {ln}: expected header {_HEADER!r}, got {line!r}")
            saw_header = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"line {ln}: expected 'epsilon,robust_error', got {line!r}")
        try:
            eps.append(float(parts[0]))
            vals.append(float(parts[1]))
        except ValueError as exc:
            raise ParseError(f"line {ln}: non-numeric row {line!r}") from exc
    if not saw_header:
        raise ParseError("curve CSV has no header row")
    try:
        horizon = float(fields.get("horizon", "inf"))
    except ValueError as exc:
        raise ParseError(f"bad horizon comment {fields.get('horizon')!r}") from exc
    norm_text = fields.get("norm", "unknown")
    meta = CurveMeta(
        norm=None if norm_text == "unknown" else NormKind.parse(norm_text),
        model=fields.get("model", ""),
        dataset=fields.get("dataset", ""),
        estimator=fields.get("estimator", EXACT),
    )
    return RobustnessCurve(np.array(eps), np.array(vals), horizon=horizon, meta=meta)


def with_meta(curve: RobustnessCurve, **changes) -> RobustnessCurve:
    """Convenience: replace metadata fields without touching the data."""
    return replace(curve, meta=replace(curve.meta, **changes))
