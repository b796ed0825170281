import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robustcurves.core import (
    STATUS_CENSORED,
    STATUS_FOUND,
    STATUS_MISCLASSIFIED,
    HorizonError,
    InvalidInputError,
    NormKind,
    ParseError,
)
from robustcurves.curves import (
    A_BECOMES_SMALLER,
    B_BECOMES_SMALLER,
    EXACT,
    LOWER_BOUND,
    TOUCH,
    CurveMeta,
    RobustnessCurve,
    build_curve,
    evaluate,
    export_curve,
    import_curve,
    intersections,
    rank_at,
)


@dataclass
class Rec:
    status: str
    distance: float = math.nan


def curve(bp, vals, horizon=math.inf, **meta):
    return RobustnessCurve(np.array(bp, float), np.array(vals, float), horizon, CurveMeta(**meta))


FOUR = [Rec(STATUS_MISCLASSIFIED), Rec(STATUS_FOUND, 0.2), Rec(STATUS_FOUND, 0.2), Rec(STATUS_FOUND, 0.5)]


def test_build_curve_quarters():
    c = build_curve(FOUR, [0.25] * 4)
    np.testing.assert_array_equal(c.breakpoints, [0.0, 0.2, 0.5])
    np.testing.assert_array_equal(c.values, [0.25, 0.75, 1.0])
    assert c(0.0) == 0.25 and c(0.2) == 0.75 and c(0.5) == 1.0


def test_build_curve_all_censored():
    c = build_curve(
        [Rec(STATUS_CENSORED)] * 3, [1 / 3] * 3, horizon=0.5, meta=CurveMeta(estimator="attack")
    )
    assert c.breakpoints.size == 0
    assert c(0.0) == 0.0 and c(0.5) == 0.0


def test_build_curve_weight_mismatch():
    with pytest.raises(InvalidInputError):
        build_curve(FOUR, [0.5, 0.5])
    with pytest.raises(InvalidInputError):
        build_curve(FOUR, [0.25, 0.25, 0.25, 0.35])


def test_build_curve_censored_mass_excluded():
    recs = [Rec(STATUS_FOUND, 0.1), Rec(STATUS_CENSORED), Rec(STATUS_FOUND, 0.3)]
    c = build_curve(recs, [1 / 3] * 3, horizon=1.0, meta=CurveMeta(estimator="attack"))
    assert c.values[-1] == pytest.approx(2 / 3)


def test_evaluate_between_breakpoints():
    c = build_curve(FOUR, [0.25] * 4)
    r = evaluate(c, 0.3)
    assert r.value == 0.75 and r.bound_quality == EXACT
    assert evaluate(c, 0.0).value == 0.25
    with pytest.raises(InvalidInputError):
        evaluate(c, -0.1)


def test_evaluate_beyond_horizon_is_lower_bound():
    c = curve([0.1], [0.4], horizon=0.5, estimator="attack")
    r = evaluate(c, 0.6)
    assert r.value == 0.4 and r.bound_quality == LOWER_BOUND
    assert evaluate(c, 0.5).bound_quality == EXACT


def test_perfectly_accurate_curve_is_zero_at_zero():
    c = curve([0.2, 0.4], [0.5, 1.0])
    assert evaluate(c, 0.0).value == 0.0


def test_exact_curves_require_infinite_horizon():
    with pytest.raises(InvalidInputError):
        curve([0.1], [1.0], horizon=0.5)  # default estimator is exact


def test_rank_at_flips_between_epsilons():
    a = curve([0.05, 0.45], [0.1, 0.9], model="A")
    b = curve([0.08, 0.42], [0.2, 0.6], model="B")
    c = curve([0.09, 0.39], [0.3, 0.4], model="C")
    assert [cid for cid, _ in rank_at([a, b, c], 0.1)] == ["A", "B", "C"]
    assert [cid for cid, _ in rank_at([a, b, c], 0.4)] == ["C", "B", "A"]


def test_rank_at_published_pattern():
    # ascending robust error at the smallest budget: AT, MMR+AT, KW, MMR-UNIV, ST
    vals = {"ST": 0.60, "AT": 0.38, "KW": 0.43, "MMR+AT": 0.42, "MMR-UNIV": 0.54}
    cs = [curve([0.001], [v], model=k) for k, v in vals.items()]
    assert [cid for cid, _ in rank_at(cs, 0.002)] == ["AT", "MMR+AT", "KW", "MMR-UNIV", "ST"]


def test_rank_at_singleton_and_ties():
    a = curve([0.1], [0.5], model="only")
    assert rank_at([a], 0.2) == [("only", 0.5)]
    b = curve([0.15], [0.5], model="b")
    c = curve([0.12], [0.5], model="a")
    assert [cid for cid, _ in rank_at([b, c], 0.2)] == ["a", "b"]


def test_rank_at_names_offending_curve():
    ok = curve([0.1], [0.5], model="fine")
    short = curve([0.1], [0.5], horizon=0.3, model="short", estimator="attack")
    with pytest.raises(HorizonError, match="short"):
        rank_at([ok, short], 0.4)


def test_intersections_single_crossing():
    a = curve([0.1], [0.5])
    b = curve([0.2], [1.0])
    got = intersections(a, b)
    assert len(got) == 1
    assert got[0].epsilon == 0.2 and got[0].direction == A_BECOMES_SMALLER


def test_intersections_identical_empty():
    a = curve([0.1, 0.3], [0.4, 1.0])
    b = curve([0.1, 0.3], [0.4, 1.0])
    assert intersections(a, b) == []


def test_intersections_touch_plateau():
    a = curve([0.1, 0.6], [0.5, 1.0])
    b = curve([0.2, 0.3, 0.8], [0.3, 0.5, 1.0])
    got = intersections(a, b)
    assert [(g.epsilon, g.direction) for g in got] == [(0.3, TOUCH)]


def test_intersections_crossing_through_plateau():
    a = curve([0.1, 0.5], [0.5, 0.6])
    b = curve([0.3, 0.4], [0.5, 1.0])
    got = intersections(a, b)
    assert [(g.epsilon, g.direction) for g in got] == [(0.3, A_BECOMES_SMALLER)]


def test_intersections_trailing_saturation_not_an_event():
    # both curves reach mass 1; the shared tail is not a touch
    a = curve([0.1], [1.0])
    b = curve([0.2], [1.0])
    got = intersections(a, b)
    assert [(g.epsilon, g.direction) for g in got] == []


def test_intersections_warns_on_norm_mismatch():
    a = curve([0.1], [1.0], norm=NormKind.L2)
    b = curve([0.2], [1.0], norm=NormKind.LINF)
    with pytest.warns(UserWarning, match="different norms"):
        intersections(a, b)


@st.composite
def step_curve(draw):
    n = draw(st.integers(0, 5))
    bp = sorted(
        draw(
            st.lists(
                st.floats(0.0, 10.0, allow_nan=False), min_size=n, max_size=n, unique=True
            )
        )
    )
    vals = sorted(draw(st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=n, max_size=n)))
    return curve(bp, vals)


@given(step_curve(), step_curve())
def test_intersections_antisymmetric(a, b):
    fwd = intersections(a, b)
    rev = intersections(b, a)
    flip = {A_BECOMES_SMALLER: B_BECOMES_SMALLER, B_BECOMES_SMALLER: A_BECOMES_SMALLER, TOUCH: TOUCH}
    assert [(g.epsilon, flip[g.direction]) for g in fwd] == [(g.epsilon, g.direction) for g in rev]


@given(step_curve(), st.floats(0, 12), st.floats(0, 12))
def test_monotonicity(c, e1, e2):
    lo, hi = min(e1, e2), max(e1, e2)
    assert c(lo) <= c(hi)


def test_export_import_round_trip():
    c = build_curve(FOUR, [0.25] * 4, meta=CurveMeta(norm=NormKind.L2, model="m", dataset="d"))
    blob = export_curve(c)
    text = blob.decode()
    assert "epsilon,robust_error" in text
    assert text.count("\n") - text.count("#") - 1 == 3  # three data rows
    back = import_curve(blob)
    np.testing.assert_array_equal(back.breakpoints, c.breakpoints)
    np.testing.assert_array_equal(back.values, c.values)
    assert back.meta == c.meta and back.horizon == c.horizon


def test_export_bit_exact_on_awkward_floats():
    c = curve([1 / 3, 2 / 3, 0.7000000000000001], [0.1, 0.30000000000000004, 1.0])
    back = import_curve(export_curve(c))
    assert back.breakpoints.tobytes() == c.breakpoints.tobytes()
    assert back.values.tobytes() == c.values.tobytes()


def test_export_empty_curve():
    c = build_curve([], [], horizon=0.4, meta=CurveMeta(estimator="attack"))
    lines = export_curve(c).decode().splitlines()
    assert lines[-1] == "epsilon,robust_error"
    back = import_curve(export_curve(c))
    assert back.breakpoints.size == 0 and back.horizon == 0.4


def test_import_rejects_malformed():
    with pytest.raises(ParseError, match="header"):
        import_curve(b"0.1,0.5\n")
    with pytest.raises(ParseError, match="line 2"):
        import_curve(b"epsilon,robust_error\nfoo,bar\n")
    with pytest.raises(ParseError):
        import_curve(b"epsilon,robust_error\n0.1\n")
