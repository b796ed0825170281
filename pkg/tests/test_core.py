import numpy as np
import pytest
from hypothesis import given, strategies as st

from robustcurves.core import (
    ATOL,
    Dataset,
    InvalidInputError,
    LabeledPoint,
    NormKind,
    UnsupportedNormError,
    dual_exponent,
    dual_norm,
    dual_norm_value,
    norm,
)


def test_norm_values_3_minus4():
    v = np.array([3.0, -4.0])
    assert norm(v, NormKind.L2) == 5.0
    assert norm(v, NormKind.L1) == 7.0
    assert norm(v, NormKind.LINF) == 4.0


def test_dual_exponent():
    assert dual_exponent(NormKind.L1) == np.inf
    assert dual_exponent(NormKind.L2) == 2.0
    assert dual_exponent(NormKind.LINF) == 1.0


def test_dual_norm_pairing():
    assert dual_norm(NormKind.L1) == NormKind.LINF
    assert dual_norm(NormKind.LINF) == NormKind.L1
    assert dual_norm(NormKind.L2) == NormKind.L2


def test_dual_norm_value_3_4():
    w = np.array([3.0, 4.0])
    assert dual_norm_value(w, NormKind.L1) == 4.0
    assert dual_norm_value(w, NormKind.L2) == 5.0
    assert dual_norm_value(w, NormKind.LINF) == 7.0


def test_parse_norm_names():
    assert NormKind.parse("l2") == NormKind.L2
    assert NormKind.parse("Linf") == NormKind.LINF
    assert NormKind.parse("L1") == NormKind.L1
    with pytest.raises(UnsupportedNormError):
        NormKind.parse("l3")


@pytest.mark.parametrize("bad", [np.array([1.0, np.nan]), np.array([np.inf]), np.array([])])
def test_norm_rejects_bad_vectors(bad):
    with pytest.raises(InvalidInputError):
        norm(bad, NormKind.L2)


finite_vecs = st.lists(
    st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False), min_size=1, max_size=8
).map(np.array)


@given(finite_vecs, st.sampled_from(list(NormKind)), st.floats(-100, 100))
def test_norm_absolute_homogeneity(v, kind, alpha):
    assert norm(alpha * v, kind) == pytest.approx(abs(alpha) * norm(v, kind), abs=1e-9, rel=1e-12)


@given(
    st.integers(1, 8).flatmap(
        lambda m: st.tuples(
            st.lists(st.floats(-100, 100, allow_nan=False), min_size=m, max_size=m).map(np.array),
            st.lists(st.floats(-100, 100, allow_nan=False), min_size=m, max_size=m).map(np.array),
        )
    ),
    st.sampled_from(list(NormKind)),
)
def test_holder_inequality(uv, kind):
    # |u.w| <= ||u||_p ||w||_q with q the dual exponent; equality is attainable
    # but never exceeded.
    u, w = uv
    lhs = abs(float(np.dot(u, w)))
    rhs = norm(u, kind) * dual_norm_value(w, kind)
    assert lhs <= rhs * (1 + 1e-12) + 1e-9


def test_labeled_point_validation():
    LabeledPoint(np.array([0.5]), 1, 0.25)
    with pytest.raises(InvalidInputError):
        LabeledPoint(np.array([0.5]), -1, 0.25)
    with pytest.raises(InvalidInputError):
        LabeledPoint(np.array([0.5]), 0, 0.0)


def test_dataset_from_arrays_uniform_weights():
    xs = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    ds = Dataset.from_arrays(xs, [0, 1, 0])
    assert len(ds) == 3 and ds.dim == 2 and ds.num_classes == 2
    np.testing.assert_allclose(ds.weights, 1.0 / 3.0)
    assert abs(ds.weights.sum() - 1.0) <= ATOL


def test_dataset_rejects_out_of_range_label():
    with pytest.raises(InvalidInputError):
        Dataset.from_arrays(np.zeros((2, 1)), [0, 2], num_classes=2)


def test_dataset_rejects_bad_weight_sum():
    with pytest.raises(InvalidInputError):
        Dataset.from_arrays(np.zeros((2, 1)), [0, 1], weights=[0.5, 0.6])


def test_dataset_point_round_trip():
    pts = [
        LabeledPoint(np.array([1.0, 2.0]), 0, 0.5),
        LabeledPoint(np.array([3.0, 4.0]), 2, 0.5),
    ]
    ds = Dataset.from_points(pts, num_classes=3, name="toy")
    back = ds.points
    assert [p.y for p in back] == [0, 2]
    np.testing.assert_array_equal(back[1].x, [3.0, 4.0])
    assert ds.labels_present() == {0, 2}


def test_dataset_empty_allowed():
    ds = Dataset.from_arrays(np.zeros((0, 3)), [], num_classes=2)
    assert len(ds) == 0 and ds.dim == 3
