import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypermet.metric import (
    INFINITY_TOKEN,
    DomainError,
    FiniteMetricSpace,
    InputError,
    MetricViolation,
    PointedSpace,
    QuasiMetricSpace,
    UndefinedCrossRatio,
    chordal_distance,
    chordal_space,
    cross_ratio,
    invert_cloud,
    validate_metric,
)

from _oracles import cross_ratio_plain


def line(*xs):
    return FiniteMetricSpace.from_coords(np.array(xs, dtype=float), labels=[str(x) for x in xs])


def test_degenerate_triangle_is_a_metric():
    out = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]], labels="abc")
    assert isinstance(out, FiniteMetricSpace)


def test_triangle_violation_report():
    out = validate_metric([[0, 1, 3], [1, 0, 1], [3, 1, 0]], labels="abc")
    assert isinstance(out, MetricViolation)
    assert out.reason == "triangle inequality"
    assert out.worst_triple == ("a", "b", "c")
    assert out.quasi_constant == 3.0
    assert out.to_dict()["worst_triple"] == ["a", "b", "c"]


def test_singleton_is_valid():
    assert isinstance(validate_metric([[0.0]]), FiniteMetricSpace)


@pytest.mark.parametrize("bad", [[[0, 1]], [[0, -1], [-1, 0]], [[0, np.inf], [np.inf, 0]]])
def test_malformed_matrix_raises(bad):
    with pytest.raises(InputError):
        validate_metric(bad)


def test_asymmetry_is_reported_not_raised():
    out = validate_metric([[0, 1], [1.5, 0]])
    assert isinstance(out, MetricViolation)
    assert out.reason == "asymmetric"
    assert out.max_asymmetry == 0.5


def test_zero_offdiagonal_rejected():
    assert isinstance(validate_metric([[0, 0], [0, 0]]), MetricViolation)
    with pytest.raises(InputError):
        FiniteMetricSpace(["a", "b"], [[0, 0], [0, 0]])


def test_duplicate_labels_rejected():
    with pytest.raises(InputError):
        FiniteMetricSpace(["a", "a"], [[0, 1], [1, 0]])


def test_accepted_spaces_have_no_quasi_excess():
    rng = np.random.default_rng(1)
    for _ in range(20):
        sp = FiniteMetricSpace.from_coords(rng.normal(size=(12, 3)))
        out = validate_metric(sp.dist)
        assert isinstance(out, FiniteMetricSpace)


def test_space_is_immutable_and_round_trips():
    sp = FiniteMetricSpace.from_coords([[0, 0], [3, 4]], weights=[1, 2])
    with pytest.raises(ValueError):
        sp.dist[0, 1] = 7
    again = FiniteMetricSpace.from_dict(sp.to_dict())
    assert again.labels == sp.labels
    assert np.array_equal(again.dist, sp.dist)
    assert np.array_equal(again.weights, sp.weights)
    assert sp.d("p0", "p1") == 5.0


def test_subspace_and_unknown_label():
    sp = line(0, 1, 5)
    sub = sp.subspace(["5", "0"])
    assert sub.d("5", "0") == 5.0
    with pytest.raises(KeyError):
        sp.index("nope")


def test_quasimetric_constant_and_pointed_space():
    q = QuasiMetricSpace("abc", [[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    assert q.quasi_constant == 3.0
    sp = line(0, 1)
    assert PointedSpace(sp, 1).base_label == "1"
    with pytest.raises(InputError):
        PointedSpace(sp, 2)


def test_cross_ratio_on_the_line():
    sp = line(0, 1, 2, 3)
    assert cross_ratio(sp, "0", "1", "2", "3") == 4.0


def test_cross_ratio_with_infinity():
    sp = line(0, 1, 2)
    assert cross_ratio(sp, "0", "1", "2", INFINITY_TOKEN) == 2.0


def test_cross_ratio_errors():
    sp = line(0, 1, 2)
    with pytest.raises(UndefinedCrossRatio):
        cross_ratio(sp, "0", "0", "1", "2")
    with pytest.raises(UndefinedCrossRatio):
        cross_ratio(sp, "0", "1", INFINITY_TOKEN, INFINITY_TOKEN)


def test_cross_ratio_symmetries_on_random_quadruples():
    rng = np.random.default_rng(7)
    sp = FiniteMetricSpace.from_coords(rng.normal(size=(30, 2)))
    L = sp.labels
    for _ in range(100):
        x, y, z, w = (L[i] for i in rng.choice(30, 4, replace=False))
        r = cross_ratio(sp, x, y, z, w)
        ix = [sp.index(v) for v in (x, y, z, w)]
        assert r == pytest.approx(cross_ratio_plain(sp.dist, *ix), rel=1e-12)
        assert r == cross_ratio(sp, z, w, x, y)
        assert r == pytest.approx(cross_ratio(sp, y, x, w, z), rel=1e-12)
        assert r * cross_ratio(sp, x, z, y, w) == pytest.approx(1.0, rel=1e-12)


def test_inversion_examples():
    assert np.allclose(invert_cloud([[2.0, 0.0]]), [[0.5, 0.0]])
    assert np.array_equal(invert_cloud([[0.0, 1.0]]), [[0.0, 1.0]])
    with pytest.raises(DomainError):
        invert_cloud([[0.0, 0.0]])


def test_inversion_is_an_involution():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(50, 3))
    back = invert_cloud(invert_cloud(x))
    assert np.max(np.abs(back - x) / np.linalg.norm(x, axis=1, keepdims=True)) < 1e-12


def test_chordal_examples():
    assert chordal_distance([0.0], [1.0])[0, 0] == pytest.approx(math.sqrt(2), rel=1e-15)
    far = chordal_distance([[0.0, 0.0]], [[1e9, 0.0]])[0, 0]
    assert far == pytest.approx(2.0, rel=1e-9)


def test_chordal_triangle_inequality_on_random_cloud():
    rng = np.random.default_rng(11)
    sp = chordal_space(rng.normal(scale=3, size=(200, 2)))
    assert isinstance(validate_metric(sp.dist), FiniteMetricSpace)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=2, max_size=12, unique=True))
def test_chordal_space_is_always_a_metric(pts):
    pts = np.array(pts)
    if len(np.unique(pts, axis=0)) < len(pts) or np.min(
        np.linalg.norm(pts[:, None] - pts[None], axis=-1) + np.eye(len(pts))
    ) < 1e-6:
        return
    sp = chordal_space(pts)
    assert isinstance(validate_metric(sp.dist), FiniteMetricSpace)
    assert sp.diameter <= 2.0 + 1e-12
