import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypermet.metric import INFINITY_TOKEN, FiniteMetricSpace, QuasiMetricSpace, validate_metric
from hypermet.sphericalize import (
    DegenerateMetrization,
    boundary_clearance,
    chain_metrize,
    spherical_curve_length,
    spherical_density,
    spherical_measure,
    sphericalize,
    sphericalize_quasimetric,
)

from _oracles import brute_chains, quasimetric_suite


def reals(*xs, **kw):
    return FiniteMetricSpace.from_coords(np.array(xs, dtype=float), labels=[str(x) for x in xs], **kw)


def test_quasimetric_entries():
    q = sphericalize_quasimetric(reals(0, 1, 3), "0")
    assert q.labels[-1] == INFINITY_TOKEN
    i1, i3, inf = q.labels.index("1"), q.labels.index("3"), q.labels.index(INFINITY_TOKEN)
    assert q.dist[i1, i3] == 0.25
    assert q.dist[i1, inf] == 0.5
    assert q.dist[inf, inf] == 0.0


def test_unknown_base():
    with pytest.raises(KeyError):
        sphericalize(reals(0, 1), "7")


def test_metric_input_is_unchanged():
    rng = np.random.default_rng(0)
    sp = FiniteMetricSpace.from_coords(rng.normal(size=(15, 2)))
    assert np.array_equal(chain_metrize(sp).dist, sp.dist)


def test_three_point_chain_repair():
    out = chain_metrize(QuasiMetricSpace("abc", [[0, 1, 3], [1, 0, 1], [3, 1, 0]]))
    assert out.d("a", "c") == 2.0
    assert np.array_equal(out.dist, brute_chains([[0, 1, 3], [1, 0, 1], [3, 1, 0]]))


def test_chain_metrize_matches_enumeration_on_small_cases():
    for d in quasimetric_suite(seed=5, cases=25, n_max=7):
        q = QuasiMetricSpace([f"q{i}" for i in range(len(d))], d)
        assert np.array_equal(chain_metrize(q).dist, brute_chains(d))


def test_degenerate_metrization_names_pair():
    q = QuasiMetricSpace("abc", [[0, 1e-13, 1], [1e-13, 0, 1e-13], [1, 1e-13, 0]])
    with pytest.raises(DegenerateMetrization) as err:
        chain_metrize(q)
    assert err.value.pair == ("a", "b")
    assert err.value.to_dict()["reason"] == "degenerate metrization"


def test_quarter_bound_on_planar_cloud():
    rng = np.random.default_rng(42)
    sp = FiniteMetricSpace.from_coords(rng.normal(scale=5, size=(30, 2)))
    for base in sp.labels[:5]:
        s = sphericalize(sp, base)
        qa, da = s.quasi.dist, s.metrized.dist
        assert np.all(da <= qa * (1 + 1e-12))
        assert np.all(0.25 * qa <= da * (1 + 1e-12))
        assert 1.0 <= s.comparison_ratio <= 4.0
        assert s.metrized.diameter <= 1.0
        assert s.quasi.quasi_constant <= 2.0
        assert isinstance(validate_metric(da, s.metrized.labels), FiniteMetricSpace)


def test_sphericalized_report_fields():
    d = sphericalize(reals(0, 1, 3), "0").to_dict()
    assert {"quasi", "metrized", "comparison_ratio", "base"} <= d.keys()
    assert d["labels"][-1] == INFINITY_TOKEN


def test_density_values_and_monotonicity():
    assert spherical_density(0.0) == 1.0
    assert spherical_density(1.0) == 0.25
    g = spherical_density(np.linspace(0, 1e4, 5001))
    assert np.all(np.diff(g) < 0)
    assert g[-1] < 1e-7


def test_curve_length_against_antiderivative():
    v = spherical_curve_length([[0.0], [1.0]], [0.0], segments=1000)
    assert abs(v - 0.5) < 1e-4


def test_curve_length_refinement_reduces_error():
    errs = [abs(spherical_curve_length([[0.0], [1.0]], [0.0], segments=m) - 0.5) for m in (4, 16, 64)]
    assert errs[0] > errs[1] > errs[2]


def test_curve_length_degenerate_and_far():
    assert spherical_curve_length([[2.0, 1.0], [2.0, 1.0]], [0.0, 0.0]) == 0.0
    R = 10.0
    seg = [[R, 0.0], [R, 3.0]]
    assert spherical_curve_length(seg, [0.0, 0.0], segments=50) <= 3.0 / (1 + R) ** 2
    with pytest.raises(ValueError):
        spherical_curve_length([[0.0, 0.0]], [0.0, 0.0])


def test_curve_length_dominates_metrized_distance():
    pts = np.linspace(0, 5, 41)[:, None]
    sp = FiniteMetricSpace.from_coords(pts)
    s = sphericalize(sp, "p0")
    ell = spherical_curve_length(pts, [0.0], segments=20)
    assert ell >= s.metrized.d("p0", "p40") * (1 - 1e-3)


def test_spherical_measure_examples():
    one = FiniteMetricSpace(["a"], [[0.0]], weights=[1.0])
    assert spherical_measure(one, "a", ["a"]) == 1.0
    two = reals(0, 1, weights=[1.0, 1.0])
    assert spherical_measure(two, "0", ["1"]) == 0.25
    rng = np.random.default_rng(2)
    sp = FiniteMetricSpace.from_coords(rng.normal(size=(20, 2)), weights=rng.random(20))
    A, B = sp.labels[:7], sp.labels[7:]
    total = spherical_measure(sp, "p3", sp.labels)
    assert total == pytest.approx(spherical_measure(sp, "p3", A) + spherical_measure(sp, "p3", B), rel=1e-14)
    with pytest.raises(ValueError):
        spherical_measure(reals(0, 1), "0", ["1"])


def test_boundary_distance_inequality_on_half_line_samples():
    # interior samples x > 0, boundary proxy {0}; d(x) = x and a = 0
    xs = np.concatenate([[0.0], np.geomspace(0.01, 50, 40)])
    sp = FiniteMetricSpace.from_coords(xs[:, None], labels=["b"] + [f"x{i}" for i in range(40)])
    s = sphericalize(sp, "b")
    clr = boundary_clearance(s, ["b"])
    for i, x in enumerate(xs[1:], start=1):
        assert clr[s.metrized.index(f"x{i - 1}")] <= 2 * x / (1 + x) ** 2 + 1e-15


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 25), st.integers(0, 2**31 - 1), st.floats(0.1, 100))
def test_sphericalization_invariants(n, seed, scale):
    rng = np.random.default_rng(seed)
    sp = FiniteMetricSpace.from_coords(rng.normal(scale=scale, size=(n, 2)))
    s = sphericalize(sp, sp.labels[int(rng.integers(n))])
    assert s.quasi.quasi_constant <= 2.0 + 1e-12
    assert s.metrized.diameter <= 1.0 + 1e-12
    assert s.comparison_ratio <= 4.0 * (1 + 1e-12)
