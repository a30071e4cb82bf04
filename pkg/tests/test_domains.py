import json
import math

import numpy as np
import pytest

from hypermet.domains.grid import (
    ResolutionError,
    SnapError,
    discretize,
    euclidean_geodesic,
    j_metric,
    parse_window,
    qh_distance,
    qh_space,
    stencil,
)
from hypermet.domains.shapes import (
    Box,
    Complement,
    Disk,
    DomainSpec,
    HalfPlane,
    Intersect,
    Puncture,
    Strip,
    Union,
    disk,
    half_plane,
    load_domain,
    punctured_space,
    shape_from_dict,
    unit_strip,
)
from hypermet.hyperbolicity import ConnectivityError
from hypermet.metric import DomainError, InputError


def test_primitive_clearances():
    assert disk().distance_to_boundary([0, 0]) == 1.0
    s = unit_strip()
    pts = np.array([[3.0, 0.2], [-1.0, 0.9], [0.0, 0.5]])
    assert np.allclose(s.clearance(pts), np.minimum(pts[:, 1], 1 - pts[:, 1]))
    assert half_plane().distance_to_boundary([5, 2]) == 2.0
    b = DomainSpec(Box((0, 0), (2, 1)))
    assert b.distance_to_boundary([1.0, 0.25]) == 0.25
    assert b.distance_to_boundary([3.0, 0.5]) == -1.0
    assert punctured_space().distance_to_boundary([3, 4]) == 5.0


def test_half_plane_normalizes_normal():
    hp = HalfPlane((0.0, 2.0), 2.0)
    assert hp.normal == (0.0, 1.0) and hp.offset == 1.0
    assert DomainSpec(hp).distance_to_boundary([0, 3]) == 2.0


def test_operators():
    ring = DomainSpec(Intersect((Disk((0, 0), 2.0), Complement(Disk((0, 0), 1.0)))))
    assert ring.distance_to_boundary([1.5, 0]) == pytest.approx(0.5)
    assert not ring.contains([0.2, 0.0])[0]
    assert ring.bounded
    two = DomainSpec(Union((Disk((0, 0), 1.0), Disk((5, 0), 1.0))))
    assert two.contains([[0, 0], [5, 0], [2.5, 0]]).tolist() == [True, True, False]
    pd = DomainSpec(Puncture((0.0, 0.0), Disk((0, 0), 1.0)))
    assert pd.distance_to_boundary([0.3, 0]) == pytest.approx(0.3)
    assert pd.distance_to_boundary([0.8, 0]) == pytest.approx(0.2)
    assert not DomainSpec(Complement(Disk((0, 0), 1.0))).bounded


def test_nearest_boundary_points():
    assert np.allclose(disk().nearest_boundary_point([0.5, 0]), [1, 0])
    assert np.allclose(half_plane().nearest_boundary_point([3, 2]), [3, 0])
    assert np.allclose(unit_strip().nearest_boundary_point([1, 0.8]), [1, 1])
    assert np.allclose(punctured_space().nearest_boundary_point([1, 1]), [0, 0])


def test_shape_dict_round_trip_and_errors():
    spec = DomainSpec(Intersect((Strip(1, 0, 1), Complement(Puncture((0, 0.5))))))
    again = DomainSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
    assert again == spec
    with pytest.raises(InputError):
        shape_from_dict({"type": "HEXAGON"})
    with pytest.raises(InputError):
        shape_from_dict({"type": "DISK", "center": [0, 0]})
    with pytest.raises(InputError):
        Strip(1, 1.0, 0.0)
    with pytest.raises(InputError):
        DomainSpec(Disk((0, 0), 1), dimension=4)


def test_load_domain_toml_and_json(tmp_path):
    t = tmp_path / "strip.toml"
    t.write_text('dimension = 2\n[shape]\ntype = "STRIP"\naxis = 1\nlo = 0.0\nhi = 1.0\n')
    assert load_domain(t) == unit_strip()
    j = tmp_path / "disk.json"
    j.write_text(json.dumps(disk().to_dict()))
    assert load_domain(j) == disk()
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(InputError):
        load_domain(bad)


def test_three_dimensional_domain():
    ball = DomainSpec(Disk((0, 0, 0), 1.0), 3)
    g = discretize(ball, 0.25, [-1, -1, -1, 1, 1, 1])
    assert len(stencil(3)) == 13
    assert g.coords.shape[1] == 3
    assert qh_distance(g, (0, 0, 0), (0.5, 0, 0)).value > 0


def test_half_plane_nodes_match_enumeration():
    h = 0.25
    g = discretize(half_plane(), h, [-1, -1, 1, 1])
    expected = sorted(
        (round(i * h, 9), round(j * h, 9)) for i in range(-4, 5) for j in range(-4, 5) if j * h > h
    )
    got = sorted((round(x, 9), round(y, 9)) for x, y in g.coords)
    assert got == expected
    assert sorted({y for _, y in got}) == [0.5, 0.75, 1.0]


def test_window_parsing():
    lo, hi = parse_window("-8,-1,8,2", 2)
    assert lo.tolist() == [-8, -1] and hi.tolist() == [8, 2]
    with pytest.raises(InputError):
        parse_window([0, 0, 0], 2)
    with pytest.raises(InputError):
        parse_window([1, 0, 0, 1], 2)


def test_resolution_and_snap_errors():
    with pytest.raises(ResolutionError):
        discretize(disk(r=0.1), 0.5, [-1, -1, 1, 1])
    g = discretize(half_plane(), 0.25, [-1, -1, 1, 1])
    with pytest.raises(SnapError):
        qh_distance(g, (0, 0.5), (0, -3))


def test_disconnected_components():
    two = DomainSpec(Union((Disk((0, 0), 1.0), Disk((5, 0), 1.0))))
    g = discretize(two, 0.1, [-1, -1, 6, 1])
    with pytest.raises(ConnectivityError):
        qh_distance(g, (0, 0), (5, 0))


def test_half_plane_oracle_and_refinement():
    exact = math.log(4.0)
    errs = []
    for h in (0.01, 0.005):
        g = discretize(half_plane(), h, [-1, 0, 1, 2.5])
        errs.append(abs(qh_distance(g, (0, 0.5), (0, 2)).value - exact) / exact)
    assert errs[0] <= 0.03
    assert errs[1] < errs[0]


def test_half_plane_vertical_oracle_family():
    g = discretize(half_plane(), 0.01, [-0.5, 0, 0.5, 4.2])
    for s, t in [(0.5, 1.0), (0.5, 4.0), (1.0, 3.0), (2.0, 4.0)]:
        k = qh_distance(g, (0, s), (0, t)).value
        assert abs(k - math.log(t / s)) / math.log(t / s) <= 0.03


def test_qh_symmetry_and_identity():
    g = discretize(disk(), 0.05, [-1, -1, 1, 1])
    a, b = (0.3, -0.2), (-0.5, 0.6)
    assert qh_distance(g, a, b).value == qh_distance(g, b, a).value
    r = qh_distance(g, a, a)
    assert r.value == 0.0 and len(r.path) == 1
    assert g.qh_length(qh_distance(g, a, b).path) == pytest.approx(qh_distance(g, a, b).value, rel=1e-12)


def test_j_metric():
    assert j_metric(half_plane(), (0, 1), (0, 2)) == pytest.approx(math.log(2))
    assert j_metric(half_plane(), (0, 1), (0, 1)) == 0.0
    with pytest.raises(DomainError):
        j_metric(half_plane(), (0, 0), (0, 1))


def test_j_is_below_qh_up_to_grid_slack():
    rng = np.random.default_rng(5)
    h = 0.02
    g = discretize(disk(), h, [-1, -1, 1, 1])
    pts = rng.uniform(-0.7, 0.7, size=(30, 2))
    for x, y in zip(pts[:15], pts[15:]):
        i, _ = g.snap(x)
        j, _ = g.snap(y)
        xi, yj = g.coords[i], g.coords[j]
        k = qh_distance(g, xi, yj).value
        assert j_metric(disk(), xi, yj) <= k + 4 * h / min(g.clearance[i], g.clearance[j])


def test_refinement_nodes_are_nested():
    spec = DomainSpec(Intersect((Disk((0, 0), 1.0), Complement(Disk((0.3, 0), 0.2)))))
    coarse = discretize(spec, 0.1, [-1, -1, 1, 1])
    fine = discretize(spec, 0.05, [-1, -1, 1, 1])
    fine_set = {tuple(np.round(p, 9)) for p in fine.coords}
    assert all(tuple(np.round(p, 9)) in fine_set for p in coarse.coords)


def test_euclidean_geodesic_is_straight_in_convex_domain():
    g = discretize(disk(), 0.05, [-1, -1, 1, 1])
    r = euclidean_geodesic(g, (-0.5, 0.0), (0.5, 0.0))
    assert r.value == pytest.approx(1.0)
    assert g.eucl_length(r.path) == pytest.approx(1.0)


def test_qh_space_is_a_metric_subspace():
    g = discretize(disk(), 0.2, [-1, -1, 1, 1])
    sp = qh_space(g, [0, 3, 7, 11])
    assert sp.labels == ("n0", "n3", "n7", "n11")
    assert sp.d("n0", "n3") == pytest.approx(float(g.sssp("qh", 0)[0][3]))
