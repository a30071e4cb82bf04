"""Empirical checks of geometric conditions on grid-discretized domains.

All constants computed here come from finitely many pairs and curves, so
they are lower bounds for the constants of the continuous conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import ConvexHull, cKDTree

from ..boundary import monotone_envelope
from ..hyperbolicity import ConfigurationError
from ..metric import InputError
from .grid import EUCL, QH, QhGraph, euclidean_geodesic, qh_distance
from .shapes import DomainSpec, sphere_directions

# relative slack allowed between grid values and continuous bounds
GRID_TOLERANCE = 0.05

ANNULUS = "ANNULUS"
ARC = "ARC"


class ParameterError(ValueError):
    pass


@dataclass
class ConditionReport:
    condition: str
    constant: float
    witness: Optional[dict]
    h: float
    bound: Optional[float] = None
    passed: Optional[bool] = None
    lower_bound: bool = True
    records: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "constant": self.constant,
            "witness": self.witness,
            "h": self.h,
            "bound": self.bound,
            "passed": self.passed,
            "lower_bound": self.lower_bound,
            "records": self.records,
        }


def _pair_nodes(graph: QhGraph, pair) -> tuple[int, int, float, float]:
    (x, y) = pair
    i, si = graph.snap(x)
    j, sj = graph.snap(y)
    return i, j, si, sj


def _xy(graph, i):
    return [float(v) for v in graph.coords[i]]


@dataclass
class PhiProfile:
    scatter: list
    envelope: list
    violations: list
    records: list
    tolerance: float
    h: float
    growth: Optional[ConditionReport] = None

    @property
    def passed(self) -> bool:
        ok = not self.violations
        if self.growth is not None:
            ok = ok and bool(self.growth.passed)
        return ok

    def to_dict(self) -> dict:
        return {
            "condition": "phi-uniform",
            "h": self.h,
            "tolerance": self.tolerance,
            "scatter_columns": ["r_D", "k_hat"],
            "scatter": [list(p) for p in self.scatter],
            "envelope": [list(p) for p in self.envelope],
            "violations": self.violations,
            "records": self.records,
            "growth": None if self.growth is None else self.growth.to_dict(),
            "passed": self.passed,
        }


def node_diameter(graph: QhGraph) -> float:
    p = graph.coords
    if len(p) > p.shape[1] + 1:
        try:
            p = p[ConvexHull(p).vertices]
        except Exception:  # degenerate hull, fall back to all nodes
            pass
    d = np.linalg.norm(p[:, None, :] - p[None, :, :], axis=-1)
    return float(d.max())


def deepest_node(graph: QhGraph) -> int:
    """Node of maximal clearance; ties go to the lexicographically smallest coordinates."""
    m = graph.clearance.max()
    cand = np.flatnonzero(graph.clearance == m)
    keys = graph.coords[cand]
    order = np.lexsort(keys.T[::-1])
    return int(cand[order[0]])


def phi_uniform_profile(
    spec: DomainSpec,
    graph: QhGraph,
    pairs: Sequence,
    phi: Callable,
    tolerance: float = GRID_TOLERANCE,
    growth: bool = False,
) -> PhiProfile:
    """Compare grid quasihyperbolic distance with phi of the distance ratio.

    A pair violates when k_hat > (1 + tolerance) phi(r_D). With ``growth``
    the bounded-domain growth inequality k(w, x) <= phi(diam / d(x)) is
    checked from the deepest node w to every pair endpoint.
    """
    if growth and not spec.bounded:
        raise ConfigurationError("the growth check applies to bounded domains only")
    scatter, records, violations = [], [], []
    endpoints = []
    for pair in pairs:
        i, j, si, sj = _pair_nodes(graph, pair)
        endpoints += [i, j]
        xi, xj = graph.coords[i], graph.coords[j]
        if i == j:
            r, k = 0.0, 0.0
        else:
            r = float(np.linalg.norm(xi - xj)) / float(min(graph.clearance[i], graph.clearance[j]))
            k = qh_distance(graph, xi, xj).value
        bound = float(phi(r))
        rec = {"x": _xy(graph, i), "y": _xy(graph, j), "r_D": r, "k_hat": k, "phi": bound, "snap": [si, sj]}
        records.append(rec)
        scatter.append((r, k))
        if k > (1 + tolerance) * bound:
            violations.append(rec)
    sc = np.array(scatter, dtype=float).reshape(-1, 2)
    env = monotone_envelope(sc[:, 0], sc[:, 1])
    rep = None
    if growth:
        rep = growth_check(graph, sorted(set(endpoints)), phi, tolerance)
    return PhiProfile(scatter, env, violations, records, tolerance, graph.h, rep)


def growth_check(graph: QhGraph, nodes: Sequence[int], phi: Callable, tolerance: float = GRID_TOLERANCE) -> ConditionReport:
    """k(w, x) <= phi(diam/d(w) * d(w)/d(x)) from the deepest node w."""
    w = deepest_node(graph)
    diam = node_diameter(graph)
    dist, _ = graph.sssp(QH, w)
    worst, wit, ok = -np.inf, None, True
    recs = []
    for x in nodes:
        k = float(dist[x])
        bound = float(phi(diam / graph.clearance[x]))
        ratio = k / bound if bound > 0 else (0.0 if k == 0 else math.inf)
        recs.append({"x": _xy(graph, x), "k_hat": k, "phi": bound})
        if k > (1 + tolerance) * bound:
            ok = False
        if ratio > worst:
            worst, wit = ratio, {"w": _xy(graph, w), "x": _xy(graph, x), "k_hat": k, "phi": bound}
    return ConditionReport("growth", float(worst), wit, graph.h, bound=1 + tolerance, passed=ok, records=recs)


def _competitors(graph: QhGraph, i: int, j: int, n: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Euclidean-shortest curves from i to j forced through random intermediate nodes."""
    p, q = graph.coords[i], graph.coords[j]
    base = float(np.linalg.norm(p - q))
    lens = np.linalg.norm(graph.coords - p, axis=1) + np.linalg.norm(graph.coords - q, axis=1)
    cand = np.flatnonzero(lens <= 1.5 * base + 2 * graph.h)
    out = []
    if len(cand) == 0 or n == 0:
        return out
    for m in rng.choice(cand, size=min(n, len(cand)), replace=False):
        m = int(m)
        if m in (i, j):
            continue
        _, a = graph.path(EUCL, i, m)
        _, b = graph.path(EUCL, m, j)
        out.append(np.concatenate([a, b[1:]]))
    return out


def geodesic_conditions(
    spec: DomainSpec,
    graph: QhGraph,
    pairs: Sequence,
    n_competitors: int = 16,
    seed: int = 0,
) -> tuple[ConditionReport, ConditionReport]:
    """Gehring-Hayman and ball-separation estimates (both lower bounds).

    C_gh compares the Euclidean length of the quasihyperbolic geodesic with the
    Euclidean-shortest grid curve. C_bs is the largest dist(z, beta)/d(z) over
    geodesic points z and competitor curves beta (the shortest curve plus
    seeded random detours).
    """
    rng = np.random.default_rng(seed)
    gh, bs = (-np.inf, None), (-np.inf, None)
    gh_rec, bs_rec = [], []
    for pair in pairs:
        i, j, _, _ = _pair_nodes(graph, pair)
        if i == j:
            continue
        gamma = qh_distance(graph, graph.coords[i], graph.coords[j]).path
        beta = euclidean_geodesic(graph, graph.coords[i], graph.coords[j]).path
        ratio = graph.eucl_length(gamma) / graph.eucl_length(beta)
        gh_rec.append({"x": _xy(graph, i), "y": _xy(graph, j), "C_gh": ratio})
        if ratio > gh[0]:
            gh = (ratio, {"x": _xy(graph, i), "y": _xy(graph, j), "len_qh_geodesic": graph.eucl_length(gamma),
                          "len_shortest": graph.eucl_length(beta)})
        zs = graph.coords[gamma]
        dz = graph.clearance[gamma]
        pair_bs, pair_wit = 0.0, None
        for k, curve in enumerate([beta] + _competitors(graph, i, j, n_competitors, rng)):
            sep, _ = cKDTree(graph.coords[curve]).query(zs)
            val = sep / dz
            m = int(np.argmax(val))
            if val[m] > pair_bs:
                pair_bs, pair_wit = float(val[m]), {"z": [float(v) for v in zs[m]], "curve": k, "dist": float(sep[m])}
        bs_rec.append({"x": _xy(graph, i), "y": _xy(graph, j), "C_bs": pair_bs})
        if pair_bs > bs[0]:
            bs = (pair_bs, dict(x=_xy(graph, i), y=_xy(graph, j), **(pair_wit or {})))
    gh_c = None if gh[1] is None else float(gh[0])
    bs_c = None if bs[1] is None else float(bs[0])
    return (
        ConditionReport("gehring-hayman", gh_c, gh[1], graph.h, records=gh_rec),
        ConditionReport("ball-separation", bs_c, bs[1], graph.h, records=bs_rec),
    )


def curve_uniformity(graph: QhGraph, nodes: np.ndarray, chord: float) -> tuple[float, int]:
    """Smallest c for which the curve satisfies both uniformity clauses, and the worst vertex."""
    p = graph.coords[nodes]
    steps = np.linalg.norm(np.diff(p, axis=0), axis=1)
    run = np.concatenate([[0.0], np.cumsum(steps)])
    total = run[-1]
    cigar = np.minimum(run, total - run) / graph.clearance[nodes]
    k = int(np.argmax(cigar))
    return max(total / chord, float(cigar[k])), k


def uniformity_constant(spec: DomainSpec, graph: QhGraph, pairs: Sequence) -> ConditionReport:
    """Per pair, the best c over the shortest curve and the qh geodesic; max over pairs."""
    best, wit, recs = -np.inf, None, []
    for pair in pairs:
        i, j, _, _ = _pair_nodes(graph, pair)
        if i == j:
            continue
        chord = float(np.linalg.norm(graph.coords[i] - graph.coords[j]))
        curves = {
            "shortest": euclidean_geodesic(graph, graph.coords[i], graph.coords[j]).path,
            "qh_geodesic": qh_distance(graph, graph.coords[i], graph.coords[j]).path,
        }
        scored = {name: curve_uniformity(graph, c, chord) for name, c in curves.items()}
        name = min(scored, key=lambda s: scored[s][0])
        c, k = scored[name]
        recs.append({"x": _xy(graph, i), "y": _xy(graph, j), "c": c, "curve": name})
        if c > best:
            z = curves[name][k]
            best, wit = c, {"x": _xy(graph, i), "y": _xy(graph, j), "curve": name, "z": _xy(graph, z)}
    return ConditionReport("uniformity", None if wit is None else float(best), wit, graph.h, records=recs)


@dataclass(frozen=True)
class AnnulusResult:
    kind: str
    boundary_point: tuple
    t: float
    witness: Optional[tuple] = None


def annulus_classify(spec: DomainSpec, x, lam: float, n_radii: int = 48, n_dirs: int = 360) -> AnnulusResult:
    """λ-annulus or λ-arc point, by dense sampling of the open annulus around the nearest boundary point."""
    if not 0 < lam <= 0.5:
        raise ParameterError("lambda must lie in (0, 1/2]")
    x = np.asarray(x, dtype=float)
    t = spec.distance_to_boundary(x)
    if t <= 0:
        raise InputError("x must be an interior point")
    a = spec.nearest_boundary_point(x)
    r_in, r_out = lam * t, t / lam
    radii = r_in + (r_out - r_in) * (np.arange(n_radii) + 0.5) / n_radii
    dirs = sphere_directions(spec.dimension, n_dirs if spec.dimension == 2 else n_dirs * 8)
    samples = (a[None, None, :] + radii[:, None, None] * dirs[None, :, :]).reshape(-1, spec.dimension)
    inside = spec.contains(samples)
    a_t = tuple(float(v) for v in a)
    if inside.all():
        return AnnulusResult(ANNULUS, a_t, t)
    bad = samples[int(np.argmin(inside))]
    return AnnulusResult(ARC, a_t, t, tuple(float(v) for v in bad))


@dataclass
class SphericalComparison:
    ratio_min: float
    ratio_max: float
    bound: float
    passed: bool
    records: list
    h: float

    def to_dict(self) -> dict:
        return {
            "condition": "spherical-compare",
            "ratio_min": self.ratio_min,
            "ratio_max": self.ratio_max,
            "bound": self.bound,
            "passed": self.passed,
            "h": self.h,
            "records": self.records,
        }


def sphericalized_clearance(spec: DomainSpec, graph: QhGraph, a) -> np.ndarray:
    """Upper estimate of the sphericalized boundary distance at every node.

    Minimum of the sphericalization quasimetric to the boundary samples (node
    projections), to the point at infinity, and 2 d(x) / (1 + |x - a|)^2.
    """
    a = np.asarray(a, dtype=float)
    p = graph.coords
    da = np.linalg.norm(p - a, axis=1)
    samples = np.array([spec.nearest_boundary_point(q) for q in p])
    samples = np.unique(np.round(samples, 12), axis=0)
    sa = np.linalg.norm(samples - a, axis=1)
    best = np.minimum(1.0 / (1.0 + da), 2.0 * graph.clearance / (1.0 + da) ** 2)
    chunk = max(1, 4_000_000 // max(len(samples), 1))
    for s in range(0, len(p), chunk):
        blk = p[s:s + chunk]
        d = np.linalg.norm(blk[:, None, :] - samples[None, :, :], axis=-1)
        q = d / ((1.0 + da[s:s + chunk, None]) * (1.0 + sa[None, :]))
        best[s:s + chunk] = np.minimum(best[s:s + chunk], q.min(axis=1))
    return best


def spherical_compare(spec: DomainSpec, graph: QhGraph, a, pairs: Sequence, c: float = 1.0) -> SphericalComparison:
    """Ratios of sphericalized to plain grid quasihyperbolic distance over pairs.

    The sphericalized edge weight is |u - v| * 2 / (D(u) + D(v)) with
    D = sphericalized clearance / spherical density, the discrete form of
    ds_a / d_a(z) with ds_a = |dz| / (1 + |z - a|)^2.
    """
    if spec.bounded:
        raise ConfigurationError("spherical comparison needs an unbounded domain")
    a = np.asarray(a, dtype=float)
    scale = max(1.0, float(np.linalg.norm(a)))
    if abs(spec.distance_to_boundary(a)) > 1e-9 * scale:
        raise InputError("base point a must lie on the boundary")
    clr_a = sphericalized_clearance(spec, graph, a)
    rho = 1.0 / (1.0 + np.linalg.norm(graph.coords - a, axis=1)) ** 2
    D = clr_a / rho
    e = graph.weights[EUCL].tocoo()
    wa = e.data * 2.0 / (D[e.row] + D[e.col])
    Wa = coo_matrix((wa, (e.row, e.col)), shape=e.shape).tocsr()
    records = []
    rmin, rmax = math.inf, -math.inf
    for pair in pairs:
        i, j, _, _ = _pair_nodes(graph, pair)
        if i == j:
            continue
        k = float(graph.sssp(QH, i)[0][j])
        ka = float(dijkstra(Wa, directed=False, indices=i)[j])
        r = ka / k
        rmin, rmax = min(rmin, r), max(rmax, r)
        records.append({"x": _xy(graph, i), "y": _xy(graph, j), "k_hat": k, "k_hat_a": ka, "ratio": r})
    bound = 80.0 * c
    passed = bool(records) and rmin >= 1.0 / bound and rmax <= bound
    return SphericalComparison(rmin, rmax, bound, passed, records, graph.h)
