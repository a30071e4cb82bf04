"""Visual metrics on finite boundary charts and cross-ratio distortion scans.

A boundary chart is a finite set of proxies for points at infinity together
with their Gromov products at a base point. Bourdon metrics exponentiate
those products directly; Hamenstädt metrics first re-center them at an
anchor proxy standing in for a boundary point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Optional, Sequence

import numpy as np

from .hyperbolicity import ConfigurationError, delta_four_point, gromov_products
from .metric import TAU_REL, FiniteMetricSpace, InputError
from .sphericalize import shortest_chains

BOURDON = "BOURDON"
HAMENSTADT = "HAMENSTADT"

# orderings of a 4-set (a, b, c, d) that reach every cross-ratio value once
_ORBIT_REPS = ((0, 1, 2, 3), (0, 1, 3, 2), (0, 2, 1, 3), (0, 2, 3, 1), (0, 3, 1, 2), (0, 3, 2, 1))


class ParameterError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BoundaryChart:
    points: tuple
    gp: np.ndarray
    delta: float
    base: str
    space: Optional[FiniteMetricSpace] = None

    def __post_init__(self):
        gp = np.asarray(self.gp, dtype=float)
        pts = tuple(str(p) for p in self.points)
        if gp.shape != (len(pts), len(pts)):
            raise InputError("gp must be a square matrix over the chart points")
        if len(set(pts)) != len(pts):
            raise InputError("chart points must be unique")
        if not np.allclose(gp, gp.T, rtol=TAU_REL, atol=0):
            raise InputError("gp must be symmetric")
        if self.delta < 0:
            raise InputError("delta must be nonnegative")
        gp = 0.5 * (gp + gp.T)
        gp.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "gp", gp)
        object.__setattr__(self, "base", str(self.base))

    @property
    def n(self) -> int:
        return len(self.points)

    def index(self, label) -> int:
        try:
            return self.points.index(str(label))
        except ValueError:
            raise KeyError(f"unknown chart point {label!r}") from None

    @classmethod
    def from_space(cls, space: FiniteMetricSpace, base, proxies: Sequence, delta: Optional[float] = None):
        """Chart from a finite space; δ defaults to the sup-over-base value on proxies plus base."""
        proxies = [str(p) for p in proxies]
        gp = gromov_products(space, base)
        idx = [space.index(p) for p in proxies]
        if delta is None:
            sub = list(dict.fromkeys(proxies + [str(base)]))
            delta = delta_four_point(space.subspace(sub)).delta
        return cls(proxies, gp.products[np.ix_(idx, idx)], delta, str(base), space)

    def rebased(self, w) -> "BoundaryChart":
        if self.space is None:
            raise ConfigurationError("rebasing a chart needs its source space")
        return BoundaryChart.from_space(self.space, w, self.points, self.delta)

    def to_dict(self) -> dict:
        return {"points": list(self.points), "gp": self.gp.tolist(), "delta": self.delta, "base": self.base}

    @classmethod
    def from_dict(cls, data: Mapping) -> "BoundaryChart":
        try:
            return cls(data["points"], data["gp"], float(data["delta"]), data["base"])
        except KeyError as exc:
            raise InputError(f"chart is missing field {exc}") from None


def binary_tree_chart(depth: int) -> BoundaryChart:
    """Leaves of a complete binary tree seen from the root; (x|y) is the depth of the common ancestor."""
    leaves = [format(k, f"0{depth}b") for k in range(2**depth)]
    n = len(leaves)
    gp = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            x = i ^ j
            gp[i, j] = depth - x.bit_length()
    return BoundaryChart(leaves, gp, 0.0, "r")


@dataclass(frozen=True, eq=False)
class VisualMetric:
    kind: str
    epsilon: float
    labels: tuple
    pre_metric: np.ndarray
    metric: np.ndarray
    excluded: Optional[str] = None

    def ratio_range(self) -> tuple[float, float]:
        """min and max of metric / pre_metric over distinct pairs."""
        n = len(self.labels)
        if n < 2:
            return 1.0, 1.0
        mask = ~np.eye(n, dtype=bool)
        r = self.metric[mask] / self.pre_metric[mask]
        return float(r.min()), float(r.max())

    @property
    def within_half_bound(self) -> bool:
        lo, hi = self.ratio_range()
        return lo >= 0.5 * (1 - TAU_REL) and hi <= 1 + TAU_REL

    def space(self) -> FiniteMetricSpace:
        return FiniteMetricSpace(self.labels, self.metric)

    def to_dict(self) -> dict:
        lo, hi = self.ratio_range()
        return {
            "kind": self.kind,
            "epsilon": self.epsilon,
            "labels": list(self.labels),
            "excluded": self.excluded,
            "pre_metric": self.pre_metric.tolist(),
            "metric": self.metric.tolist(),
            "ratio_min": lo,
            "ratio_max": hi,
        }


def bourdon_interval(delta: float) -> tuple[float, float, bool]:
    """Admissible Bourdon parameters as (low, high, high_inclusive)."""
    if delta == 0:
        return 0.0, 1.0, True
    return 0.0, min(1.0, 1.0 / (5.0 * delta)), False


def _exp_premetric(products: np.ndarray, eps: float) -> np.ndarray:
    rho = np.exp(-eps * products)
    np.fill_diagonal(rho, 0.0)
    return rho


def bourdon_metric(chart: BoundaryChart, epsilon: float) -> VisualMetric:
    lo, hi, closed = bourdon_interval(chart.delta)
    ok = epsilon > lo and (epsilon <= hi if closed else epsilon < hi)
    if not ok:
        bracket = "]" if closed else ")"
        raise ParameterError(f"epsilon={epsilon} outside admissible ({lo}, {hi}{bracket} for delta={chart.delta}")
    rho = _exp_premetric(chart.gp, epsilon)
    return VisualMetric(BOURDON, epsilon, chart.points, rho, shortest_chains(rho))


def hamenstadt_limit(delta: float) -> float:
    """Largest epsilon with exp(22 epsilon delta) <= 2."""
    return math.inf if delta == 0 else math.log(2.0) / (22.0 * delta)


def busemann_matrix(gp: np.ndarray, anchor: int) -> np.ndarray:
    pa = gp[anchor]
    return gp - pa[:, None] - pa[None, :]


def hamenstadt_metric(chart: BoundaryChart, anchor, epsilon: float) -> VisualMetric:
    if not epsilon > 0 or math.exp(22.0 * epsilon * chart.delta) > 2.0:
        raise ParameterError(
            f"epsilon={epsilon} needs 0 < epsilon <= {hamenstadt_limit(chart.delta):.6g} for delta={chart.delta}"
        )
    ia = chart.index(anchor)
    keep = [i for i in range(chart.n) if i != ia]
    pb = busemann_matrix(chart.gp, ia)[np.ix_(keep, keep)]
    rho = _exp_premetric(pb, epsilon)
    return VisualMetric(
        HAMENSTADT, epsilon, tuple(chart.points[i] for i in keep), rho, shortest_chains(rho), excluded=chart.points[ia]
    )


def _quadruples(n: int, max_exhaustive: int, n_samples: int, seed: int) -> tuple[np.ndarray, bool]:
    if n < 4:
        return np.empty((0, 4), dtype=np.intp), True
    if n <= max_exhaustive:
        sets = np.array(list(combinations(range(n), 4)), dtype=np.intp)
        quads = np.concatenate([sets[:, list(o)] for o in _ORBIT_REPS])
        return quads, True
    rng = np.random.default_rng(seed)
    out = []
    have = 0
    while have < n_samples:
        q = rng.integers(0, n, size=(n_samples - have, 4))
        s = np.sort(q, axis=1)
        q = q[np.all(s[:, 1:] != s[:, :-1], axis=1)]
        out.append(q)
        have += len(q)
    return np.concatenate(out)[:n_samples], False


def _triples(n: int, max_exhaustive: int, n_samples: int, seed: int) -> np.ndarray:
    if n < 3:
        return np.empty((0, 3), dtype=np.intp)
    if n <= max_exhaustive:
        g = np.array(np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")).reshape(3, -1).T
        return g[(g[:, 0] != g[:, 1]) & (g[:, 0] != g[:, 2]) & (g[:, 1] != g[:, 2])]
    rng = np.random.default_rng(seed + 1)
    q = rng.integers(0, n, size=(n_samples, 3))
    return q[(q[:, 0] != q[:, 1]) & (q[:, 0] != q[:, 2]) & (q[:, 1] != q[:, 2])]


def cross_ratios(dist: np.ndarray, quads: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized r(x,y,z,w); returns values and a mask of well-defined entries."""
    x, y, z, w = quads.T
    num = dist[x, z] * dist[y, w]
    den = dist[x, y] * dist[z, w]
    ok = den > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(ok, num / np.where(ok, den, 1.0), np.nan), ok


def monotone_envelope(t: np.ndarray, s: np.ndarray) -> list[tuple[float, float]]:
    """Breakpoints of the least nondecreasing step function dominating the pairs (t, s)."""
    if len(t) == 0:
        return []
    order = np.lexsort((-s, t))
    t, s = t[order], s[order]
    run = np.maximum.accumulate(s)
    keep = np.ones(len(t), dtype=bool)
    keep[1:] = run[1:] > run[:-1]
    return [(float(a), float(b)) for a, b in zip(t[keep], run[keep])]


def envelope_value(envelope: Sequence, t: float) -> float:
    """Evaluate a step envelope; zero left of the first breakpoint."""
    ts = [p[0] for p in envelope]
    k = int(np.searchsorted(ts, t, side="right")) - 1
    return 0.0 if k < 0 else float(envelope[k][1])


@dataclass(frozen=True, eq=False)
class DistortionProfile:
    t: np.ndarray
    t_image: np.ndarray
    theta_envelope: list
    eta_envelope: list
    exhaustive: bool
    skipped: int
    quads: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "theta_envelope": [list(p) for p in self.theta_envelope],
            "eta_envelope": [list(p) for p in self.eta_envelope],
            "n_quadruples": int(len(self.t)),
            "exhaustive": self.exhaustive,
            "skipped": self.skipped,
        }


def _aligned(src: FiniteMetricSpace, dst: FiniteMetricSpace, correspondence):
    if correspondence is None:
        correspondence = {l: l for l in src.labels}
    pairs = [(src.index(a), dst.index(b)) for a, b in correspondence.items()]
    if len({b for _, b in pairs}) != len(pairs):
        raise InputError("correspondence must be injective")
    si = [a for a, _ in pairs]
    di = [b for _, b in pairs]
    return src.dist[np.ix_(si, si)], dst.dist[np.ix_(di, di)]


def quasimobius_distortion(
    src: FiniteMetricSpace,
    dst: FiniteMetricSpace,
    correspondence: Optional[Mapping] = None,
    max_exhaustive: int = 40,
    n_samples: int = 1_000_000,
    seed: int = 0,
) -> DistortionProfile:
    """Scan cross-ratios (t, t') of a correspondence between two finite spaces.

    Up to ``max_exhaustive`` points every quadruple is covered (one ordering
    per cross-ratio value); above that ``n_samples`` seeded quadruples are used.
    """
    d1, d2 = _aligned(src, dst, correspondence)
    n = len(d1)
    if n < 4:
        raise InputError("need at least four corresponding points")
    quads, exhaustive = _quadruples(n, max_exhaustive, n_samples, seed)
    t, ok1 = cross_ratios(d1, quads)
    s, ok2 = cross_ratios(d2, quads)
    ok = ok1 & ok2
    tri = _triples(n, max_exhaustive, n_samples, seed)
    x, y, z = tri.T
    tok = (d1[x, z] > 0) & (d2[x, z] > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        qt = d1[x, y] / d1[x, z]
        qs = d2[x, y] / d2[x, z]
    return DistortionProfile(
        t=t[ok],
        t_image=s[ok],
        theta_envelope=monotone_envelope(t[ok], s[ok]),
        eta_envelope=monotone_envelope(qt[tok], qs[tok]),
        exhaustive=exhaustive,
        skipped=int((~ok).sum() + (~tok).sum()),
        quads=quads[ok],
    )


@dataclass(frozen=True)
class Lemma3Report:
    passed: bool
    max_slack: float
    witness: Optional[tuple]
    violations: int
    literal_violations: int
    n_quadruples: int
    exhaustive: bool
    constant: float
    literal_constant: float
    epsilon: float
    epsilon_prime: float
    delta: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_slack": self.max_slack,
            "witness": None if self.witness is None else list(self.witness),
            "violations": self.violations,
            "literal_violations": self.literal_violations,
            "n_quadruples": self.n_quadruples,
            "exhaustive": self.exhaustive,
            "constant": self.constant,
            "literal_constant": self.literal_constant,
            "epsilon": self.epsilon,
            "epsilon_prime": self.epsilon_prime,
            "delta": self.delta,
        }


def lemma3_certificate(
    chart: BoundaryChart,
    anchor,
    epsilon: float,
    epsilon_prime: float,
    w=None,
    max_exhaustive: int = 40,
    n_samples: int = 1_000_000,
    seed: int = 0,
) -> Lemma3Report:
    """Check σ-cross-ratio <= C (Bourdon cross-ratio)^(ε'/ε) on the punctured chart.

    C = 4 e^{40 ε' δ} 4^{ε'/ε}. Quadruples that would exceed the same bound with
    e^{-40 ε' δ} in place of e^{40 ε' δ} are counted as ``literal_violations``.
    The Bourdon metric is based at ``w`` (default: the chart base); the
    Hamenstädt metric uses the chart base as its Busemann reference point.
    """
    bchart = chart if w is None or str(w) == chart.base else chart.rebased(w)
    bour = bourdon_metric(bchart, epsilon)
    ham = hamenstadt_metric(chart, anchor, epsilon_prime)
    keep = [bour.labels.index(l) for l in ham.labels]
    d_b = bour.metric[np.ix_(keep, keep)]
    d_h = ham.metric
    q = epsilon_prime / epsilon
    const = 4.0 * math.exp(40.0 * epsilon_prime * chart.delta) * 4.0**q
    literal = 4.0 * math.exp(-40.0 * epsilon_prime * chart.delta) * 4.0**q
    quads, exhaustive = _quadruples(len(keep), max_exhaustive, n_samples, seed)
    t, ok1 = cross_ratios(d_b, quads)
    s, ok2 = cross_ratios(d_h, quads)
    ok = ok1 & ok2
    quads, t, s = quads[ok], t[ok], s[ok]
    tq = t**q
    if len(t) == 0:
        return Lemma3Report(True, 0.0, None, 0, 0, 0, exhaustive, const, literal, epsilon, epsilon_prime, chart.delta)
    slack = s / (const * tq)
    k = int(np.argmax(slack))
    viol = int(np.sum(s > const * tq * (1 + TAU_REL)))
    lit = int(np.sum(s > literal * tq * (1 + TAU_REL)))
    return Lemma3Report(
        passed=viol == 0,
        max_slack=float(slack[k]),
        witness=tuple(ham.labels[i] for i in quads[k]),
        violations=viol,
        literal_violations=lit,
        n_quadruples=int(len(t)),
        exhaustive=exhaustive,
        constant=const,
        literal_constant=literal,
        epsilon=epsilon,
        epsilon_prime=epsilon_prime,
        delta=chart.delta,
    )
