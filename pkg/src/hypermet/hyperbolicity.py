"""Gromov products, four-point hyperbolicity and Busemann-type products."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .metric import TAU_REL, FiniteMetricSpace, InputError


class ConfigurationError(ValueError):
    pass


class ConnectivityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GromovProductMatrix:
    base: str
    products: np.ndarray
    source: FiniteMetricSpace

    @property
    def labels(self) -> tuple:
        return self.source.labels

    def __call__(self, x, y) -> float:
        return float(self.products[self.source.index(x), self.source.index(y)])


@dataclass(frozen=True)
class HyperbolicityCertificate:
    delta: float
    witness: tuple  # (x, y, z, w) labels

    def to_dict(self) -> dict:
        return {"delta": self.delta, "witness": list(self.witness)}


@dataclass(frozen=True, eq=False)
class BusemannChart:
    """Products (x|y)_w - (a|x)_w - (a|y)_w for a finite anchor a standing in for a boundary point.

    These approximate the Busemann-based products only up to ``slack``
    (ten times the hyperbolicity constant of the source).
    """

    base: str
    anchor: str
    products_b: np.ndarray
    labels: tuple
    slack: Optional[float] = None


def _products(dist: np.ndarray, w: int) -> np.ndarray:
    dw = dist[w]
    return 0.5 * (dw[:, None] + dw[None, :] - dist)


def gromov_products(space: FiniteMetricSpace, w) -> GromovProductMatrix:
    iw = space.index(w)
    p = _products(space.dist, iw)
    p.setflags(write=False)
    return GromovProductMatrix(base=space.labels[iw], products=p, source=space)


def delta_four_point(space: FiniteMetricSpace, w=None) -> HyperbolicityCertificate:
    """Four-point hyperbolicity constant.

    With ``w`` given, the δ-inequality is checked at that base only (O(n^3));
    with ``w=None`` it is maximized over every base (O(n^4)). Ties between
    witnesses go to the lexicographically smallest label quadruple.
    """
    n = space.n
    labels = space.labels
    if n <= 3:
        base = labels[0] if w is None else labels[space.index(w)]
        return HyperbolicityCertificate(0.0, (labels[0],) * 3 + (base,))
    rank = np.empty(n, dtype=int)
    rank[np.argsort(np.array(labels, dtype=object))] = np.arange(n)
    bases = range(n) if w is None else [space.index(w)]
    best, key = -np.inf, None
    for b in bases:
        p = _products(space.dist, b)
        for z in range(n):
            gap = np.minimum(p[:, z, None], p[None, z, :]) - p
            m = float(gap.max())
            if m < best:
                continue
            xs, ys = np.nonzero(gap == m)
            j = np.lexsort((rank[ys], rank[xs]))[0]
            k = (int(rank[xs[j]]), int(rank[ys[j]]), int(rank[z]), int(rank[b]))
            if m > best or k < key:
                best, key = m, k
    order = np.argsort(rank)
    witness = tuple(labels[order[r]] for r in key)
    return HyperbolicityCertificate(max(best, 0.0), witness)


def reevaluate_delta(space: FiniteMetricSpace, witness: Sequence) -> float:
    x, y, z, w = (space.index(l) for l in witness)
    p = _products(space.dist, w)
    return float(min(p[x, z], p[z, y]) - p[x, y])


def busemann_products(products: GromovProductMatrix, anchor, delta: Optional[float] = None) -> BusemannChart:
    src = products.source
    ia = src.index(anchor)
    if src.labels[ia] == products.base:
        raise ConfigurationError("the anchor must differ from the base point")
    p = products.products
    pa = p[ia]
    pb = p - pa[:, None] - pa[None, :]
    pb.setflags(write=False)
    return BusemannChart(
        base=products.base,
        anchor=src.labels[ia],
        products_b=pb,
        labels=src.labels,
        slack=None if delta is None else 10.0 * delta,
    )


@dataclass(frozen=True)
class StarlikeReport:
    K: float
    witness: Optional[str]
    nearest: Optional[str]
    ray_points: tuple

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "witness": self.witness,
            "nearest_ray_point": self.nearest,
            "ray_points": list(self.ray_points),
        }


def geodesic_vertices(space: FiniteMetricSpace, src: int, dst: int, tol: float = TAU_REL) -> np.ndarray:
    """Indices of points lying on some shortest chain from ``src`` to ``dst``."""
    d = space.dist
    total = d[src, dst]
    return np.flatnonzero(d[src] + d[:, dst] <= total * (1.0 + tol) + tol)


def rough_starlike_constant(space: FiniteMetricSpace, w, ray_targets: Sequence) -> StarlikeReport:
    """Largest distance from a point to the union of geodesics from ``w`` to the targets.

    Geodesics are read off the metric: a point lies on one from w to t when
    d(w, v) + d(v, t) = d(w, t) within the relative tolerance, so the space
    should be a path metric (e.g. shortest paths of a graph).
    """
    if not ray_targets:
        raise InputError("need at least one ray target")
    iw = space.index(w)
    d = space.dist
    if not np.all(np.isfinite(d)):
        raise ConnectivityError("space has unreachable pairs")
    on_ray = np.zeros(space.n, dtype=bool)
    for t in ray_targets:
        on_ray[geodesic_vertices(space, iw, space.index(t))] = True
    ray_idx = np.flatnonzero(on_ray)
    gap = d[:, ray_idx].min(axis=1)
    x = int(np.argmax(gap))
    near = int(ray_idx[np.argmin(d[x, ray_idx])])
    return StarlikeReport(
        K=float(gap[x]),
        witness=space.labels[x],
        nearest=space.labels[near],
        ray_points=tuple(space.labels[i] for i in ray_idx),
    )
