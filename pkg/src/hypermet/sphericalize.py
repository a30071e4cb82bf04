"""Sphericalization of a finite metric space and chain metrization of quasimetrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import floyd_warshall

from .metric import (
    INFINITY_TOKEN,
    FiniteMetricSpace,
    InputError,
    QuasiMetricSpace,
)

# off-diagonal chain values at or below this are treated as collapsed
TAU_ABS = 1e-12


class DegenerateMetrization(ValueError):
    """Chain metrization collapsed two distinct points."""

    def __init__(self, pair, value):
        super().__init__(f"chain distance between {pair[0]!r} and {pair[1]!r} collapsed to {value:g}")
        self.pair = pair
        self.value = value

    def to_dict(self) -> dict:
        return {"reason": "degenerate metrization", "pair": list(self.pair), "value": self.value}


@dataclass(frozen=True, eq=False)
class SphericalizedSpace:
    quasi: QuasiMetricSpace
    metrized: FiniteMetricSpace
    base_label: str
    comparison_ratio: float

    def to_dict(self) -> dict:
        return {
            "base": self.base_label,
            "labels": list(self.quasi.labels),
            "quasi": self.quasi.dist.tolist(),
            "quasi_constant": self.quasi.quasi_constant,
            "metrized": self.metrized.dist.tolist(),
            "comparison_ratio": self.comparison_ratio,
            "diameter": self.metrized.diameter,
        }


def sphericalize_quasimetric(space: FiniteMetricSpace, a) -> QuasiMetricSpace:
    """The quasimetric d_a on X plus a point at infinity (appended last)."""
    ia = space.index(a)
    da = space.dist[ia]
    n = space.n
    q = np.zeros((n + 1, n + 1))
    q[:n, :n] = space.dist / np.outer(1.0 + da, 1.0 + da)
    q[:n, n] = q[n, :n] = 1.0 / (1.0 + da)
    return QuasiMetricSpace(labels=list(space.labels) + [INFINITY_TOKEN], dist=q)


def shortest_chains(dist: np.ndarray) -> np.ndarray:
    """All-pairs shortest walks on the complete graph weighted by ``dist``."""
    d = np.asarray(dist, dtype=float)
    if len(d) <= 1:
        return d.copy()
    # a dense input would drop entries below ~1e-8 as missing edges, so every
    # off-diagonal weight is passed explicitly
    n = len(d)
    i, j = np.nonzero(~np.eye(n, dtype=bool))
    graph = coo_matrix((d[i, j], (i, j)), shape=(n, n)).tocsr()
    return floyd_warshall(graph, directed=False)


def chain_metrize(quasi) -> FiniteMetricSpace:
    """Metrize a symmetric nonnegative matrix by infimum over finite chains.

    Accepts a :class:`QuasiMetricSpace` or a :class:`FiniteMetricSpace`.
    Raises :class:`DegenerateMetrization` if two distinct points end at
    chain distance <= ``TAU_ABS``.
    """
    d = shortest_chains(quasi.dist)
    n = len(d)
    off = d + np.diag(np.full(n, np.inf))
    if n > 1 and off.min() <= TAU_ABS:
        i, j = (int(v) for v in np.unravel_index(np.argmin(off), off.shape))
        i, j = min(i, j), max(i, j)
        raise DegenerateMetrization((quasi.labels[i], quasi.labels[j]), float(d[i, j]))
    return FiniteMetricSpace(labels=quasi.labels, dist=d)


def sphericalize(space: FiniteMetricSpace, a) -> SphericalizedSpace:
    quasi = sphericalize_quasimetric(space, a)
    metrized = chain_metrize(quasi)
    n = quasi.n
    mask = ~np.eye(n, dtype=bool)
    ratio = float(np.max(quasi.dist[mask] / metrized.dist[mask])) if n > 1 else 1.0
    return SphericalizedSpace(quasi, metrized, str(a), ratio)


def spherical_density(dist_to_a):
    """1 / (1 + t)^2; works elementwise on arrays."""
    t = np.asarray(dist_to_a, dtype=float)
    if np.any(t < 0):
        raise InputError("distance to the base point must be nonnegative")
    out = 1.0 / (1.0 + t) ** 2
    return float(out) if out.ndim == 0 else out


def spherical_curve_length(polyline, a, segments: int = 1) -> float:
    """Length of a polyline in the sphericalized metric based at the point ``a``.

    Each polyline edge is split into ``segments`` equal pieces and the density
    is evaluated at piece midpoints.
    """
    p = np.asarray(polyline, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    if len(p) < 2:
        raise InputError("a curve needs at least two vertices")
    if segments < 1:
        raise InputError("segments must be positive")
    a = np.atleast_1d(np.asarray(a, dtype=float))
    u = (np.arange(segments) + 0.5) / segments
    total = 0.0
    for p0, p1 in zip(p[:-1], p[1:]):
        step = np.linalg.norm(p1 - p0) / segments
        if step == 0:
            continue
        mids = p0 + u[:, None] * (p1 - p0)
        rho = spherical_density(np.linalg.norm(mids - a, axis=1))
        total += step * float(np.sum(rho))
    return total


def spherical_measure(space: FiniteMetricSpace, a, subset: Sequence) -> float:
    """Discrete spherical measure of ``subset`` relative to the base ``a``.

    Each z contributes w(z) / M(z)^2 where M(z) is the mass of the open ball
    around ``a`` of radius 1 + d(a, z).
    """
    if space.weights is None:
        raise InputError("spherical measure needs point weights")
    ia = space.index(a)
    da = space.dist[ia]
    total = 0.0
    for label in subset:
        if str(label) == INFINITY_TOKEN:
            continue
        z = space.index(label)
        mass = float(space.weights[da < 1.0 + da[z]].sum())
        total += float(space.weights[z]) / mass**2
    return total


def boundary_clearance(sph: SphericalizedSpace, boundary_labels: Sequence, include_infinity: bool = True):
    """Metrized distance from every point to a set of boundary proxies.

    The point at infinity counts as a boundary point unless excluded.
    Returns an array indexed like ``sph.metrized.labels``.
    """
    idx = [sph.metrized.index(l) for l in boundary_labels]
    if include_infinity:
        idx.append(sph.metrized.index(INFINITY_TOKEN))
    return sph.metrized.dist[:, idx].min(axis=1)
