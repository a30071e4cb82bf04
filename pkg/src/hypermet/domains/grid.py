"""Grid discretization of a domain and discrete quasihyperbolic geodesics."""

from __future__ import annotations

import itertools
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from ..hyperbolicity import ConnectivityError
from ..metric import DomainError, FiniteMetricSpace, InputError
from .shapes import DomainSpec

QH = "qh"
EUCL = "eucl"


class ResolutionError(ValueError):
    pass


class SnapError(ValueError):
    pass


def parse_window(window, dimension: int) -> tuple[np.ndarray, np.ndarray]:
    """Window as ``(lo, hi)`` arrays; also accepts a flat ``lo..., hi...`` sequence."""
    if isinstance(window, str):
        window = [float(v) for v in window.split(",")]
    if len(window) == 2 and np.ndim(window[0]) == 1:
        lo, hi = (np.asarray(w, dtype=float) for w in window)
    else:
        flat = np.asarray(window, dtype=float).ravel()
        if flat.size != 2 * dimension:
            raise InputError(f"window needs {2 * dimension} numbers")
        lo, hi = flat[:dimension], flat[dimension:]
    if lo.shape != (dimension,) or np.any(hi <= lo):
        raise InputError("window needs lo < hi in every coordinate")
    return lo, hi


def stencil(dimension: int) -> np.ndarray:
    """Half of the 8/26-neighbor offsets (the lexicographically positive ones)."""
    offs = [o for o in itertools.product((-1, 0, 1), repeat=dimension) if any(o)]
    return np.array([o for o in offs if o > (0,) * dimension])


@dataclass(eq=False)
class QhGraph:
    spec: DomainSpec
    h: float
    coords: np.ndarray
    clearance: np.ndarray
    lattice: np.ndarray
    weights: dict
    _tree: Optional[cKDTree] = field(default=None, repr=False)
    _cache: OrderedDict = field(default_factory=OrderedDict, repr=False)

    @property
    def n(self) -> int:
        return len(self.coords)

    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.coords)
        return self._tree

    def snap(self, x) -> tuple[int, float]:
        """Nearest node to ``x`` and the snap distance; at most h away."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.spec.dimension,):
            raise InputError(f"expected a {self.spec.dimension}-dimensional point")
        dist, i = self.tree().query(x)
        if dist > self.h * (1 + 1e-9):
            raise SnapError(f"point {x.tolist()} is {dist:.3g} from the nearest node (h={self.h})")
        return int(i), float(dist)

    def sssp(self, kind: str, src: int) -> tuple[np.ndarray, np.ndarray]:
        """Single-source distances and predecessors under ``kind`` weights (cached)."""
        key = (kind, src)
        if key in self._cache:
            self._cache.move_to_end(key)
            return self._cache[key]
        dist, pred = dijkstra(self.weights[kind], directed=False, indices=src, return_predecessors=True)
        self._cache[key] = (dist, pred)
        while len(self._cache) > 32:
            self._cache.popitem(last=False)
        return dist, pred

    def path(self, kind: str, src: int, dst: int) -> tuple[float, np.ndarray]:
        dist, pred = self.sssp(kind, src)
        if not np.isfinite(dist[dst]):
            raise ConnectivityError(f"nodes {src} and {dst} are not connected in the grid")
        nodes = [dst]
        while nodes[-1] != src:
            nodes.append(int(pred[nodes[-1]]))
        return float(dist[dst]), np.array(nodes[::-1])

    def eucl_length(self, nodes: np.ndarray) -> float:
        p = self.coords[nodes]
        return float(np.linalg.norm(np.diff(p, axis=0), axis=1).sum())

    def qh_length(self, nodes: np.ndarray) -> float:
        p = self.coords[nodes]
        c = self.clearance[nodes]
        step = np.linalg.norm(np.diff(p, axis=0), axis=1)
        return float(np.sum(step * 2.0 / (c[:-1] + c[1:])))


def discretize(spec: DomainSpec, h: float, window) -> QhGraph:
    """Nodes are points of the lattice hZ^d inside ``window`` with clearance > h."""
    if not h > 0:
        raise InputError("grid spacing must be positive")
    dim = spec.dimension
    lo, hi = parse_window(window, dim)
    ilo = np.ceil(lo / h - 1e-9).astype(int)
    ihi = np.floor(hi / h + 1e-9).astype(int)
    axes = [np.arange(a, b + 1) for a, b in zip(ilo, ihi)]
    if any(len(a) == 0 for a in axes):
        raise ResolutionError("window contains no lattice points; use a smaller h")
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    shape = mesh.shape[:-1]
    lat = mesh.reshape(-1, dim)
    pts = lat * h
    clr = spec.clearance(pts)
    valid = clr > h
    if not valid.any():
        raise ResolutionError(f"no grid node has clearance above h={h}; use a smaller h")
    index = np.full(len(lat), -1)
    index[valid] = np.arange(int(valid.sum()))
    index = index.reshape(shape)
    rows, cols, lens = [], [], []
    for off in stencil(dim):
        src = tuple(slice(max(0, -o), s - max(0, o)) for o, s in zip(off, shape))
        dst = tuple(slice(max(0, o), s - max(0, -o)) for o, s in zip(off, shape))
        a, b = index[src].ravel(), index[dst].ravel()
        ok = (a >= 0) & (b >= 0)
        rows.append(a[ok])
        cols.append(b[ok])
        lens.append(np.full(int(ok.sum()), h * math.sqrt(float(np.dot(off, off)))))
    rows, cols, lens = (np.concatenate(v) for v in (rows, cols, lens))
    n = int(valid.sum())
    c = clr[valid]
    qh = lens * 2.0 / (c[rows] + c[cols])
    weights = {
        EUCL: _sym(rows, cols, lens, n),
        QH: _sym(rows, cols, qh, n),
    }
    return QhGraph(spec, float(h), pts[valid], c, lat[valid], weights)


def _sym(rows, cols, vals, n) -> csr_matrix:
    return coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


@dataclass(frozen=True)
class GeodesicResult:
    value: float
    path: np.ndarray
    snap: tuple

    @property
    def endpoints(self) -> tuple[int, int]:
        return int(self.path[0]), int(self.path[-1])


def _geodesic(graph: QhGraph, kind: str, x, y) -> GeodesicResult:
    i, si = graph.snap(x)
    j, sj = graph.snap(y)
    if i == j:
        return GeodesicResult(0.0, np.array([i]), (si, sj))
    value, nodes = graph.path(kind, i, j)
    return GeodesicResult(value, nodes, (si, sj))


def qh_distance(graph: QhGraph, x, y) -> GeodesicResult:
    """Discrete quasihyperbolic distance and geodesic between snapped endpoints."""
    return _geodesic(graph, QH, x, y)


def euclidean_geodesic(graph: QhGraph, x, y) -> GeodesicResult:
    """Shortest grid path in Euclidean length between snapped endpoints."""
    return _geodesic(graph, EUCL, x, y)


def j_metric(spec: DomainSpec, x, y) -> float:
    """log(1 + |x - y| / min(d(x), d(y))) with exact boundary distances."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx, dy = spec.clearance(np.vstack([x, y]))
    if dx <= 0 or dy <= 0:
        raise DomainError("j is defined for interior points only")
    return math.log1p(float(np.linalg.norm(x - y)) / min(dx, dy))


def qh_space(graph: QhGraph, nodes: Optional[Sequence[int]] = None) -> FiniteMetricSpace:
    """Discrete quasihyperbolic metric among ``nodes`` (default: every node) as a finite space."""
    idx = np.arange(graph.n) if nodes is None else np.asarray(nodes, dtype=int)
    d = dijkstra(graph.weights[QH], directed=False, indices=idx)[:, idx]
    if not np.all(np.isfinite(d)):
        raise ConnectivityError("selected nodes are not mutually connected")
    d = 0.5 * (d + d.T)
    labels = [f"n{i}" for i in idx]
    return FiniteMetricSpace(labels, d, coords=graph.coords[idx])
