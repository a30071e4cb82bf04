"""Finite metric and quasimetric spaces, cross-ratios and the unit-sphere inversion."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

INFINITY_TOKEN = "∞"

# relative tolerance for metric-axiom checks
TAU_REL = 1e-9


class InputError(ValueError):
    """Malformed input: wrong shape, negative or non-finite entries, bad labels."""


class UndefinedCrossRatio(ValueError):
    pass


class DomainError(ValueError):
    pass


def _as_matrix(dist) -> np.ndarray:
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InputError(f"distance matrix must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise InputError("distance matrix has non-finite entries")
    if np.any(d < 0):
        raise InputError("distance matrix has negative entries")
    return d


def _check_labels(labels: Sequence[str], n: int) -> tuple:
    labels = tuple(str(l) for l in labels)
    if len(labels) != n:
        raise InputError(f"{len(labels)} labels for a {n}x{n} matrix")
    if len(set(labels)) != n:
        raise InputError("labels must be unique")
    return labels


def _check_symmetric_positive(d: np.ndarray, tol: float) -> np.ndarray:
    scale = max(float(d.max(initial=0.0)), 1.0)
    if np.any(np.abs(d - d.T) > tol * scale):
        raise InputError("distance matrix is not symmetric")
    if np.any(np.diag(d) != 0):
        raise InputError("distance matrix has nonzero diagonal")
    off = d + np.eye(len(d))
    if np.any(off <= 0):
        i, j = np.argwhere(off <= 0)[0]
        raise InputError(f"zero distance between distinct points {i} and {j}")
    # store an exactly symmetric copy
    return 0.5 * (d + d.T)


def quasi_constant(dist: np.ndarray) -> tuple[float, Optional[tuple[int, int, int]]]:
    """Least K with d(x,z) <= K max(d(x,y), d(y,z)), and a triple attaining it.

    The returned triple ``(x, y, z)`` is the lexicographically smallest index
    triple among the maximizers; ``None`` for spaces with fewer than 3 points.
    """
    d = np.asarray(dist, dtype=float)
    n = len(d)
    if n < 3:
        return 1.0, None
    best, arg = -np.inf, None
    for y in range(n):
        den = np.maximum(d[:, y, None], d[None, y, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(den > 0, d / den, 0.0)
        ratio[y, :] = 0.0
        ratio[:, y] = 0.0
        np.fill_diagonal(ratio, 0.0)
        m = ratio.max()
        if m > best:
            x, z = np.unravel_index(np.argmax(ratio), ratio.shape)
            best, arg = float(m), (int(x), y, int(z))
        elif m == best and arg is not None:
            x, z = np.unravel_index(np.argmax(ratio), ratio.shape)
            arg = min(arg, (int(x), y, int(z)))
    return max(best, 1.0), arg


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Labeled finite point set with a symmetric distance matrix.

    Construction checks the cheap invariants (shape, symmetry, zero diagonal,
    distinct points). The O(n^3) triangle check lives in :func:`validate_metric`.
    """

    labels: tuple
    dist: np.ndarray
    coords: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        d = _as_matrix(self.dist)
        object.__setattr__(self, "labels", _check_labels(self.labels, len(d)))
        d = _check_symmetric_positive(d, TAU_REL)
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        if self.coords is not None:
            c = np.asarray(self.coords, dtype=float)
            if c.ndim == 1:
                c = c[:, None]
            if c.shape[0] != len(d):
                raise InputError("coords must have one row per point")
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (len(d),) or np.any(w < 0) or not np.all(np.isfinite(w)):
                raise InputError("weights must be a nonnegative n-vector")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise KeyError(f"unknown label {label!r}") from None

    def d(self, x, y) -> float:
        return float(self.dist[self.index(x), self.index(y)])

    @property
    def diameter(self) -> float:
        return float(self.dist.max(initial=0.0))

    def subspace(self, labels: Sequence[str]) -> "FiniteMetricSpace":
        idx = [self.index(l) for l in labels]
        return FiniteMetricSpace(
            labels=[self.labels[i] for i in idx],
            dist=self.dist[np.ix_(idx, idx)],
            coords=None if self.coords is None else self.coords[idx],
            weights=None if self.weights is None else self.weights[idx],
        )

    def scaled(self, s: float) -> "FiniteMetricSpace":
        return FiniteMetricSpace(self.labels, self.dist * s, self.coords, self.weights)

    def to_dict(self) -> dict:
        out = {"labels": list(self.labels), "dist": self.dist.tolist()}
        if self.coords is not None:
            out["coords"] = self.coords.tolist()
        if self.weights is not None:
            out["weights"] = self.weights.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FiniteMetricSpace":
        try:
            return cls(
                labels=data["labels"],
                dist=data["dist"],
                coords=data.get("coords"),
                weights=data.get("weights"),
            )
        except KeyError as exc:
            raise InputError(f"space is missing field {exc}") from None

    @classmethod
    def from_coords(cls, coords, labels=None, weights=None) -> "FiniteMetricSpace":
        c = np.asarray(coords, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        diff = c[:, None, :] - c[None, :, :]
        d = np.sqrt(np.sum(diff * diff, axis=-1))
        if labels is None:
            labels = [f"p{i}" for i in range(len(c))]
        return cls(labels=labels, dist=d, coords=c, weights=weights)


@dataclass(frozen=True, eq=False)
class QuasiMetricSpace:
    labels: tuple
    dist: np.ndarray
    quasi_constant: float = field(init=False)

    def __post_init__(self):
        d = _as_matrix(self.dist)
        object.__setattr__(self, "labels", _check_labels(self.labels, len(d)))
        d = _check_symmetric_positive(d, TAU_REL)
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "quasi_constant", quasi_constant(d)[0])

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise KeyError(f"unknown label {label!r}") from None

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "dist": self.dist.tolist(),
            "quasi_constant": self.quasi_constant,
        }


@dataclass(frozen=True)
class PointedSpace:
    space: FiniteMetricSpace
    base: int

    def __post_init__(self):
        if not 0 <= self.base < self.space.n:
            raise InputError(f"base index {self.base} out of range")

    @property
    def base_label(self) -> str:
        return self.space.labels[self.base]


@dataclass(frozen=True)
class MetricViolation:
    """Why a matrix failed to be a metric.

    ``worst_triple`` is ``(x, y, z)`` maximizing d(x,z) / (d(x,y) + d(y,z)).
    """

    reason: str
    quasi_constant: float
    worst_triple: Optional[tuple] = None
    triangle_ratio: Optional[float] = None
    max_asymmetry: float = 0.0

    def to_dict(self) -> dict:
        return {
            "reason": self.reason,
            "quasi_constant": self.quasi_constant,
            "worst_triple": None if self.worst_triple is None else list(self.worst_triple),
            "triangle_ratio": self.triangle_ratio,
            "max_asymmetry": self.max_asymmetry,
        }


def _worst_triangle(d: np.ndarray) -> tuple[float, Optional[tuple[int, int, int]]]:
    n = len(d)
    if n < 3:
        return 0.0, None
    best, arg = -np.inf, None
    for y in range(n):
        den = d[:, y, None] + d[None, y, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(den > 0, d / den, 0.0)
        ratio[y, :] = 0.0
        ratio[:, y] = 0.0
        m = ratio.max()
        cand = tuple(int(v) for v in np.argwhere(ratio == m)[0])
        t = (cand[0], y, cand[1])
        if m > best or (m == best and t < arg):
            best, arg = float(m), t
    return best, arg


def validate_metric(matrix, labels=None, tol: float = TAU_REL):
    """Return a :class:`FiniteMetricSpace` or a :class:`MetricViolation`.

    Raises :class:`InputError` only for non-square, non-finite or negative
    input; every axiom failure is reported, not raised.
    """
    d = _as_matrix(matrix)
    n = len(d)
    if labels is None:
        labels = [f"p{i}" for i in range(n)]
    labels = _check_labels(labels, n)
    scale = max(float(d.max(initial=0.0)), 1.0)
    asym = float(np.abs(d - d.T).max(initial=0.0))
    K, _ = quasi_constant(0.5 * (d + d.T))
    if asym > tol * scale:
        return MetricViolation("asymmetric", K, max_asymmetry=asym)
    if np.any(np.diag(d) != 0):
        return MetricViolation("nonzero diagonal", K, max_asymmetry=asym)
    if n > 1 and np.any(d + np.eye(n) <= 0):
        i, j = np.argwhere(d + np.eye(n) <= 0)[0]
        return MetricViolation(
            "zero distance between distinct points", K,
            worst_triple=(labels[i], labels[j]), max_asymmetry=asym,
        )
    d = 0.5 * (d + d.T)
    ratio, triple = _worst_triangle(d)
    if triple is not None and ratio > 1 + tol:
        return MetricViolation(
            "triangle inequality", K,
            worst_triple=tuple(labels[i] for i in triple),
            triangle_ratio=ratio, max_asymmetry=asym,
        )
    return FiniteMetricSpace(labels=labels, dist=d)


def cross_ratio(space: FiniteMetricSpace, x, y, z, w) -> float:
    """r(x,y,z,w) = d(x,z) d(y,w) / (d(x,y) d(z,w)).

    One of the four points may be :data:`INFINITY_TOKEN`; the two distances
    involving it cancel.
    """
    pts = [str(p) for p in (x, y, z, w)]
    if len(set(pts)) != 4:
        raise UndefinedCrossRatio(f"points must be distinct: {pts}")
    if pts.count(INFINITY_TOKEN) > 1:
        raise UndefinedCrossRatio("at most one point may be at infinity")

    def dd(p, q):
        if INFINITY_TOKEN in (p, q):
            return None
        return space.d(p, q)

    a, b, c, e = pts
    num = [dd(a, c), dd(b, e)]
    den = [dd(a, b), dd(c, e)]
    num = [v for v in num if v is not None]
    den = [v for v in den if v is not None]
    dprod = float(np.prod(den))
    if dprod == 0:
        raise UndefinedCrossRatio("zero denominator")
    return float(np.prod(num)) / dprod


def invert_cloud(coords) -> np.ndarray:
    """Reflect each row through the unit sphere, x -> x/|x|^2."""
    c = np.asarray(coords, dtype=float)
    if c.ndim == 1:
        c = c[:, None]
    sq = np.sum(c * c, axis=1)
    if np.any(sq == 0):
        raise DomainError("inversion is undefined at the origin")
    return c / sq[:, None]


def chordal_distance(x, y) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    diff = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=-1)
    nx = 1.0 + np.sum(x * x, axis=1)
    ny = 1.0 + np.sum(y * y, axis=1)
    return 2.0 * diff / np.sqrt(nx[:, None] * ny[None, :])


def chordal_space(coords, labels=None) -> FiniteMetricSpace:
    """Chordal metric 2|x-y| / sqrt((1+|x|^2)(1+|y|^2)) on a Euclidean cloud."""
    c = np.asarray(coords, dtype=float)
    if c.ndim == 1:
        c = c[:, None]
    if not np.all(np.isfinite(c)):
        raise InputError("coordinates must be finite")
    d = chordal_distance(c, c)
    np.fill_diagonal(d, 0.0)
    if labels is None:
        labels = [f"p{i}" for i in range(len(c))]
    return FiniteMetricSpace(labels=labels, dist=d, coords=c)
