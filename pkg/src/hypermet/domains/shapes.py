"""Euclidean domains as expression trees over a few primitives.

Every node evaluates a signed clearance: positive inside the domain, equal to
the exact boundary distance for the primitives and for intersections and
complements of them. Unions and punctures compose by max/min, which can only
underestimate the true clearance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..metric import InputError


def _pts(x) -> np.ndarray:
    return np.atleast_2d(np.asarray(x, dtype=float))


class Shape:
    kind = "SHAPE"

    def sdf(self, x) -> np.ndarray:
        raise NotImplementedError

    def project(self, x: np.ndarray) -> np.ndarray:
        """Nearest boundary point of this node for a single point ``x``."""
        raise NotImplementedError

    @property
    def bounded(self) -> bool:
        return False

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class HalfPlane(Shape):
    """{x : normal . x > offset}."""

    normal: tuple
    offset: float = 0.0
    kind = "HALF_PLANE"

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        norm = float(np.linalg.norm(n))
        if norm == 0:
            raise InputError("half-plane normal must be nonzero")
        object.__setattr__(self, "normal", tuple(n / norm))
        object.__setattr__(self, "offset", float(self.offset) / norm)

    def sdf(self, x):
        return _pts(x) @ np.asarray(self.normal) - self.offset

    def project(self, x):
        n = np.asarray(self.normal)
        return x - (x @ n - self.offset) * n

    def to_dict(self):
        return {"type": self.kind, "normal": list(self.normal), "offset": self.offset}


@dataclass(frozen=True)
class Strip(Shape):
    """{x : lo < x[axis] < hi}."""

    axis: int
    lo: float
    hi: float
    kind = "STRIP"

    def __post_init__(self):
        if not self.hi > self.lo:
            raise InputError("strip needs hi > lo")

    def sdf(self, x):
        c = _pts(x)[:, self.axis]
        return np.minimum(c - self.lo, self.hi - c)

    def project(self, x):
        p = np.array(x, dtype=float)
        c = p[self.axis]
        p[self.axis] = self.lo if c - self.lo <= self.hi - c else self.hi
        return p

    def to_dict(self):
        return {"type": self.kind, "axis": self.axis, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Disk(Shape):
    center: tuple
    r: float
    kind = "DISK"

    def __post_init__(self):
        if not self.r > 0:
            raise InputError("disk radius must be positive")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    def sdf(self, x):
        return self.r - np.linalg.norm(_pts(x) - np.asarray(self.center), axis=1)

    def project(self, x):
        c = np.asarray(self.center)
        v = np.asarray(x, dtype=float) - c
        nv = float(np.linalg.norm(v))
        if nv == 0:
            v, nv = np.eye(len(c))[0], 1.0
        return c + self.r * v / nv

    @property
    def bounded(self):
        return True

    def to_dict(self):
        return {"type": self.kind, "center": list(self.center), "r": self.r}


@dataclass(frozen=True)
class Box(Shape):
    lo: tuple
    hi: tuple
    kind = "BOX"

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or any(b <= a for a, b in zip(lo, hi)):
            raise InputError("box needs lo < hi in every coordinate")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def sdf(self, x):
        p = _pts(x)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        inner = np.minimum(p - lo, hi - p).min(axis=1)
        outside = np.linalg.norm(np.maximum(np.maximum(lo - p, p - hi), 0.0), axis=1)
        return np.where(inner > 0, inner, -outside)

    def project(self, x):
        p = np.array(x, dtype=float)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        if np.all((p > lo) & (p < hi)):
            gaps = np.concatenate([p - lo, hi - p])
            k = int(np.argmin(gaps))
            axis = k % len(p)
            p[axis] = lo[axis] if k < len(p) else hi[axis]
            return p
        return np.clip(p, lo, hi)

    @property
    def bounded(self):
        return True

    def to_dict(self):
        return {"type": self.kind, "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class Complement(Shape):
    child: Shape
    kind = "COMPLEMENT"

    def sdf(self, x):
        return -self.child.sdf(x)

    def project(self, x):
        return self.child.project(x)

    @property
    def bounded(self):
        return isinstance(self.child, Complement) and self.child.child.bounded

    def to_dict(self):
        return {"type": self.kind, "child": self.child.to_dict()}


@dataclass(frozen=True)
class Intersect(Shape):
    children: tuple
    kind = "INTERSECT"

    def sdf(self, x):
        return np.min([c.sdf(x) for c in self.children], axis=0)

    def project(self, x):
        vals = [float(c.sdf(x)[0]) for c in self.children]
        return self.children[int(np.argmin(vals))].project(x)

    @property
    def bounded(self):
        return any(c.bounded for c in self.children)

    def to_dict(self):
        return {"type": self.kind, "children": [c.to_dict() for c in self.children]}


@dataclass(frozen=True)
class Union(Shape):
    children: tuple
    kind = "UNION"

    def sdf(self, x):
        return np.max([c.sdf(x) for c in self.children], axis=0)

    def project(self, x):
        vals = [float(c.sdf(x)[0]) for c in self.children]
        return self.children[int(np.argmax(vals))].project(x)

    @property
    def bounded(self):
        return all(c.bounded for c in self.children)

    def to_dict(self):
        return {"type": self.kind, "children": [c.to_dict() for c in self.children]}


@dataclass(frozen=True)
class Puncture(Shape):
    """Remove a point from ``child`` (the whole ambient space when ``child`` is None)."""

    point: tuple
    child: Optional[Shape] = None
    kind = "PUNCTURE"

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(v) for v in self.point))

    def sdf(self, x):
        dp = np.linalg.norm(_pts(x) - np.asarray(self.point), axis=1)
        if self.child is None:
            return dp
        return np.minimum(self.child.sdf(x), dp)

    def project(self, x):
        dp = float(np.linalg.norm(np.asarray(x) - np.asarray(self.point)))
        if self.child is None or dp <= float(self.child.sdf(x)[0]):
            return np.asarray(self.point)
        return self.child.project(x)

    @property
    def bounded(self):
        return self.child is not None and self.child.bounded

    def to_dict(self):
        out = {"type": self.kind, "point": list(self.point)}
        if self.child is not None:
            out["child"] = self.child.to_dict()
        return out


@dataclass(frozen=True)
class DomainSpec:
    shape: Shape
    dimension: int = 2

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise InputError("dimension must be 2 or 3")

    def clearance(self, x) -> np.ndarray:
        """Signed distance to the boundary, positive inside."""
        p = _pts(x)
        if p.shape[1] != self.dimension:
            raise InputError(f"expected {self.dimension}-dimensional points")
        return self.shape.sdf(p)

    def distance_to_boundary(self, x) -> float:
        return float(self.clearance(x)[0])

    def contains(self, x) -> np.ndarray:
        return self.clearance(x) > 0

    def nearest_boundary_point(self, x) -> np.ndarray:
        return self.shape.project(np.asarray(x, dtype=float))

    @property
    def bounded(self) -> bool:
        return self.shape.bounded

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "shape": self.shape.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "DomainSpec":
        if "shape" not in data:
            raise InputError("domain spec needs a 'shape' entry")
        return cls(shape_from_dict(data["shape"]), int(data.get("dimension", 2)))


def shape_from_dict(d: dict) -> Shape:
    try:
        kind = str(d["type"]).upper()
        if kind == "HALF_PLANE":
            return HalfPlane(tuple(d["normal"]), float(d.get("offset", 0.0)))
        if kind == "STRIP":
            return Strip(int(d["axis"]), float(d["lo"]), float(d["hi"]))
        if kind == "DISK":
            return Disk(tuple(d["center"]), float(d["r"]))
        if kind == "BOX":
            return Box(tuple(d["lo"]), tuple(d["hi"]))
        if kind == "COMPLEMENT":
            return Complement(shape_from_dict(d["child"]))
        if kind in ("INTERSECT", "UNION"):
            kids = tuple(shape_from_dict(c) for c in d["children"])
            if not kids:
                raise InputError(f"{kind} needs at least one child")
            return Intersect(kids) if kind == "INTERSECT" else Union(kids)
        if kind == "PUNCTURE":
            child = d.get("child")
            return Puncture(tuple(d["point"]), None if child is None else shape_from_dict(child))
    except KeyError as exc:
        raise InputError(f"shape {d.get('type')!r} is missing field {exc}") from None
    raise InputError(f"unknown shape type {d.get('type')!r}")


def load_domain(path) -> DomainSpec:
    """Read a domain spec from JSON or TOML (chosen by file suffix)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise InputError(f"{path}: {exc}") from None
    else:
        import json

        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: {exc}") from None
    return DomainSpec.from_dict(data)


def half_plane(dimension: int = 2) -> DomainSpec:
    """Upper half-space x[-1] > 0."""
    return DomainSpec(HalfPlane(tuple(np.eye(dimension)[-1])), dimension)


def unit_strip(dimension: int = 2) -> DomainSpec:
    return DomainSpec(Strip(dimension - 1, 0.0, 1.0), dimension)


def disk(center: Sequence = (0.0, 0.0), r: float = 1.0) -> DomainSpec:
    return DomainSpec(Disk(tuple(center), r), len(center))


def punctured_space(point: Sequence = (0.0, 0.0)) -> DomainSpec:
    return DomainSpec(Puncture(tuple(point)), len(point))


def sphere_directions(dimension: int, n: int) -> np.ndarray:
    """Roughly uniform unit vectors: a circle in 2D, a Fibonacci lattice in 3D."""
    if dimension == 2:
        a = 2 * math.pi * (np.arange(n) + 0.5) / n
        return np.column_stack([np.cos(a), np.sin(a)])
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    phi = math.pi * (1 + 5**0.5) * k
    r = np.sqrt(1 - z * z)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
