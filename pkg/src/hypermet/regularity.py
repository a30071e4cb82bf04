"""Doubling and Ahlfors-regularity estimates for finite (weighted) metric spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .metric import FiniteMetricSpace, InputError


class DegenerateFit(ValueError):
    pass


@dataclass(frozen=True)
class Cover:
    count: int
    centers: tuple

    def __int__(self):
        return self.count


def covering_number(space: FiniteMetricSpace, center, R: float, r: float) -> Cover:
    """Greedy cover of the open ball B(center, R) by open r-balls centered at space points.

    The count is an upper bound on the optimal cover size.
    """
    if not R > r > 0:
        raise InputError("need R > r > 0")
    d = space.dist
    c = space.index(center)
    todo = d[c] < R
    reach = d < r  # reach[i, j]: center i covers point j
    chosen = []
    while todo.any():
        gain = reach[:, todo].sum(axis=1)
        i = int(np.argmax(gain))
        chosen.append(i)
        todo &= ~reach[i]
    return Cover(len(chosen), tuple(space.labels[i] for i in chosen))


def dyadic_scales(space: FiniteMetricSpace, n_scales: int = 12) -> np.ndarray:
    """R = diam / 2^k for k < n_scales, keeping R >= the smallest positive distance."""
    if space.n < 2:
        return np.array([1.0])
    pos = space.dist[space.dist > 0]
    diam, dmin = float(pos.max()), float(pos.min())
    scales = diam / 2.0 ** np.arange(n_scales)
    return scales[scales >= dmin]


@dataclass(frozen=True)
class RegularityReport:
    doubling_C: Optional[int] = None
    witness: Optional[dict] = None
    ahlfors_C: Optional[float] = None
    ahlfors_Q: Optional[float] = None
    intercept: Optional[float] = None
    residual: Optional[float] = None
    samples: tuple = ()

    def to_dict(self) -> dict:
        return {
            "doubling_C": self.doubling_C,
            "witness": self.witness,
            "ahlfors": None if self.ahlfors_Q is None else {
                "C": self.ahlfors_C, "Q": self.ahlfors_Q, "intercept": self.intercept, "residual": self.residual,
            },
            "samples": [list(s) for s in self.samples],
        }


def _sample_grid(space, scales, sample_size, seed):
    grid = [(x, float(R)) for x in range(space.n) for R in scales]
    if sample_size >= len(grid):
        return grid
    rng = np.random.default_rng(seed)
    pick = np.sort(rng.choice(len(grid), size=sample_size, replace=False))
    return [grid[i] for i in pick]


def doubling_constant(space: FiniteMetricSpace, sample_size: int = 10_000, n_scales: int = 12, seed: int = 0) -> RegularityReport:
    """Largest greedy half-radius cover count over a seeded sample of balls."""
    if sample_size < 1:
        raise InputError("sample_size must be at least 1")
    if space.n == 1:
        label = space.labels[0]
        return RegularityReport(1, {"center": label, "R": 1.0, "centers": [label]}, samples=((label, 1.0),))
    grid = _sample_grid(space, dyadic_scales(space, n_scales), sample_size, seed)
    best, wit = 0, None
    for x, R in grid:
        cov = covering_number(space, space.labels[x], R, R / 2)
        if cov.count > best:
            best = cov.count
            wit = {"center": space.labels[x], "R": R, "centers": list(cov.centers)}
    return RegularityReport(best, wit, samples=tuple((space.labels[x], R) for x, R in grid))


def ball_masses(space: FiniteMetricSpace, scales) -> np.ndarray:
    """mu(B(x, R)) for every point x (rows) and radius R (columns)."""
    if space.weights is None:
        raise InputError("ball masses need point weights")
    w = space.weights
    return np.stack([(space.dist < R) @ w for R in scales], axis=1)


def ahlfors_fit(space: FiniteMetricSpace, n_scales: int = 12, sample_size: Optional[int] = None, seed: int = 0) -> RegularityReport:
    """Fit log mu(B(x,R)) = Q log R + b by least squares.

    Radii run over dyadic scales from a quarter of the diameter down to twice
    the smallest positive distance; larger balls saturate and smaller ones see
    single atoms. C = exp(max |residual|).
    """
    if space.weights is None:
        raise InputError("Ahlfors fit needs point weights")
    if space.n < 2:
        raise DegenerateFit("need at least two points")
    pos = space.dist[space.dist > 0]
    diam, dmin = float(pos.max()), float(pos.min())
    hi, lo = diam / 4.0, 2.0 * dmin
    if hi <= lo:
        raise DegenerateFit("fewer than two usable scales")
    k = int(math.floor(math.log2(hi / lo)))
    scales = hi / 2.0 ** np.arange(min(k, n_scales - 1) + 1)
    if len(scales) < 2:
        raise DegenerateFit("fewer than two usable scales")
    grid = _sample_grid(space, scales, sample_size or space.n * len(scales), seed)
    xs = np.array([x for x, _ in grid])
    Rs = np.array([R for _, R in grid])
    masses = ball_masses(space, scales)
    col = {float(R): j for j, R in enumerate(scales)}
    mu = masses[xs, [col[R] for R in Rs]]
    good = mu > 0
    # radii relative to the top scale are exact powers of two, so the slope
    # does not depend on the units of the distances
    lr, lm = np.log(Rs[good] / hi), np.log(mu[good])
    if np.unique(lr).size < 2 or np.ptp(lm) == 0:
        raise DegenerateFit("ball masses do not vary with the radius")
    A = np.column_stack([lr - lr.mean(), np.ones_like(lr)])
    (Q, b), *_ = np.linalg.lstsq(A, lm, rcond=None)
    b = b - Q * lr.mean()
    res = lm - (Q * lr + b)
    b = b - Q * math.log(hi)
    return RegularityReport(
        ahlfors_C=float(math.exp(np.abs(res).max())),
        ahlfors_Q=float(Q),
        intercept=float(b),
        residual=float(np.sqrt(np.mean(res**2))),
        samples=tuple((space.labels[x], R) for x, R in grid),
    )
