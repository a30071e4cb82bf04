"""Control-function transfer and integral tests for growth functions phi."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from ..metric import InputError
from .conditions import ParameterError

PLAIN = "PLAIN"
SQRT = "SQRT"
CONVERGES = "CONVERGES"
DIVERGES = "DIVERGES"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class PsiTransfer:
    """psi(t) = 3 c0 t up to the breakpoint lam/(3 c0), then 80 c c0 phi(256 (1+t)^2 - 1).

    The two pieces need not agree at the breakpoint; ``jump`` is the right
    limit minus the left value there. ``majorant`` is a continuous
    nondecreasing function that dominates psi everywhere.
    """

    phi: Callable
    c: float
    c0: float
    lam: float

    @property
    def breakpoint(self) -> float:
        return self.lam / (3.0 * self.c0)

    def _small(self, t):
        return 3.0 * self.c0 * t

    def _large(self, t):
        with np.errstate(over="ignore"):
            return 80.0 * self.c * self.c0 * np.asarray(self.phi(256.0 * (1.0 + t) ** 2 - 1.0), dtype=float)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise InputError("psi is defined for t >= 0")
        # the breakpoint itself belongs to the linear piece
        out = np.where(t <= self.breakpoint, self._small(t), self._large(np.maximum(t, self.breakpoint)))
        return float(out) if out.ndim == 0 else out

    @property
    def left_value(self) -> float:
        return float(self._small(self.breakpoint))

    @property
    def right_limit(self) -> float:
        return float(self._large(self.breakpoint))

    @property
    def jump(self) -> float:
        return self.right_limit - self.left_value

    @property
    def continuous(self) -> bool:
        return math.isclose(self.left_value, self.right_limit, rel_tol=1e-12, abs_tol=1e-12)

    def majorant(self, t):
        t = np.asarray(t, dtype=float)
        b = self.breakpoint
        top = max(self.right_limit, self.left_value)
        lin = top * t / b
        out = np.where(t <= b, lin, np.maximum(self._large(np.maximum(t, b)), top))
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "c0": self.c0,
            "lambda": self.lam,
            "breakpoint": self.breakpoint,
            "left_value": self.left_value,
            "right_limit": self.right_limit,
            "jump": self.jump,
            "continuous": self.continuous,
        }


def psi_transfer(phi: Callable, c: float = 1.0, c0: float = 1.0, lam: float = 0.5) -> PsiTransfer:
    if c < 1 or c0 < 1:
        raise ParameterError("need c, c0 >= 1")
    if not 0 < lam <= 0.5:
        raise ParameterError("need 0 < lambda <= 1/2")
    return PsiTransfer(phi, float(c), float(c0), float(lam))


@dataclass
class IntegralVerdict:
    verdict: str
    variant: str
    partial_sum: float
    tail_estimate: float
    increments: list = field(default_factory=list)
    cap: float = 10.0

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "variant": self.variant,
            "partial_sum": self.partial_sum,
            "tail_estimate": self.tail_estimate,
            "increments": self.increments,
            "cap": self.cap,
        }


def _check_monotone(phi: Callable, upto: float = 2.0**40) -> None:
    s = np.concatenate([[0.0], np.geomspace(1e-6, upto, 400)])
    with np.errstate(all="ignore"):
        v = np.asarray(phi(s), dtype=float)
    v = v[np.isfinite(v)]
    if v.size < 2 or np.any(np.diff(v) < 0):
        raise InputError("phi is not nondecreasing on the sampled range")


def phi_inverse(phi: Callable, t: float) -> float:
    """Solve phi(s) = t for s >= 0 by bracketing and Brent's method."""
    lo, hi = 0.0, 1.0
    with np.errstate(all="ignore"):
        while float(phi(hi)) < t:
            lo, hi = hi, 2.0 * hi
            if hi > 1e300:
                raise InputError(f"phi never reaches {t}")
        return brentq(lambda s: float(phi(s)) - t, lo, hi, xtol=1e-14 * max(1.0, hi), rtol=1e-14, maxiter=500)


def integral_condition(
    phi: Callable,
    variant: str = PLAIN,
    cap: float = 10.0,
    max_doublings: int = 40,
    window: int = 5,
    decay: float = 1.5,
) -> IntegralVerdict:
    """Classify the integral of 1/phi^{-1}(t) (or 1/sqrt(phi^{-1}(t))) over [1, inf).

    The range is cut at T = 2, 4, ..., 2^max_doublings. The integral converges
    when the last ``window`` increments each shrink by at least ``decay``, and
    diverges when the partial sum passes ``cap`` without such decay.
    """
    variant = variant.upper()
    if variant not in (PLAIN, SQRT):
        raise InputError(f"unknown variant {variant!r}")
    _check_monotone(phi)

    def integrand(t):
        s = phi_inverse(phi, t)
        return 1.0 / (math.sqrt(s) if variant == SQRT else s)

    incs = []
    for k in range(max_doublings):
        val, _ = quad(integrand, 2.0**k, 2.0 ** (k + 1), limit=200)
        incs.append(float(val))
    total = float(sum(incs))
    tail = np.asarray(incs[-(window + 1):])
    ratios = tail[:-1] / np.where(tail[1:] > 0, tail[1:], np.inf)
    decaying = bool(np.all(ratios >= decay))
    if decaying:
        r = float(ratios.min())
        verdict, tail_est = CONVERGES, incs[-1] / (r - 1.0)
    elif total > cap:
        verdict, tail_est = DIVERGES, math.inf
    else:
        verdict, tail_est = INCONCLUSIVE, math.nan
    return IntegralVerdict(verdict, variant, total, float(tail_est), incs, cap)
