import math

import numpy as np
import pytest

from hypermet.domains.growth import (
    CONVERGES,
    DIVERGES,
    INCONCLUSIVE,
    PLAIN,
    SQRT,
    integral_condition,
    phi_inverse,
    psi_transfer,
)
from hypermet.domains.conditions import ParameterError
from hypermet.metric import InputError
from hypermet.phi import parse_phi

# analytic classification of each fixture, via the substitution s = phi^{-1}(t):
#   t, PLAIN          -> integral of 1/t                     diverges
#   t^2, PLAIN        -> integral of t^{-1/2}                diverges
#   e^t - 1, SQRT     -> integral of 1/sqrt(log(1+t))        diverges
#   t^3, SQRT         -> integral of t^{-1/6}                diverges
#   exp(t^{1/4})-1    -> integral of 1/log(1+t)^2            diverges
#   t^{1/2}, PLAIN    -> integral of t^{-2}                  converges
#   t^{1/4}, SQRT     -> integral of t^{-2}                  converges
FIXTURES = [
    ("t", PLAIN, DIVERGES),
    ("t^2", PLAIN, DIVERGES),
    ("exp(t)-1", SQRT, DIVERGES),
    ("t^3", SQRT, DIVERGES),
    ("exp(t^0.25)-1", SQRT, DIVERGES),
    ("t^0.5", PLAIN, CONVERGES),
    ("t^0.25", SQRT, CONVERGES),
]


@pytest.mark.parametrize("expr,variant,verdict", FIXTURES)
def test_integral_fixture(expr, variant, verdict):
    assert integral_condition(parse_phi(expr), variant).verdict == verdict


def test_convergent_tail_estimate():
    v = integral_condition(parse_phi("t^0.5"), PLAIN)
    # integral of t^{-2} over [1, inf) is 1
    assert v.partial_sum + v.tail_estimate == pytest.approx(1.0, rel=1e-9)


def test_inconclusive_with_huge_cap():
    v = integral_condition(parse_phi("t"), PLAIN, cap=1e6)
    assert v.verdict == INCONCLUSIVE
    assert v.partial_sum == pytest.approx(40 * math.log(2), rel=1e-9)


def test_non_monotone_phi_rejected():
    with pytest.raises(InputError):
        integral_condition(parse_phi("sqrt((t-3)^2)"), PLAIN)
    with pytest.raises(InputError):
        integral_condition(parse_phi("t"), "CUBE")


def test_phi_inverse():
    assert phi_inverse(parse_phi("t^2"), 9.0) == pytest.approx(3.0, rel=1e-12)
    assert phi_inverse(parse_phi("exp(t)-1"), math.e - 1) == pytest.approx(1.0, rel=1e-12)


def test_psi_spot_values():
    psi = psi_transfer(parse_phi("t"), c=1, c0=1, lam=0.5)
    assert psi(0.0) == 0.0
    assert psi(1.0) == 80 * (256 * 4 - 1) == 81840
    lam, c0 = 0.5, 1.0
    assert psi(lam / (6 * c0)) == lam / 2


def test_psi_small_piece_other_parameters():
    psi = psi_transfer(parse_phi("t^2"), c=2, c0=3, lam=0.3)
    assert psi(0.3 / 18) == pytest.approx(0.15, rel=1e-15)
    assert psi(1.0) == pytest.approx(80 * 2 * 3 * (256 * 4 - 1) ** 2)


def test_psi_jump_and_majorant():
    psi = psi_transfer(parse_phi("t"), 1, 1, 0.5)
    b = psi.breakpoint
    assert b == pytest.approx(1 / 6)
    assert psi(b) == pytest.approx(0.5)
    assert not psi.continuous
    assert psi.jump == pytest.approx(80 * (256 * (1 + b) ** 2 - 1) - 0.5)
    t = np.concatenate([np.linspace(0, 2, 2001), [b]])
    t.sort()
    m = psi.majorant(t)
    assert np.all(m >= psi(t) - 1e-9)
    assert np.all(np.diff(m) >= 0)
    eps = 1e-9
    assert abs(psi.majorant(b + eps) - psi.majorant(b - eps)) < 1e-3


def test_psi_pieces_are_nondecreasing():
    for expr in ("t", "t^2", "exp(t)-1", "sqrt(t)"):
        psi = psi_transfer(parse_phi(expr), 1.5, 2.0, 0.4)
        b = psi.breakpoint
        left = psi(np.linspace(0, b, 200))
        right = psi(np.linspace(b * (1 + 1e-12), 0.5, 200))
        assert np.all(np.diff(left) >= 0) and np.all(np.diff(right) >= 0)


def test_psi_parameter_checks():
    with pytest.raises(ParameterError):
        psi_transfer(parse_phi("t"), c=0.5)
    with pytest.raises(ParameterError):
        psi_transfer(parse_phi("t"), lam=0.75)
    with pytest.raises(InputError):
        psi_transfer(parse_phi("t"))(-1.0)
