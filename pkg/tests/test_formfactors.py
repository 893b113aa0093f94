"""Universal constants, form-factor branches, and the quadratic functional."""

import math
from fractions import Fraction

import numpy as np
import pytest

from heatkern import formfactors as ff
from heatkern.errors import ValidationError


# ---------------------------------------------------------------------------
# universal constants
# ---------------------------------------------------------------------------

def closed_f(i, k):
    k = Fraction(k)
    return {
        1: Fraction(1),
        2: 1 / (2 * (2 * k - 1)),
        3: (k - 1) / (2 * (2 * k - 1)),
        4: 1 / (2 * (4 * k * k - 1)),
        5: (k * k - k - 1) / (4 * (4 * k * k - 1)),
    }[i]


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("k", range(2, 9))
def test_f_universal_closed_forms(i, k):
    got = ff.f_universal(i, k)
    assert isinstance(got, Fraction)
    assert got == closed_f(i, k)


def test_f_universal_row_k2():
    row = [ff.f_universal(i, 2) for i in (1, 2, 3, 4, 5)]
    assert row == [Fraction(1), Fraction(1, 6), Fraction(1, 6),
                   Fraction(1, 30), Fraction(1, 60)]


def test_f_universal_validation():
    with pytest.raises(ValidationError):
        ff.f_universal(6, 2)
    with pytest.raises(ValidationError):
        ff.f_universal(1, 1)


def test_profile_spot_values():
    assert ff.f_profile(1, 0.37) == 1.0
    assert abs(ff.f_profile(2, 1.0) - 0.5) < 1e-15
    assert abs(ff.f_profile(3, 0.0) - 0.25) < 1e-15
    assert abs(ff.f_profile(4, 1.0) - 1.0 / 6.0) < 1e-15
    assert abs(ff.f_profile(5, 1.0) + 1.0 / 12.0) < 1e-15


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
def test_profile_integral_is_f2(i):
    # integral over [0, 1] of the profile equals the k = 2 universal constant
    xs, ws = np.polynomial.legendre.leggauss(40)
    xs = 0.5 * (xs + 1.0)
    val = 0.5 * sum(w * ff.f_profile(i, x) for x, w in zip(xs, ws))
    assert abs(val - float(ff.f_universal(i, 2))) < 1e-14


# ---------------------------------------------------------------------------
# gamma factors
# ---------------------------------------------------------------------------

def exact_moment(j, n):
    """int_0^1 xi^{2j} (1 - xi^2)^n dxi as a Fraction."""
    num = Fraction(math.factorial(n) * 2 ** n)
    den = Fraction(1)
    for i in range(n + 1):
        den *= 2 * j + 2 * i + 1
    return num / den


def gamma_series_oracle(i, z, nmax):
    """Truncated exact-rational series for gamma^(i)(z), built independently."""
    poly = {1: {0: Fraction(1)},
            2: {1: Fraction(1, 2)},
            3: {0: Fraction(1, 4), 1: Fraction(-1, 4)},
            4: {2: Fraction(1, 6)},
            5: {0: Fraction(3, 48), 1: Fraction(-6, 48), 2: Fraction(-1, 48)}}[i]
    total = 0.0
    for n in range(nmax + 1):
        mom = sum(c * exact_moment(j, n) for j, c in poly.items())
        total += (-z / 4.0) ** n / math.factorial(n) * float(mom)
    return total


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
def test_gamma_at_zero_is_f2(i):
    assert abs(ff.gamma_factor(i, 0.0) - float(ff.f_universal(i, 2))) < 1e-12


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
def test_gamma_quadrature_vs_series_oracle_at_z4(i):
    # z = 4 exercises the quadrature branch; the oracle is a 40-term exact
    # rational Taylor sum evaluated in floating point only at the end
    assert abs(ff.gamma_factor(i, 4.0) - gamma_series_oracle(i, 4.0, 40)) < 1e-12


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("z", [1.0, 2.5, 5.0, 10.0])
def test_gamma_branch_agreement(i, z):
    assert abs(ff.gamma_factor(i, z) - ff._gamma_series(i, z)) < 1e-10


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
def test_gamma_branch_continuity(i):
    lo = ff.gamma_factor(i, 1.0 - 1e-9)
    hi = ff.gamma_factor(i, 1.0 + 1e-9)
    assert abs(hi - lo) < 1e-9


def test_gamma_one_positive_decreasing():
    zs = np.linspace(0.0, 50.0, 26)
    vals = [ff.gamma_factor(1, z) for z in zs]
    assert all(v > 0 for v in vals)
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_gamma_negative_argument_uses_series():
    # entire function: negative z grows smoothly, no branch issues
    v = ff.gamma_factor(1, -2.0)
    assert abs(v - gamma_series_oracle(1, -2.0, 60)) < 1e-12


def test_gamma_family_validation():
    with pytest.raises(ValidationError):
        ff.gamma_factor(0, 1.0)


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
def test_gamma_resummation_from_universal_constants(i):
    # gamma^(i)(z) = sum_{k>=2} (-1)^k z^{k-2} (k-2)!/(2k-3)! f^(i)_k
    z = 0.4
    total = 0.0
    for k in range(2, 40):
        total += ((-1.0) ** k * z ** (k - 2)
                  * math.factorial(k - 2) / math.factorial(2 * k - 3)
                  * float(ff.f_universal(i, k)))
    assert abs(ff.gamma_factor(i, z) - total) < 1e-13


# ---------------------------------------------------------------------------
# backgrounds
# ---------------------------------------------------------------------------

def test_circle_cosine_layout():
    bg = ff.FourierBackground.circle_cosine(2 * math.pi, 3, 0.1)
    assert bg.volume == pytest.approx(2 * math.pi)
    assert set(bg.potential_modes) == {(3,), (-3,)}
    assert bg.potential_modes[(3,)][0, 0] == pytest.approx(0.05)
    assert np.allclose(bg.wavevector((3,)), [3.0])


def test_background_hermiticity_enforced():
    with pytest.raises(ValidationError):
        ff.FourierBackground(m=1, periods=(1.0,), potential_modes={(1,): 1.0})
    with pytest.raises(ValidationError):
        ff.FourierBackground(m=1, periods=(1.0,),
                             potential_modes={(1,): 1j, (-1,): 1j})


def test_background_curvature_constraints():
    m, d = 2, 1
    b = np.zeros((m, m, d, d), dtype=complex)
    b[0, 1], b[1, 0] = 0.3, -0.3
    good = {(1, 0): b, (-1, 0): -np.conj(b.transpose(0, 1, 3, 2))}
    ff.FourierBackground(m=m, periods=(1.0, 1.0), curvature_modes=good)

    bad_pair = {(1, 0): b, (-1, 0): np.conj(b.transpose(0, 1, 3, 2))}
    with pytest.raises(ValidationError):
        ff.FourierBackground(m=m, periods=(1.0, 1.0), curvature_modes=bad_pair)

    sym = np.zeros((m, m, d, d), dtype=complex)
    sym[0, 1] = sym[1, 0] = 1.0
    with pytest.raises(ValidationError):
        ff.FourierBackground(m=m, periods=(1.0, 1.0),
                             curvature_modes={(1, 0): sym, (-1, 0): -sym})


def test_background_rejects_zero_mode_curvature():
    m, d = 2, 1
    b = np.zeros((m, m, d, d), dtype=complex)
    b[0, 1], b[1, 0] = 1j, -1j
    with pytest.raises(ValidationError, match="zero-mode"):
        ff.FourierBackground(m=m, periods=(1.0, 1.0), curvature_modes={(0, 0): b})


# ---------------------------------------------------------------------------
# the quadratic functional
# ---------------------------------------------------------------------------

def test_h_functional_circle_closed_form():
    q, L = 0.01, 2 * math.pi
    bg = ff.FourierBackground.circle_cosine(L, 3, q)
    pref = (4 * math.pi) ** -0.5 * math.pi * q * q / 2.0
    for t in (0.05, 0.2, 0.5):
        want = pref * ff.gamma_factor(1, 9.0 * t)
        assert abs(ff.h_functional(bg, t) - want) < 1e-15 + 1e-12 * abs(want)


def test_h_functional_constant_potential():
    # zero mode: gamma^(1)(0) = 1, so H = (4 pi)^{-1/2} (vol/2) q^2
    q, L = 0.3, 5.0
    bg = ff.FourierBackground(m=1, periods=(L,), potential_modes={(0,): q})
    want = (4 * math.pi) ** -0.5 * L / 2.0 * q * q
    assert abs(ff.h_functional(bg, 0.7) - want) < 1e-14


def test_h_functional_quadratic_scaling():
    bg1 = ff.FourierBackground.circle_cosine(2 * math.pi, 2, 0.1)
    bg3 = ff.FourierBackground.circle_cosine(2 * math.pi, 2, 0.3)
    t = 0.11
    assert abs(ff.h_functional(bg3, t) - 9.0 * ff.h_functional(bg1, t)) < 1e-15


def torus_curvature_background(c=0.25):
    m, d = 2, 1
    b = np.zeros((m, m, d, d), dtype=complex)
    b[0, 1], b[1, 0] = c, -c
    modes = {(1, 0): b, (-1, 0): -np.conj(b.transpose(0, 1, 3, 2))}
    return ff.FourierBackground(m=m, periods=(2 * math.pi, 2 * math.pi),
                                curvature_modes=modes), c


def test_h_functional_curvature_channel():
    # modes +-(1, 0) with |k|^2 = 1: each contributes 2 gamma2 tr(Rhat(-k)
    # Rhat(k)) = -2 gamma2 c^2 through the transverse contraction, so
    # H = (4 pi)^{-1} (vol/2) (-4 c^2) gamma^(2)(t)
    bg, c = torus_curvature_background()
    t = 0.3
    want = ((4 * math.pi) ** -1.0 * bg.volume / 2.0
            * (-4.0 * c * c) * ff.gamma_factor(2, t))
    got = ff.h_functional(bg, t)
    assert got < 0.0
    assert abs(got - want) < 1e-14 * abs(want)


def test_h_functional_validation():
    bg = ff.FourierBackground.circle_cosine(1.0, 1, 0.1)
    with pytest.raises(ValidationError):
        ff.h_functional(bg, 0.0)


# ---------------------------------------------------------------------------
# coefficient resummation
# ---------------------------------------------------------------------------

def test_a2k2_partial_sums_converge_to_h_circle():
    bg = ff.FourierBackground.circle_cosine(2 * math.pi, 3, 0.02)
    t = 0.05
    partial = sum(t ** (k - 2) * ff.a2k2_coefficient(bg, k) for k in range(2, 9))
    want = ff.h_functional(bg, t)
    assert abs(partial - want) < 1e-8 * abs(want)


def test_a2k2_partial_sums_converge_to_h_torus():
    bg, _ = torus_curvature_background(0.15)
    t = 0.05
    partial = sum(t ** (k - 2) * ff.a2k2_coefficient(bg, k) for k in range(2, 9))
    want = ff.h_functional(bg, t)
    assert abs(partial - want) < 1e-5 * abs(want)


def test_a2k2_leading_order_is_small_t_limit():
    bg = ff.FourierBackground.circle_cosine(2 * math.pi, 2, 0.1)
    assert abs(ff.h_functional(bg, 1e-9) - ff.a2k2_coefficient(bg, 2)) \
        < 1e-8 * abs(ff.a2k2_coefficient(bg, 2))


def test_a2k2_validation():
    bg = ff.FourierBackground.circle_cosine(1.0, 1, 0.1)
    with pytest.raises(ValidationError):
        ff.a2k2_coefficient(bg, 1)
