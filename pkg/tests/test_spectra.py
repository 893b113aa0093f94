"""Exact spectral oracles: intervals, spheres, Landau levels, torus matrices."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatkern import spectra
from heatkern.errors import NumericError, ResourceError, ValidationError


# ---------------------------------------------------------------------------
# interval spectra
# ---------------------------------------------------------------------------

def test_reflection_identity():
    # doubling the interval: spec(DD on L) + spec(NN on L) = spec(circle 2L)
    L, t = math.pi, 0.13
    dd = spectra.interval_trace(L, "DD", t)
    nn = spectra.interval_trace(L, "NN", t)
    circle = sum(math.exp(-t * (2 * math.pi * n / (2 * L)) ** 2)
                 for n in range(-400, 401))
    assert abs(dd + nn - circle) < 1e-13 * circle


def test_dn_eigenvalues():
    L = 2.0
    model = spectra.interval_model(L, "DN")
    for j, (lam, mult) in enumerate(model.eigenvalues(6)):
        assert mult == 1
        assert abs(lam - ((j + 0.5) * math.pi / L) ** 2) < 1e-13


def test_interval_trace_matches_direct_sum():
    L, t = 1.5, 0.05
    want = sum(math.exp(-t * (j * math.pi / L) ** 2) for j in range(1, 3000))
    assert abs(spectra.interval_trace(L, "DD", t) - want) < 1e-12 * want


def test_partial_trace_monotone_in_count():
    model = spectra.interval_model(math.pi, "DD")
    vals = [model.partial_trace(0.3, n) for n in (2, 4, 8, 16)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_interval_validation():
    with pytest.raises(ValidationError):
        spectra.interval_model(-1.0, "DD")
    with pytest.raises(ValidationError):
        spectra.interval_model(1.0, "XY")
    with pytest.raises(ValidationError):
        spectra.interval_model(1.0, "robin")       # S missing
    with pytest.raises(ValidationError):
        spectra.interval_trace(1.0, "DD", 0.0)


# ---------------------------------------------------------------------------
# robin spectra
# ---------------------------------------------------------------------------

def robin_secular(L, S, lam):
    if lam >= 0:
        k = math.sqrt(lam)
        return (k * k - S * S) * math.sin(k * L) + 2 * S * k * math.cos(k * L)
    x = math.sqrt(-lam)
    # analytic continuation k -> i x of the same function, up to i
    return (x * x + S * S) * math.sinh(x * L) - 2 * S * x * math.cosh(x * L)


@given(st.floats(-3.0, 3.0).filter(lambda s: abs(s) > 1e-3))
@settings(max_examples=25, deadline=None)
def test_robin_roots_satisfy_secular_equation(S):
    L = math.pi
    for lam, mult in spectra.interval_model(L, "robin", S=S).eigenvalues(20):
        assert mult == 1
        scale = max(1.0, abs(lam) + S * S)
        assert abs(robin_secular(L, S, lam)) < 1e-9 * scale


def test_robin_zero_reduces_to_neumann():
    model = spectra.interval_model(1.0, "robin", S=0.0)
    nn = spectra.interval_model(1.0, "NN")
    assert model.eigenvalues(5) == nn.eigenvalues(5)


def test_robin_negative_mode_count():
    L = math.pi
    def negatives(S):
        return sum(1 for lam, _ in
                   spectra.interval_model(L, "robin", S=S).eigenvalues(10)
                   if lam < 0)
    assert negatives(-1.0) == 0
    assert negatives(0.5) == 1        # S L < 2: single bound state
    assert negatives(1.0) == 2        # S L > 2: both hyperbolic branches


def test_robin_interlaces_between_nn_and_dd():
    # positive robin eigenvalues sit between the Neumann and Dirichlet ones
    L, S = math.pi, 0.8
    rob = [lam for lam, _ in
           spectra.interval_model(L, "robin", S=S).eigenvalues(12) if lam > 0]
    for j, lam in enumerate(rob[:8]):
        lo = (j * math.pi / L) ** 2
        hi = ((j + 2) * math.pi / L) ** 2
        assert lo < lam < hi


# ---------------------------------------------------------------------------
# sphere spectra
# ---------------------------------------------------------------------------

def test_sphere_trace_matches_direct_sums():
    t = 0.5
    want2 = sum((2 * l + 1) * math.exp(-t * l * (l + 1)) for l in range(60))
    assert abs(spectra.sphere_trace(2, 1.0, t) - want2) < 1e-12 * want2
    a = 2.0
    want3 = sum((l + 1) ** 2 * math.exp(-t * l * (l + 2) / a ** 2) for l in range(120))
    assert abs(spectra.sphere_trace(3, a, t) - want3) < 1e-12 * want3


def test_sphere_model_validation():
    with pytest.raises(ValidationError):
        spectra.sphere_model(4, 1.0)
    with pytest.raises(ValidationError):
        spectra.sphere_model(2, 0.0)
    with pytest.raises(ValidationError):
        spectra.sphere_trace(2, 1.0, -0.1)


def test_sphere_tail_bound_is_a_bound():
    model = spectra.sphere_model(2, 1.0)
    t = 0.2
    full = spectra.sphere_trace(2, 1.0, t)
    for n in (5, 10, 20):
        missing = full - model.partial_trace(t, n)
        assert 0.0 <= missing <= model.tail_bound(t, n)


# ---------------------------------------------------------------------------
# Landau levels
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("tb", [0.1, 0.5, 1.0, 3.0, 5.0])
def test_landau_density_matches_level_sum(tb):
    B, t = 1.7, tb / 1.7
    levels = sum(math.exp(-t * B * (2 * n + 1)) for n in range(200))
    want = B / (2 * math.pi) * levels
    got = spectra.landau_trace_density(B, t)
    assert abs(got - want) < 1e-14 * want


def test_landau_small_field_limit():
    t = 0.3
    got = spectra.landau_trace_density(1e-9, t)
    assert abs(got - 1.0 / (4 * math.pi * t)) < 1e-9 / t


def test_landau_validation():
    with pytest.raises(ValidationError):
        spectra.landau_trace_density(0.0, 1.0)
    with pytest.raises(ValidationError):
        spectra.landau_trace_density(1.0, -1.0)


# ---------------------------------------------------------------------------
# torus with potential
# ---------------------------------------------------------------------------

def test_torus_trace_zero_potential_is_theta_product():
    t = 0.4
    periods = (2 * math.pi, 3.0)
    got = spectra.torus_potential_trace(periods, {}, cutoff=24, t=t)
    want = 1.0
    for L in periods:
        want_l = sum(math.exp(-t * (2 * math.pi * n / L) ** 2) for n in range(-60, 61))
        want *= want_l
    assert abs(got - want) < 1e-12 * want


def test_torus_trace_matches_handmade_fourier_matrix():
    # independent dense construction on e^{inx}, n = -c..c
    q, n0, t, c = 0.4, 3, 0.3, 20
    L = 2 * math.pi
    ns = np.arange(-c, c + 1)
    H = np.diag((2 * math.pi * ns / L).astype(float) ** 2).astype(complex)
    for i, a in enumerate(ns):
        for j, b in enumerate(ns):
            if abs(a - b) == n0:
                H[i, j] += q / 2.0
    want = float(np.sum(np.exp(-t * np.linalg.eigvalsh(H))))
    got = spectra.torus_potential_trace(L, spectra.cosine_modes(n0, q), cutoff=c, t=t)
    assert abs(got - want) < 1e-13 * want


def test_cosine_modes_layout():
    assert spectra.cosine_modes(0, 2.0) == {(0,): 2.0 + 0.0j}
    m = spectra.cosine_modes(3, 0.5)
    assert m[(3,)] == 0.25 and m[(-3,)] == 0.25


def test_torus_trace_rejects_complex_potential():
    with pytest.raises(ValidationError):
        spectra.torus_potential_trace(2 * math.pi, {(1,): 1.0}, cutoff=8, t=0.5)
    with pytest.raises(ValidationError):
        spectra.torus_potential_trace(
            2 * math.pi, {(1,): 1j, (-1,): 1j}, cutoff=8, t=0.5)


def test_torus_trace_cutoff_tail_guard():
    with pytest.raises(ValidationError):
        spectra.torus_potential_trace(2 * math.pi, {}, cutoff=4, t=1e-4)


def test_torus_trace_matrix_budget():
    with pytest.raises(ResourceError):
        spectra.torus_potential_trace((1.0, 1.0), {}, cutoff=40, t=10.0)


def test_torus_trace_dimension_checks():
    with pytest.raises(ValidationError):
        spectra.torus_potential_trace((1.0, 1.0), {(1,): 1.0, (-1,): 1.0},
                                      cutoff=4, t=10.0)
    with pytest.raises(ValidationError):
        spectra.torus_potential_trace((1.0, -1.0), {}, cutoff=4, t=10.0)


# ---------------------------------------------------------------------------
# expansion fitting
# ---------------------------------------------------------------------------

def synth_samples(coeffs_by_exp, ts):
    return [(t, sum(c * t ** e for e, c in coeffs_by_exp.items())) for t in ts]


def test_fit_recovers_exact_expansion():
    truth = {-1.0: 2.0, 0.0: 0.7, 1.0: -0.05}
    ts = np.geomspace(1e-3, 1e-1, 12)
    fit = spectra.fit_expansion(synth_samples(truth, ts), m=2,
                                exponents=(-1.0, 0.0, 1.0))
    for e, c in zip(fit.exponents, fit.coefficients):
        assert abs(c - truth[e]) < 1e-9 * max(1.0, abs(truth[e]))
    assert fit.condition_number < 1e12
    assert np.all(fit.errors >= 0.0)


def test_fit_bootstrap_is_seeded():
    truth = {-1.0: 1.0, 0.0: 0.3}
    ts = np.geomspace(1e-3, 1e-1, 10)
    samples = synth_samples(truth, ts)
    a = spectra.fit_expansion(samples, m=2, exponents=(-1.0, 0.0), seed=7)
    b = spectra.fit_expansion(samples, m=2, exponents=(-1.0, 0.0), seed=7)
    assert np.array_equal(a.errors, b.errors)


def test_fit_rejects_degenerate_design():
    ts = np.geomspace(1e-3, 1e-1, 10)
    samples = synth_samples({-1.0: 1.0}, ts)
    with pytest.raises(NumericError):
        spectra.fit_expansion(samples, m=2, exponents=(-1.0, -1.0 + 1e-15))


def test_fit_input_validation():
    with pytest.raises(ValidationError):
        spectra.fit_expansion([], m=2, exponents=(-1.0,))
    with pytest.raises(ValidationError):
        spectra.fit_expansion([(0.1, 1.0)], m=2, exponents=(-1.0, 0.0))
