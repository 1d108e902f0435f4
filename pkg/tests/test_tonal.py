import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from wirange.core import ComplexSurface, WIRangeError
from wirange.likelihood import rayleigh_logpdf
from wirange.simulate import REFERENCE_TONALS
from wirange.tonal import (
    TonalObservation,
    estimate_range_tonal,
    estimate_wi_tonal,
    log_i0,
    mnr,
    noise_sigma,
    rice_lambda_estimate,
    rice_logpdf,
    tonal_loglik,
)

from conftest import BETA, GUARD_HZ, R_TRUE, RDOT, reference_band, range_grid, range_scene

TONES = tuple((f, 3.0) for f in REFERENCE_TONALS)


def _i0_series(x):
    # I0(x) = sum_k (x^2/4)^k / (k!)^2
    q = x * x / 4
    term, total, k = 1.0, 1.0, 0
    while term > 1e-18 * total:
        k += 1
        term *= q / (k * k)
        total += term
    return total


def _rice_draws(rng, lam, n):
    return np.abs(lam + rng.standard_normal(n) + 1j * rng.standard_normal(n))


# ---------------------------------------------------------------------------
# scalar pieces


def test_mnr_hand_cases():
    assert mnr(3 + 4j, 5 / math.sqrt(2)) == pytest.approx(1.0, rel=1e-15)
    assert mnr(math.sqrt(2) * 0.7, 0.7) == pytest.approx(1.0, rel=1e-15)
    assert mnr(0j, 1.0) == 0.0
    with pytest.raises(WIRangeError):
        mnr(1.0, 0.0)


def test_log_i0_matches_series():
    for x in np.linspace(0, 30, 301):
        assert log_i0(x) == pytest.approx(math.log(_i0_series(x)), abs=1e-10)
    # far past the overflow point of I0 itself
    assert np.isfinite(log_i0(1e4))
    assert log_i0(1e4) == pytest.approx(1e4 - 0.5 * math.log(2 * math.pi * 1e4), abs=1e-4)
    with pytest.raises(WIRangeError):
        log_i0(-1.0)


def test_rice_hand_cases():
    assert rice_logpdf(0.0, 2.0) == -math.inf
    y = 1.3
    assert rice_logpdf(y, 2.0) == pytest.approx(math.log(y) - (y * y + 4) / 2 + math.log(_i0_series(2 * y)), rel=1e-13)
    with pytest.raises(WIRangeError):
        rice_logpdf(-1.0, 1.0)
    with pytest.raises(WIRangeError):
        rice_logpdf(1.0, -1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 50.0))
def test_zero_location_rice_is_unit_rayleigh(y):
    assert rice_logpdf(y, 0.0) == rayleigh_logpdf(y, 1.0)


@pytest.mark.parametrize("lam", [0.0, 3.0, 10.0])
def test_rice_density_integrates_to_one(lam):
    total, _ = integrate.quad(lambda y: math.exp(rice_logpdf(y, lam)), 0, 50, epsabs=1e-12, epsrel=1e-12, limit=200)
    assert abs(total - 1) <= 1e-6


def test_lambda_estimate_hand_cases():
    # inputs chosen so that mean(y^2) is exact in floating point
    assert rice_lambda_estimate([2.0, 0.0, 0.0, 2.0]) == 0.0
    assert rice_lambda_estimate([1.0, 1.0, 4.0]) == 2.0
    assert rice_lambda_estimate([0.1, 0.2]) == 0.0
    with pytest.raises(WIRangeError):
        rice_lambda_estimate([])


@pytest.mark.slow
def test_lambda_estimate_is_consistent():
    inside = 0
    for seed in range(100):
        lam = rice_lambda_estimate(_rice_draws(np.random.default_rng(seed), 4.0, 10_000))
        inside += 3.9 <= lam <= 4.1
    assert inside >= 95


def test_tonal_loglik_matches_loops():
    rng = np.random.default_rng(0)
    y = np.stack([_rice_draws(rng, lam, 5) for lam in (0.5, 2.0, 6.0)])
    obs = TonalObservation(y, np.ones(5))
    expected = 0.0
    for row in y:
        lam = math.sqrt(max(0.0, sum(v * v for v in row) / len(row) - 2))
        expected += sum(math.log(v) - (v * v + lam * lam) / 2 + math.log(_i0_series(v * lam)) for v in row)
    assert tonal_loglik(obs) == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------------------
# background level


def _noise_surface(seed, n, gain=1.0):
    rng = np.random.default_rng(seed)
    z = gain * (rng.standard_normal((n, 71)) + 1j * rng.standard_normal((n, 71)))
    return ComplexSurface(z, 0.0, 2.5, 42.0, 0.1)


def test_noise_sigma_of_unit_noise():
    band = reference_band()
    for seed in range(5):
        s = _noise_surface(seed, 1000)
        for j in band.tonal:
            # at least 10 000 background samples per tonal
            assert noise_sigma(s, j, band) == pytest.approx(1.0, abs=0.02)


def test_noise_sigma_is_linear_in_gain():
    band = reference_band()
    a = noise_sigma(_noise_surface(1, 100), int(band.tonal[2]), band)
    b = noise_sigma(_noise_surface(1, 100, gain=4.0), int(band.tonal[2]), band)
    assert b == pytest.approx(4.0 * a, rel=1e-14)


def test_background_never_uses_guard_or_tonal_bins():
    band = reference_band()
    freqs = band.freqs
    s = _noise_surface(2, 200)
    z = np.array(s.values)
    z[:, band.tonal] = 1e6
    guarded = [k for k in range(freqs.size) if any(abs(freqs[k] - t) < GUARD_HZ - 1e-9 for t in band.tonal_freqs)]
    z[:, guarded] = 1e6
    poisoned = ComplexSurface(z, 0.0, 2.5, 42.0, 0.1)
    for j in band.tonal:
        near = [
            k
            for k in range(freqs.size)
            if k not in guarded and abs(freqs[k] - freqs[j]) <= 1.0 + 1e-9
        ]
        expected = math.sqrt(np.mean(np.abs(z[:, near]) ** 2) / 2)
        assert noise_sigma(poisoned, j, band) == pytest.approx(expected, rel=1e-12)


def test_too_few_neighbours():
    band = reference_band()
    with pytest.raises(WIRangeError, match="neighbours"):
        noise_sigma(_noise_surface(0, 10), int(band.tonal[2]), band, neighborhood_hz=0.45)


# ---------------------------------------------------------------------------
# estimators


@pytest.mark.slow
def test_tonal_range_recovery():
    band, grid = reference_band(), range_grid().r_grid
    inside = 0
    for seed in range(30):
        s, _ = range_scene(seed, tonal=TONES, noise_sigma=0.1)
        res = estimate_range_tonal(s, RDOT, BETA, grid, band)
        inside += abs(res.argmax - R_TRUE) <= 0.02 * R_TRUE
    assert inside >= 24


def test_noise_only_scene_has_less_contrast():
    band = reference_band()
    grid = R_TRUE * np.linspace(0.9, 1.1, 41)
    for seed in range(3):
        s, _ = range_scene(seed, tonal=TONES, noise_sigma=0.1)
        matched = estimate_range_tonal(s, RDOT, BETA, grid, band, n_striations=200).loglik
        s, _ = range_scene(seed, source_sigma=0.0, noise_sigma=1.0)
        noise = estimate_range_tonal(s, RDOT, BETA, grid, band, n_striations=200).loglik
        assert np.ptp(noise) < np.ptp(matched)


@pytest.mark.parametrize("c", [1e-3, 1e3])
def test_tonal_argmax_is_gain_invariant(c):
    band = reference_band()
    s, _ = range_scene(4, tonal=TONES, noise_sigma=0.1)
    scaled = ComplexSurface(c * s.values, s.t0, s.t_delta, s.f0, s.df)
    grid = R_TRUE * np.linspace(0.95, 1.05, 21)
    assert estimate_range_tonal(scaled, RDOT, BETA, grid, band).argmax == estimate_range_tonal(s, RDOT, BETA, grid, band).argmax
    b = np.round(np.arange(1.0, 1.4, 0.02), 2)
    assert estimate_wi_tonal(scaled, R_TRUE, RDOT, b, band).argmax == estimate_wi_tonal(s, R_TRUE, RDOT, b, band).argmax


def test_tonal_diagnostics():
    band = reference_band()
    s, _ = range_scene(5, tonal=TONES, noise_sigma=0.1)
    res = estimate_wi_tonal(s, R_TRUE, RDOT, [1.2, BETA], band, n_striations=100)
    d = res.diagnostics
    assert d["reference_freq"] == pytest.approx(45.4)
    assert d["tonal_bins"].tolist() == band.tonal.tolist()
    assert d["lambda_hat"].shape == (100,)
    assert np.all(d["noise_sigma"] > 0)
