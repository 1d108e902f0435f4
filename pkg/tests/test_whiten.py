import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from wirange.core import ParameterHypothesis, StriationMatrix, WIRangeError, partition_bands
from wirange.whiten import _quartiles, cauchy_ratio_samples, half_iqr, whiten

FREQS = [45.0, 45.1, 45.2, 45.3, 45.4]


def _matrix(z, ref_pos=2):
    """Striation matrix over bins 45.0..45.4 with no tonals (reference 45.2)."""
    band = partition_bands(FREQS[: z.shape[1]], [], 0.0)
    assert band.reference_pos == ref_pos
    return StriationMatrix(
        np.asarray(z, dtype=complex),
        np.ones(z.shape, bool),
        np.arange(1, z.shape[0] + 1),
        ParameterHypothesis(1e4, 10.0, 1.2),
        band,
    )


def _cn(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _scaled_rows(rng, m, scales):
    """Rows with a common random level, columns scaled by ``scales``."""
    theta = rng.uniform(0.5, 2.0, m)
    return _cn(rng, (m, len(scales))) * theta[:, None] * np.asarray(scales)[None, :]


# ---------------------------------------------------------------------------
# ratio samples


def test_proportional_columns_give_constant_ratio():
    rng = np.random.default_rng(1)
    z = _cn(rng, (212, 5))
    z[:, 0] = 2 * z[:, 2]
    s = cauchy_ratio_samples(_matrix(z), 0)
    assert s.size == 424
    assert np.all(s == 2.0)


def test_zero_denominators_are_dropped():
    rng = np.random.default_rng(2)
    z = _cn(rng, (10, 3), 1.0)
    z[:3, 1] = 0.0  # reference column 45.1 for a 3-bin band
    z[3, 1] = 1j  # real part zero, imaginary part kept
    band = partition_bands(FREQS[:3], [], 0.0)
    zmat = StriationMatrix(z, np.ones(z.shape, bool), np.arange(1, 11), ParameterHypothesis(1e4, 10.0, 1.2), band)
    assert cauchy_ratio_samples(zmat, 0).size == 20 - 6 - 1
    z[:7, 1] = 0.0
    with pytest.raises(WIRangeError, match="insufficient ratio samples"):
        cauchy_ratio_samples(zmat, 0)


def test_reference_bin_has_no_ratio_samples():
    zmat = _matrix(_cn(np.random.default_rng(0), (20, 5)))
    with pytest.raises(WIRangeError):
        cauchy_ratio_samples(zmat, zmat.band.reference)


@pytest.mark.slow
def test_ratio_samples_follow_cauchy():
    passed = 0
    for seed in range(200):
        z = _scaled_rows(np.random.default_rng(seed), 212, [3.0, 1.0, 1.0, 1.0, 1.0])
        s = cauchy_ratio_samples(_matrix(z), 0)
        passed += stats.kstest(s, stats.cauchy(0, 3).cdf).pvalue >= 0.01
    assert passed >= 190


# ---------------------------------------------------------------------------
# half IQR


def test_half_iqr_hand_cases():
    assert half_iqr([-3.0, -1.0, 1.0, 3.0]) == 1.5
    assert half_iqr([-2.5, 2.5] * 50) == 2.5
    assert half_iqr([4.0] * 10) == 0.0
    with pytest.raises(WIRangeError):
        half_iqr([1.0, 2.0, 3.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=60), st.randoms(use_true_random=False))
def test_half_iqr_permutation_and_reflection(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert half_iqr(ys) == half_iqr(xs)
    sym = np.concatenate([xs, -np.asarray(xs)])
    assert half_iqr(-sym) == pytest.approx(half_iqr(sym), rel=1e-12, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(4, 200), k=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_sorted_quartiles_match_numpy(n, k, seed):
    x = np.random.default_rng(seed).standard_cauchy((n, k))
    q25, q75 = _quartiles(x)
    ref = np.quantile(x, [0.25, 0.75], axis=0)
    assert np.allclose(q25, ref[0], rtol=1e-12, atol=1e-12)
    assert np.allclose(q75, ref[1], rtol=1e-12, atol=1e-12)


@pytest.mark.slow
def test_half_iqr_recovers_cauchy_scale():
    inside = 0
    for seed in range(100):
        x = 2.5 * np.random.default_rng(seed).standard_cauchy(100_000)
        inside += 2.45 <= half_iqr(x) <= 2.55
    assert inside >= 95


# ---------------------------------------------------------------------------
# whitening


def test_reference_column_is_unchanged():
    zmat = whiten(_matrix(_scaled_rows(np.random.default_rng(3), 50, [2.0, 0.5, 1.0, 3.0, 1.5])))
    ref = zmat.band.reference_pos
    assert zmat.whitening.rho_hat[ref] == 1.0
    assert np.array_equal(zmat.whitened_mags[:, ref], np.abs(zmat.complex_vals[:, ref]))
    assert zmat.whitening.sample_count == 100


def test_whitening_matches_half_iqr_per_bin():
    zmat = whiten(_matrix(_scaled_rows(np.random.default_rng(4), 80, [2.0, 0.5, 1.0, 3.0, 1.5])))
    for pos, k in enumerate(zmat.band.broadband):
        if k == zmat.band.reference:
            continue
        rho = half_iqr(cauchy_ratio_samples(zmat, int(k)))
        assert zmat.whitening.rho_hat[pos] == pytest.approx(rho, rel=1e-12)
        assert np.allclose(zmat.whitened_mags[:, pos], np.abs(zmat.complex_vals[:, pos]) / rho, rtol=1e-12)


@pytest.mark.slow
def test_known_scale_ratio_is_recovered():
    inside = 0
    for seed in range(100):
        z = _scaled_rows(np.random.default_rng(seed), 212, [4.0, 1.0, 1.0, 1.0, 1.0])
        inside += 3.0 <= whiten(_matrix(z)).whitening.rho_hat[0] <= 5.0
    assert inside >= 95


def test_column_scaling_is_absorbed_by_rho():
    z = _scaled_rows(np.random.default_rng(5), 100, [1.0, 1.0, 1.0, 1.0, 1.0])
    a = whiten(_matrix(z))
    z2 = z.copy()
    z2[:, 3] *= 8.0  # power of two keeps the ratios exact
    b = whiten(_matrix(z2))
    assert b.whitening.rho_hat[3] == 8.0 * a.whitening.rho_hat[3]
    assert np.array_equal(b.whitened_mags, a.whitened_mags)


@pytest.mark.parametrize("c", [1e-3, 7.0, 1e3])
def test_global_gain_scales_whitened_magnitudes(c):
    z = _scaled_rows(np.random.default_rng(6), 100, [2.0, 0.5, 1.0, 3.0, 1.5])
    a = whiten(_matrix(z))
    b = whiten(_matrix(c * z))
    assert np.allclose(b.whitening.rho_hat, a.whitening.rho_hat, rtol=1e-12)
    assert np.allclose(b.whitened_mags, c * a.whitened_mags, rtol=1e-12)


def test_degenerate_column_names_the_bin():
    z = _scaled_rows(np.random.default_rng(7), 40, [1.0] * 5)
    z[:, 4] = 0.0
    with pytest.raises(WIRangeError, match="bin 4"):
        whiten(_matrix(z))
