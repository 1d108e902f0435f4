"""Comparison estimator on tonal lines: a Rician likelihood of
magnitude-to-noise ratios (MNRs).

Each tonal bin is normalised by the background level measured on the
broadband bins around it, so that along a striation the MNRs behave like
``Rice(lambda, 1)`` draws with one unknown ``lambda`` per striation. The
range (or WI) hypothesis that gives the highest joint Rician likelihood
wins.

This is a stand-in for a modified tonal method whose details are not
published; it follows the unmodified estimator.

Scale convention
----------------
:func:`noise_sigma` returns the per-component standard deviation ``s`` of the
background. With ``y = |z| / (sqrt(2) * sigma_z)`` the MNR is unit-scale Rice
only when ``sqrt(2) * sigma_z = s``, so the estimators pass
``sigma_z = s / sqrt(2)`` to :func:`mnr`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import i0e

from .core import (
    BandPartition,
    ComplexSurface,
    EstimateResult,
    ParameterHypothesis,
    SearchGrid,
    WIRangeError,
    frozen_array,
)
from .estimate import loglik_curve, pick_argmax
from .transform import build_striation_matrix, valid_striation_count

__all__ = [
    "TonalObservation",
    "noise_sigma",
    "mnr",
    "log_i0",
    "rice_logpdf",
    "rice_lambda_estimate",
    "tonal_loglik",
    "estimate_range_tonal",
    "estimate_wi_tonal",
]

DEFAULT_NEIGHBORHOOD_HZ = 1.0
MIN_NEIGHBORS = 4


@dataclass(frozen=True)
class TonalObservation:
    """MNRs of one striation set (rows: striations, columns: tonal bins)."""

    mnr: np.ndarray
    noise_sigma: np.ndarray

    def __post_init__(self):
        y = frozen_array(self.mnr, float)
        s = frozen_array(self.noise_sigma, float)
        if not np.all(np.isfinite(y)) or np.any(y < 0):
            raise WIRangeError("MNRs must be finite and non-negative")
        if not np.all(s > 0):
            raise WIRangeError("noise sigmas must be positive")
        object.__setattr__(self, "mnr", y)
        object.__setattr__(self, "noise_sigma", s)


def noise_sigma(surface: ComplexSurface, j: int, band: BandPartition, neighborhood_hz: float = DEFAULT_NEIGHBORHOOD_HZ) -> float:
    """Per-component standard deviation of the background around bin ``j``.

    Uses every broadband bin within ``neighborhood_hz`` of ``f_j`` and every
    snapshot: ``sqrt(mean((Re**2 + Im**2) / 2))``. Broadband bins already
    respect the tonal guard, so no tonal energy leaks in.
    """
    if not neighborhood_hz > 0:
        raise WIRangeError("neighborhood_hz must be positive")
    f_j = band.freqs[int(j)]
    near = band.broadband[np.abs(band.freqs[band.broadband] - f_j) <= neighborhood_hz + 1e-9]
    if near.size == 0:
        raise WIRangeError(f"no broadband neighbours within {neighborhood_hz} Hz of {f_j:g} Hz")
    if near.size < MIN_NEIGHBORS:
        raise WIRangeError(
            f"only {near.size} broadband neighbours within {neighborhood_hz} Hz of {f_j:g} Hz; need {MIN_NEIGHBORS}"
        )
    z = surface.values[:, near]
    power = np.mean(z.real**2 + z.imag**2) / 2.0
    if not power > 0:
        raise WIRangeError(f"background around {f_j:g} Hz is identically zero")
    return math.sqrt(power)


def mnr(z, sigma_z):
    """Magnitude-to-noise ratio ``|z| / (sqrt(2) * sigma_z)``."""
    sigma_z = np.asarray(sigma_z, dtype=float)
    if np.any(~(sigma_z > 0)):
        raise WIRangeError("sigma_z must be positive")
    out = np.abs(np.asarray(z)) / (math.sqrt(2.0) * sigma_z)
    return float(out) if out.ndim == 0 else out


def log_i0(x):
    """``ln I0(x)`` for ``x >= 0`` without overflow.

    Uses the exponentially scaled Bessel function: ``ln I0(x) = ln i0e(x) + x``,
    which stays accurate far beyond where ``I0`` itself overflows.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise WIRangeError("log_i0 needs x >= 0")
    out = np.log(i0e(x)) + x
    return float(out) if out.ndim == 0 else out


def rice_logpdf(y, lam):
    """Log density of ``Rice(lam, 1)``: ``ln y - (y^2 + lam^2)/2 + ln I0(y lam)``.

    ``y == 0`` gives ``-inf``.
    """
    y = np.asarray(y, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(y < 0) or np.any(lam < 0):
        raise WIRangeError("rice_logpdf needs y >= 0 and lambda >= 0")
    with np.errstate(divide="ignore"):
        out = np.log(y) - 0.5 * (y * y + lam * lam) + log_i0(y * lam)
    return float(out) if np.ndim(out) == 0 else out


def rice_lambda_estimate(y_row) -> float:
    """Moment estimate ``sqrt(max(0, mean(y^2) - 2))`` of the Rice location."""
    y = np.asarray(y_row, dtype=float)
    if y.size == 0:
        raise WIRangeError("empty MNR row")
    if not np.all(np.isfinite(y)) or np.any(y < 0):
        raise WIRangeError("MNRs must be finite and non-negative")
    return math.sqrt(max(0.0, float(np.mean(y * y)) - 2.0))


def _lambda_rows(y: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(0.0, np.mean(y * y, axis=1) - 2.0))


def tonal_loglik(obs: TonalObservation) -> float:
    """Joint Rician log-likelihood with one plug-in ``lambda`` per striation."""
    y = obs.mnr
    lam = _lambda_rows(y)
    rows = rice_logpdf(y, lam[:, None]).sum(axis=1)
    return math.fsum(np.atleast_1d(rows).tolist())


def _observe(surface, q, tband, n_striations, sigma_z) -> TonalObservation:
    zmat = build_striation_matrix(surface, q, tband, n_striations)
    return TonalObservation(mnr(zmat.complex_vals, sigma_z[None, :]), sigma_z)


def _setup(surface, band: BandPartition, grid: SearchGrid, n_striations, neighborhood_hz):
    tband = band.tonal_partition()
    # per-component background std s, passed on as sigma_z = s / sqrt(2)
    s = np.array([noise_sigma(surface, j, band, neighborhood_hz) for j in tband.broadband])
    sigma_z = s / math.sqrt(2.0)
    m_avail, _ = valid_striation_count(surface.n_snapshots, grid, surface.t_delta, tband)
    if n_striations is None:
        m = m_avail
    elif n_striations > m_avail:
        raise WIRangeError(f"{n_striations} striations requested but the grid allows only {m_avail}")
    else:
        m = int(n_striations)
    return tband, sigma_z, m


def _evaluator(sigma_z):
    def evaluate_tonal(surface, q, tband, m):
        return tonal_loglik(_observe(surface, q, tband, m, sigma_z))

    return evaluate_tonal


def _diagnostics(surface, q, tband, m, sigma_z) -> dict:
    obs = _observe(surface, q, tband, m, sigma_z)
    return {
        "M": m,
        "tonal_bins": tband.broadband,
        "reference_bin": tband.reference,
        "reference_freq": tband.reference_freq,
        "noise_sigma": frozen_array(sigma_z * math.sqrt(2.0)),
        "lambda_hat": frozen_array(_lambda_rows(obs.mnr)),
    }


def estimate_range_tonal(
    surface: ComplexSurface,
    rdot,
    beta: float,
    r_grid,
    band: BandPartition,
    n_striations: int | None = None,
    neighborhood_hz: float = DEFAULT_NEIGHBORHOOD_HZ,
) -> EstimateResult:
    """Range maximising the joint Rician likelihood of the tonal MNRs."""
    grid = SearchGrid(r_grid, rdot, [beta])
    tband, sigma_z, m = _setup(surface, band, grid, n_striations, neighborhood_hz)
    hyps = [ParameterHypothesis(r, grid.rdot_fixed, beta) for r in grid.r_grid]
    ll = loglik_curve(surface, hyps, tband, m, evaluator=_evaluator(sigma_z))
    i = pick_argmax(grid.r_grid, ll)
    return EstimateResult(
        "range_m", grid.r_grid, frozen_array(ll), float(grid.r_grid[i]), _diagnostics(surface, hyps[i], tband, m, sigma_z)
    )


def estimate_wi_tonal(
    surface: ComplexSurface,
    r_true: float,
    rdot,
    beta_grid,
    band: BandPartition,
    n_striations: int | None = None,
    neighborhood_hz: float = DEFAULT_NEIGHBORHOOD_HZ,
) -> EstimateResult:
    """WI maximising the joint Rician likelihood at known range."""
    grid = SearchGrid([r_true], rdot, beta_grid)
    tband, sigma_z, m = _setup(surface, band, grid, n_striations, neighborhood_hz)
    hyps = [ParameterHypothesis(r_true, grid.rdot_fixed, b) for b in grid.beta_grid]
    ll = loglik_curve(surface, hyps, tband, m, evaluator=_evaluator(sigma_z))
    i = pick_argmax(grid.beta_grid, ll)
    return EstimateResult(
        "beta", grid.beta_grid, frozen_array(ll), float(grid.beta_grid[i]), _diagnostics(surface, hyps[i], tband, m, sigma_z)
    )
