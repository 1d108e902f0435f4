"""Per-bin scale ratios from Cauchy-distributed component ratios.

Under the signal model the real (and imaginary) part of a striation sample
at bin ``k`` divided by the one at the reference bin is Cauchy with location
0 and scale ``rho_k``, the ratio of the two Rayleigh scales. Half the sample
interquartile range of the ``2M`` ratios estimates ``rho_k`` robustly, and
dividing the magnitudes by it puts every bin on the reference scale.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import StriationMatrix, WIRangeError, frozen_array

__all__ = ["WhitenDiagnostics", "cauchy_ratio_samples", "half_iqr", "whiten"]

MIN_RATIO_SAMPLES = 8


@dataclass(frozen=True)
class WhitenDiagnostics:
    rho_hat: np.ndarray
    sample_count: int


def _ratio_block(zz: np.ndarray, ref: int) -> np.ndarray:
    """(2M, K) ratios, rows interleaved Re, Im per striation; zero
    denominators dropped."""
    num = np.empty((2 * zz.shape[0], zz.shape[1]))
    num[0::2] = zz.real
    num[1::2] = zz.imag
    den = num[:, ref]
    keep = den != 0
    return num[keep] / den[keep, None]


def _column(zmat: StriationMatrix, k: int) -> int:
    pos = np.flatnonzero(zmat.band.broadband == k)
    if pos.size == 0:
        raise WIRangeError(f"bin {k} is not a broadband bin")
    return int(pos[0])


def cauchy_ratio_samples(zmat: StriationMatrix, k: int) -> np.ndarray:
    """Ratios Re(z_lk)/Re(z_lk'), Im(z_lk)/Im(z_lk') for every striation.

    ``k`` is a surface bin index from the broadband set, other than the
    reference bin.
    """
    if k == zmat.band.reference:
        raise WIRangeError("ratio samples are undefined for the reference bin")
    col = _column(zmat, k)
    zz = zmat.complex_vals[:, [col, zmat.band.reference_pos]]
    samples = _ratio_block(zz, 1)[:, 0]
    if samples.size < MIN_RATIO_SAMPLES:
        raise WIRangeError(f"insufficient ratio samples ({samples.size}) for bin {k}")
    return samples


def _quartiles(x: np.ndarray):
    """Lower and upper quartiles along axis 0 by the linear rule
    (position ``(n - 1) * p``), matching ``np.quantile``. A full sort is
    cheaper than numpy's partition for the column counts used here."""
    xs = np.sort(x, axis=0)
    n = xs.shape[0]
    out = []
    for p in (0.25, 0.75):
        h = (n - 1) * p
        lo = int(np.floor(h))
        hi = min(lo + 1, n - 1)
        g = h - lo
        out.append(xs[lo] + g * (xs[hi] - xs[lo]))
    return out


def half_iqr(samples) -> float:
    """Half the sample interquartile range.

    Quartiles use linear interpolation between order statistics at
    position ``(n - 1) * p`` (numpy's default rule). Returns 0.0 for a
    degenerate sample; callers decide whether that is acceptable.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size < 4:
        raise WIRangeError("half_iqr needs at least 4 samples")
    q25, q75 = np.quantile(samples, [0.25, 0.75])
    return float(q75 - q25) / 2.0


def whiten(zmat: StriationMatrix) -> StriationMatrix:
    """Return a copy of ``zmat`` with whitened magnitudes filled in."""
    ref = zmat.band.reference_pos
    ratios = _ratio_block(zmat.complex_vals, ref)
    if ratios.shape[0] < MIN_RATIO_SAMPLES and zmat.n_bins > 1:
        raise WIRangeError(f"insufficient ratio samples ({ratios.shape[0]})")
    if zmat.n_bins > 1:
        q25, q75 = _quartiles(ratios)
        rho = (q75 - q25) / 2.0
    else:
        rho = np.ones(1)
    rho[ref] = 1.0
    bad = ~(np.isfinite(rho) & (rho > 0))
    if bad.any():
        k = int(zmat.band.broadband[np.flatnonzero(bad)[0]])
        raise WIRangeError(f"scale ratio estimate for bin {k} is not positive and finite")
    mags = np.abs(zmat.complex_vals) / rho[None, :]
    return replace(
        zmat,
        whitened_mags=frozen_array(mags),
        whitening=WhitenDiagnostics(frozen_array(rho), int(ratios.shape[0])),
    )
