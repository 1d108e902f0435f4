"""Domain types shared by the whole pipeline, plus band partitioning.

All containers are frozen dataclasses holding read-only numpy arrays, so a
surface or partition can be handed to several workers without copying.

Complex Gaussian convention used throughout the package: ``CN(0, s**2)``
means independent real and imaginary parts, each with variance ``s**2``.
The magnitude of such a variable is Rayleigh distributed with scale ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "WIRangeError",
    "ComplexSurface",
    "BandPartition",
    "ParameterHypothesis",
    "SearchGrid",
    "StriationMatrix",
    "EstimateResult",
    "partition_bands",
    "frozen_array",
]

# Absolute slack (Hz) when comparing frequencies built as f0 + k*df.
FREQ_TOL = 1e-9


class WIRangeError(ValueError):
    """Data or model error raised by the estimation pipeline."""


def frozen_array(a, dtype=None) -> np.ndarray:
    """Return a C-contiguous, read-only copy of ``a``."""
    out = np.array(a, dtype=dtype, copy=True, order="C")
    out.setflags(write=False)
    return out


def _uniform_step(axis: np.ndarray, name: str) -> tuple[float, float]:
    if axis.ndim != 1 or axis.size < 2:
        raise WIRangeError(f"{name} axis needs at least 2 samples")
    steps = np.diff(axis)
    step = float(steps[0])
    if step <= 0 or not np.all(steps > 0):
        raise WIRangeError(f"{name} axis must be strictly increasing")
    if not np.allclose(steps, step, rtol=1e-9, atol=0.0):
        raise WIRangeError(f"{name} axis must have a constant step")
    return float(axis[0]), step


@dataclass(frozen=True)
class ComplexSurface:
    """N x K complex STFT measurements on uniform time and frequency axes.

    The axes are stored as (origin, step) pairs; ``times`` and ``freqs`` are
    regenerated from them so that a file round trip is bit-exact.
    """

    values: np.ndarray
    t0: float
    t_delta: float
    f0: float
    df: float
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2 or values.shape[0] < 2 or values.shape[1] < 2:
            raise WIRangeError(f"surface must be at least 2x2, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise WIRangeError("surface contains non-finite values")
        if not (self.t_delta > 0 and self.df > 0):
            raise WIRangeError("time and frequency steps must be positive")
        object.__setattr__(self, "values", frozen_array(values, np.complex128))
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "t_delta", float(self.t_delta))
        object.__setattr__(self, "f0", float(self.f0))
        object.__setattr__(self, "df", float(self.df))
        object.__setattr__(self, "meta", MappingProxyType({str(k): str(v) for k, v in dict(self.meta).items()}))

    @classmethod
    def from_axes(cls, values, times, freqs, meta=None) -> "ComplexSurface":
        t0, t_delta = _uniform_step(np.asarray(times, dtype=float), "time")
        f0, df = _uniform_step(np.asarray(freqs, dtype=float), "frequency")
        values = np.asarray(values)
        if values.shape != (len(times), len(freqs)):
            raise WIRangeError("values shape does not match the axes")
        return cls(values, t0, t_delta, f0, df, meta or {})

    @property
    def n_snapshots(self) -> int:
        return self.values.shape[0]

    @property
    def n_bins(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_snapshots) * self.t_delta

    @property
    def freqs(self) -> np.ndarray:
        return self.f0 + np.arange(self.n_bins) * self.df

    def snapshots(self, start: int, stop: int) -> "ComplexSurface":
        """Sub-surface holding snapshots ``start <= n < stop`` (0-based)."""
        if not 0 <= start < stop <= self.n_snapshots:
            raise WIRangeError(f"snapshot slice [{start}, {stop}) outside 0..{self.n_snapshots}")
        return ComplexSurface(
            self.values[start:stop], self.t0 + start * self.t_delta, self.t_delta, self.f0, self.df, self.meta
        )

    def restrict(self, f_lo: float, f_hi: float) -> "ComplexSurface":
        """Sub-surface holding the bins with ``f_lo <= f <= f_hi``."""
        f = self.freqs
        keep = np.flatnonzero((f >= f_lo - FREQ_TOL) & (f <= f_hi + FREQ_TOL))
        if keep.size < 2:
            raise WIRangeError(f"fewer than 2 bins inside [{f_lo}, {f_hi}] Hz")
        return ComplexSurface(
            self.values[:, keep[0] : keep[-1] + 1], self.t0, self.t_delta, float(f[keep[0]]), self.df, self.meta
        )

    def scaled(self, gain: float) -> "ComplexSurface":
        return ComplexSurface(self.values * gain, self.t0, self.t_delta, self.f0, self.df, self.meta)

    def __eq__(self, other):
        if not isinstance(other, ComplexSurface):
            return NotImplemented
        return (
            self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values)
            and (self.t0, self.t_delta, self.f0, self.df) == (other.t0, other.t_delta, other.f0, other.df)
            and dict(self.meta) == dict(other.meta)
        )

    __hash__ = None


@dataclass(frozen=True)
class BandPartition:
    """Broadband and tonal bin index sets and the reference bin.

    ``broadband`` and ``tonal`` are sorted 0-based indices into the surface
    frequency axis. ``reference`` is the bin index (not the position inside
    ``broadband``) of the reference frequency.
    """

    broadband: np.ndarray
    tonal: np.ndarray
    guard_hz: float
    reference: int
    freqs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "broadband", frozen_array(self.broadband, np.intp))
        object.__setattr__(self, "tonal", frozen_array(self.tonal, np.intp))
        object.__setattr__(self, "freqs", frozen_array(self.freqs, float))
        if self.broadband.size == 0:
            raise WIRangeError("no broadband bins")
        if np.intersect1d(self.broadband, self.tonal).size:
            raise WIRangeError("broadband and tonal bins overlap")
        if int(self.reference) not in set(self.broadband.tolist()):
            raise WIRangeError("reference bin must be a broadband bin")
        object.__setattr__(self, "reference", int(self.reference))

    @property
    def broadband_freqs(self) -> np.ndarray:
        return self.freqs[self.broadband]

    @property
    def tonal_freqs(self) -> np.ndarray:
        return self.freqs[self.tonal]

    @property
    def reference_freq(self) -> float:
        return float(self.freqs[self.reference])

    @property
    def reference_pos(self) -> int:
        """Position of the reference bin inside ``broadband``."""
        return int(np.searchsorted(self.broadband, self.reference))

    def tonal_partition(self) -> "BandPartition":
        """Partition that treats the tonal bins as the processed set.

        Used by the tonal comparison estimator, which runs the same striation
        machinery on the tonal lines with its own mid-band reference.
        """
        if self.tonal.size == 0:
            raise WIRangeError("band has no tonal bins")
        ref = _mid_reference(self.freqs, self.tonal)
        return BandPartition(self.tonal, np.empty(0, np.intp), self.guard_hz, ref, self.freqs)


def _mid_reference(freqs: np.ndarray, bins: np.ndarray) -> int:
    f = freqs[bins]
    mid = 0.5 * (f.min() + f.max())
    # argmin returns the first minimum, i.e. the lower bin on ties
    dist = np.abs(f - mid)
    best = np.flatnonzero(dist <= dist.min() + FREQ_TOL)[0]
    return int(bins[best])


def partition_bands(freqs: Sequence[float], tonal_freqs: Sequence[float], guard_hz: float) -> BandPartition:
    """Split a frequency axis into broadband and tonal bins.

    A bin is broadband when its frequency is at least ``guard_hz`` away from
    every tonal frequency (closed condition). Each tonal frequency claims the
    single bin nearest to it. The reference bin is the broadband bin closest
    to the midpoint of the broadband span, ties going to the lower bin.

    Parameters
    ----------
    freqs : sequence of float
        Ascending bin frequencies in Hz.
    tonal_freqs : sequence of float
        Tonal line frequencies in Hz, in any order.
    guard_hz : float
        Exclusion half-width around each tonal line.

    Returns
    -------
    BandPartition
    """
    freqs = np.asarray(freqs, dtype=float)
    tonal_freqs = np.unique(np.asarray(tonal_freqs, dtype=float))
    if freqs.ndim != 1 or freqs.size == 0:
        raise WIRangeError("freqs must be a non-empty 1-D sequence")
    if np.any(np.diff(freqs) <= 0):
        raise WIRangeError("freqs must be strictly ascending")
    if not guard_hz >= 0:
        raise WIRangeError("guard_hz must be >= 0")
    lo, hi = freqs[0] - FREQ_TOL, freqs[-1] + FREQ_TOL
    outside = tonal_freqs[(tonal_freqs < lo) | (tonal_freqs > hi)]
    if outside.size:
        raise WIRangeError(f"tonal frequency {outside[0]:g} Hz outside the band [{freqs[0]:g}, {freqs[-1]:g}] Hz")

    if tonal_freqs.size:
        dist = np.abs(freqs[:, None] - tonal_freqs[None, :]).min(axis=1)
        keep = dist >= guard_hz - FREQ_TOL
        tonal = np.unique(np.abs(freqs[:, None] - tonal_freqs[None, :]).argmin(axis=0))
    else:
        keep = np.ones(freqs.size, dtype=bool)
        tonal = np.empty(0, dtype=np.intp)
    broadband = np.flatnonzero(keep)
    if broadband.size == 0:
        raise WIRangeError("no broadband bins")
    # a tonal line closer than the guard to its own bin always excludes it;
    # with guard_hz == 0 the nearest bin is still reserved for the tonal
    broadband = np.setdiff1d(broadband, tonal)
    if broadband.size == 0:
        raise WIRangeError("no broadband bins")
    return BandPartition(broadband, tonal, float(guard_hz), _mid_reference(freqs, broadband), freqs)


@dataclass(frozen=True)
class ParameterHypothesis:
    """Parameter vector q = [range at the last snapshot, range rate, WI]."""

    range_m: float
    range_rate: float | np.ndarray
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.range_m) and self.range_m > 0):
            raise WIRangeError(f"range_m must be positive, got {self.range_m}")
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise WIRangeError(f"beta must be positive, got {self.beta}")
        rr = np.asarray(self.range_rate, dtype=float)
        if rr.ndim == 0:
            object.__setattr__(self, "range_rate", float(rr))
        elif rr.ndim == 1:
            object.__setattr__(self, "range_rate", frozen_array(rr))
        else:
            raise WIRangeError("range_rate must be a scalar or a vector")
        if not np.all(np.isfinite(rr)):
            raise WIRangeError("range_rate must be finite")
        object.__setattr__(self, "range_m", float(self.range_m))
        object.__setattr__(self, "beta", float(self.beta))

    def check_snapshots(self, n: int) -> None:
        if np.ndim(self.range_rate) == 1 and len(self.range_rate) != n - 1:
            raise WIRangeError(f"range-rate vector has length {len(self.range_rate)}, expected {n - 1}")

    def replace(self, **kw) -> "ParameterHypothesis":
        d = dict(range_m=self.range_m, range_rate=self.range_rate, beta=self.beta)
        d.update(kw)
        return ParameterHypothesis(**d)


def _check_grid(g: np.ndarray, name: str) -> np.ndarray:
    g = np.atleast_1d(np.asarray(g, dtype=float))
    if g.ndim != 1 or g.size == 0:
        raise WIRangeError(f"{name} must be non-empty")
    if not np.all(np.isfinite(g)):
        raise WIRangeError(f"{name} must be finite")
    if np.any(np.diff(g) <= 0):
        raise WIRangeError(f"{name} must be strictly ascending")
    return frozen_array(g)


@dataclass(frozen=True)
class SearchGrid:
    """Search grids for range and WI with the range rate held fixed."""

    r_grid: np.ndarray
    rdot_fixed: float | np.ndarray
    beta_grid: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r_grid", _check_grid(self.r_grid, "r_grid"))
        object.__setattr__(self, "beta_grid", _check_grid(self.beta_grid, "beta_grid"))
        if self.r_grid[0] <= 0 or self.beta_grid[0] <= 0:
            raise WIRangeError("grids must be positive")
        rr = np.asarray(self.rdot_fixed, dtype=float)
        object.__setattr__(self, "rdot_fixed", float(rr) if rr.ndim == 0 else frozen_array(rr))

    @classmethod
    def around(cls, center_m: float, frac: float, step_m: float, rdot, beta) -> "SearchGrid":
        """Range grid spanning ``center*(1 +/- frac)`` in ``step_m`` increments."""
        lo, hi = center_m * (1 - frac), center_m * (1 + frac)
        n = int(np.floor((hi - lo) / step_m + 1e-9)) + 1
        return cls(lo + step_m * np.arange(n), rdot, np.atleast_1d(beta))

    def corners(self) -> list[ParameterHypothesis]:
        rr = self.rdot_fixed
        return [
            ParameterHypothesis(r, rr, b)
            for r in (self.r_grid[0], self.r_grid[-1])
            for b in (self.beta_grid[0], self.beta_grid[-1])
        ]


@dataclass(frozen=True)
class StriationMatrix:
    """Surface samples resampled along hypothesised striations.

    Rows follow the striations in ascending order; ``striation_ids`` holds
    the 1-based snapshot index each striation is anchored to at the
    reference frequency. Columns follow ``band.broadband``.
    """

    complex_vals: np.ndarray
    valid: np.ndarray
    striation_ids: np.ndarray
    hypothesis: ParameterHypothesis
    band: BandPartition
    whitened_mags: np.ndarray | None = None
    whitening: object | None = None

    @property
    def n_striations(self) -> int:
        return self.complex_vals.shape[0]

    @property
    def n_bins(self) -> int:
        return self.complex_vals.shape[1]


@dataclass(frozen=True)
class EstimateResult:
    """Outcome of a one-parameter grid search."""

    parameter: str
    grid: np.ndarray
    loglik: np.ndarray
    argmax: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def argmax_index(self) -> int:
        return int(np.searchsorted(self.grid, self.argmax))
