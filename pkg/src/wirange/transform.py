"""Time-to-range mapping and projection into striation-frequency space.

A striation is anchored at a snapshot ``l`` on the reference frequency
``f'``. At another frequency ``f`` the same striation sits at range
``r_l * (f / f')**(1/beta)``; the surface is sampled there by linear
interpolation of the real and imaginary parts along the range axis.

Only striations whose projected ranges stay inside the observed range span
for every processed bin are usable. The number ``M`` of such striations is
fixed over a whole search grid so that likelihood values stay comparable;
for each hypothesis the ``M`` most recent fully valid striations are used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BandPartition,
    ComplexSurface,
    ParameterHypothesis,
    SearchGrid,
    StriationMatrix,
    WIRangeError,
    frozen_array,
)

__all__ = [
    "RangeAxis",
    "range_axis",
    "wi_project",
    "interpolate_complex",
    "valid_striations",
    "valid_striation_count",
    "build_striation_matrix",
]


@dataclass(frozen=True)
class RangeAxis:
    """Source-receiver range (m) at each snapshot of a window."""

    ranges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ranges", frozen_array(self.ranges, float))

    def __len__(self):
        return self.ranges.size

    @property
    def increasing(self) -> bool:
        return bool(self.ranges[-1] > self.ranges[0])


def range_axis(r_last: float, rdot, t_delta: float, n: int) -> RangeAxis:
    """Map snapshot times to ranges given the range at the last snapshot.

    ``r_i = r_N - sum_{j=i}^{N-1} rdot_j * t_delta``. A scalar ``rdot`` is
    expanded to a constant vector, so both forms give identical output.
    """
    if n < 1:
        raise WIRangeError("need at least one snapshot")
    rdot = np.asarray(rdot, dtype=float)
    if rdot.ndim == 0:
        rdot = np.full(n - 1, float(rdot))
    elif rdot.shape != (n - 1,):
        raise WIRangeError(f"range-rate vector has length {rdot.size}, expected {n - 1}")
    steps = rdot * t_delta
    # tail sums: back[i] = sum_{j >= i} steps[j], accumulated from the end
    back = np.zeros(n)
    back[:-1] = np.cumsum(steps[::-1])[::-1]
    ranges = r_last - back
    if np.any(ranges <= 0):
        raise WIRangeError("track crosses receiver: a range along the window is <= 0")
    return RangeAxis(ranges)


def wi_project(r_ref, f_k, f_kprime, beta):
    """Range at frequency ``f_k`` on the striation through ``(r_ref, f_kprime)``."""
    r_ref, f_k, f_kprime, beta = (np.asarray(a, dtype=float) for a in (r_ref, f_k, f_kprime, beta))
    if np.any(r_ref <= 0) or np.any(f_k <= 0) or np.any(f_kprime <= 0) or np.any(beta <= 0):
        raise WIRangeError("wi_project arguments must be positive")
    out = r_ref * (f_k / f_kprime) ** (1.0 / beta)
    return float(out) if out.ndim == 0 else out


def _monotone(axis: RangeAxis) -> tuple[np.ndarray, bool]:
    r = axis.ranges
    d = np.diff(r)
    if np.all(d > 0):
        return r, False
    if np.all(d < 0):
        return r[::-1], True
    raise WIRangeError("range axis is not monotone; the source must not cross its closest approach in a window")


def _interp_columns(values: np.ndarray, ranges: np.ndarray, targets: np.ndarray, cols: np.ndarray):
    """Linear interpolation of ``values[:, cols[j]]`` at ``targets[:, j]``.

    ``ranges`` must be strictly increasing. Returns the interpolated complex
    array and a validity mask (targets outside the axis span are invalid).
    """
    n = ranges.size
    valid = (targets >= ranges[0]) & (targets <= ranges[-1])
    t = np.where(valid, targets, ranges[0])
    step = (ranges[-1] - ranges[0]) / (n - 1)
    d = np.diff(ranges)
    if np.all(np.abs(d - step) <= 1e-9 * step):
        # evenly spaced axis (constant range rate): direct index
        idx = np.clip(((t - ranges[0]) / step).astype(np.intp), 0, n - 2)
        # guard against rounding at cell edges
        idx -= t < ranges[idx]
        idx += t >= ranges[np.minimum(idx + 1, n - 1)]
        idx = np.clip(idx, 0, n - 2)
    else:
        idx = np.clip(np.searchsorted(ranges, t, side="right") - 1, 0, n - 2)
    lo, hi = ranges[idx], ranges[idx + 1]
    w = (t - lo) / (hi - lo)
    a = values[idx, cols]
    b = values[idx + 1, cols]
    # real and imaginary parts interpolate independently with the same weight
    out = (1.0 - w) * a + w * b
    out[~valid] = np.nan
    return out, valid


def interpolate_complex(surface: ComplexSurface, axis: RangeAxis, k: int, target_r: float):
    """Surface value at bin ``k`` and range ``target_r``, or ``None`` if out of span."""
    if len(axis) != surface.n_snapshots:
        raise WIRangeError("range axis length does not match the surface")
    ranges, flipped = _monotone(axis)
    values = surface.values[::-1] if flipped else surface.values
    out, valid = _interp_columns(values, ranges, np.array([[float(target_r)]]), np.array([int(k)]))
    return complex(out[0, 0]) if valid[0, 0] else None


def _ratios(band: BandPartition, beta: float) -> np.ndarray:
    f = band.broadband_freqs
    return (f / band.reference_freq) ** (1.0 / beta)


def valid_striations(n: int, q: ParameterHypothesis, t_delta: float, band: BandPartition) -> np.ndarray:
    """Boolean mask over snapshots: True where the striation anchored there
    projects inside the observed range span for every processed bin."""
    r = range_axis(q.range_m, q.range_rate, t_delta, n).ranges
    proj = r[:, None] * _ratios(band, q.beta)[None, :]
    lo, hi = min(r[0], r[-1]), max(r[0], r[-1])
    return np.all((proj >= lo) & (proj <= hi), axis=1)


def valid_striation_count(n: int, grid: SearchGrid, t_delta: float, band: BandPartition):
    """Number ``M`` of striations usable for every hypothesis of ``grid``.

    The count is evaluated at every corner of the grid; the minimum is ``M``.
    Returns ``(M, L)`` where ``L`` holds the 1-based snapshot indices of the
    striations used at the limiting corner ``[r_max, rdot, beta_min]``.
    """
    counts = []
    for q in grid.corners():
        counts.append(int(valid_striations(n, q, t_delta, band).sum()))
    q_l = ParameterHypothesis(grid.r_grid[-1], grid.rdot_fixed, grid.beta_grid[0])
    mask_l = valid_striations(n, q_l, t_delta, band)
    m = min(min(counts), int(mask_l.sum()))
    if m == 0:
        raise WIRangeError("window too short for search grid")
    ids = np.flatnonzero(mask_l)[-m:] + 1
    return m, ids


def build_striation_matrix(
    surface: ComplexSurface, q: ParameterHypothesis, band: BandPartition, n_striations: int
) -> StriationMatrix:
    """Resample the surface along the ``n_striations`` most recent valid striations.

    Column ``j`` corresponds to ``band.broadband[j]``. The reference column is
    taken straight from the surface; the others are interpolated at the
    projected ranges.
    """
    n = surface.n_snapshots
    q.check_snapshots(n)
    axis = range_axis(q.range_m, q.range_rate, surface.t_delta, n)
    ranges, flipped = _monotone(axis)
    valid_rows = np.flatnonzero(valid_striations(n, q, surface.t_delta, band))
    if valid_rows.size < n_striations or n_striations < 1:
        raise WIRangeError(
            f"hypothesis r={q.range_m:g} m, beta={q.beta:g} has {valid_rows.size} valid striations, "
            f"{n_striations} requested"
        )
    rows = valid_rows[-n_striations:]
    r_rows = axis.ranges[rows]
    targets = r_rows[:, None] * _ratios(band, q.beta)[None, :]

    values = surface.values[::-1] if flipped else surface.values
    cols = np.broadcast_to(band.broadband, targets.shape)
    zz, valid = _interp_columns(values, ranges, targets, cols)
    ref = band.reference_pos
    zz[:, ref] = surface.values[rows, band.reference]
    valid[:, ref] = True
    if not valid.all():
        raise WIRangeError("internal error: invalid cell inside the striation set")
    return StriationMatrix(
        complex_vals=frozen_array(zz),
        valid=frozen_array(valid),
        striation_ids=frozen_array(rows + 1),
        hypothesis=q,
        band=band,
    )
