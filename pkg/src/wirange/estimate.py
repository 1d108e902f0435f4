"""Grid-search maximum-likelihood estimation of range or WI.

One of the three parameters is swept while the other two are held at
known values. Every hypothesis goes through the same pipeline
(:func:`evaluate`), so the same ``q`` gives the same log-likelihood whichever
sweep it came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    BandPartition,
    ComplexSurface,
    EstimateResult,
    ParameterHypothesis,
    SearchGrid,
    WIRangeError,
    frozen_array,
)
from .ingest import GroundTruth
from .likelihood import joint_loglik, row_scales
from .transform import build_striation_matrix, valid_striation_count
from .whiten import whiten

__all__ = [
    "evaluate",
    "loglik_curve",
    "estimate_range",
    "estimate_wi",
    "pick_argmax",
    "window_length_for",
    "TrackPoint",
    "run_track",
    "track_rmse",
]


def evaluate(surface: ComplexSurface, q: ParameterHypothesis, band: BandPartition, n_striations: int) -> float:
    """Joint log-likelihood of one hypothesis (``-inf`` when rejected)."""
    zmat = build_striation_matrix(surface, q, band, n_striations)
    try:
        return joint_loglik(whiten(zmat))
    except WIRangeError:
        # degenerate whitening or an all-zero striation rejects the hypothesis
        return -np.inf


def loglik_curve(
    surface: ComplexSurface,
    hypotheses: Sequence[ParameterHypothesis],
    band: BandPartition,
    n_striations: int,
    evaluator: Callable = evaluate,
) -> np.ndarray:
    return np.array([evaluator(surface, q, band, n_striations) for q in hypotheses])


def pick_argmax(grid: np.ndarray, loglik: np.ndarray) -> int:
    """Index of the maximum; ties go to the smallest grid value."""
    ll = np.where(np.isnan(loglik), -np.inf, loglik)
    if not np.any(np.isfinite(ll)):
        raise WIRangeError("every hypothesis was rejected")
    return int(np.argmax(ll))


def _resolve_m(surface, grid: SearchGrid, band, n_striations):
    m_avail, _ = valid_striation_count(surface.n_snapshots, grid, surface.t_delta, band)
    if n_striations is None:
        return m_avail
    if n_striations > m_avail:
        raise WIRangeError(f"{n_striations} striations requested but the grid allows only {m_avail}")
    return int(n_striations)


def _diagnostics(surface, q, band, m) -> dict:
    zmat = whiten(build_striation_matrix(surface, q, band, m))
    return {
        "M": m,
        "reference_bin": band.reference,
        "reference_freq": band.reference_freq,
        "rho_hat": zmat.whitening.rho_hat,
        "theta_hat": frozen_array(row_scales(zmat.whitened_mags)),
        "striation_ids": zmat.striation_ids,
    }


def estimate_range(
    surface: ComplexSurface,
    rdot,
    beta: float,
    r_grid,
    band: BandPartition,
    n_striations: int | None = None,
) -> EstimateResult:
    """Range at the last snapshot maximising the joint likelihood over ``r_grid``.

    ``n_striations`` fixes ``M``; by default the largest value valid over the
    whole grid is used.
    """
    grid = SearchGrid(r_grid, rdot, [beta])
    m = _resolve_m(surface, grid, band, n_striations)
    hyps = [ParameterHypothesis(r, grid.rdot_fixed, beta) for r in grid.r_grid]
    ll = loglik_curve(surface, hyps, band, m)
    i = pick_argmax(grid.r_grid, ll)
    return EstimateResult(
        "range_m", grid.r_grid, frozen_array(ll), float(grid.r_grid[i]), _diagnostics(surface, hyps[i], band, m)
    )


def estimate_wi(
    surface: ComplexSurface,
    r_true: float,
    rdot,
    beta_grid,
    band: BandPartition,
    n_striations: int | None = None,
) -> EstimateResult:
    """WI maximising the joint likelihood over ``beta_grid`` at known range."""
    grid = SearchGrid([r_true], rdot, beta_grid)
    m = _resolve_m(surface, grid, band, n_striations)
    hyps = [ParameterHypothesis(r_true, grid.rdot_fixed, b) for b in grid.beta_grid]
    ll = loglik_curve(surface, hyps, band, m)
    i = pick_argmax(grid.beta_grid, ll)
    return EstimateResult(
        "beta", grid.beta_grid, frozen_array(ll), float(grid.beta_grid[i]), _diagnostics(surface, hyps[i], band, m)
    )


def _first_true(pred, lo: int, hi: int) -> int:
    """Smallest n in (lo, hi] with pred(n) True, given pred monotone,
    pred(lo) False and pred(hi) True."""
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def window_length_for(m_target: int, grid: SearchGrid, t_delta: float, band: BandPartition, n_max: int) -> int:
    """Shortest window (in snapshots, at most ``n_max``) that keeps at least
    ``m_target`` striations valid over the whole grid."""

    def crosses(n):
        try:
            valid_striation_count(n, grid, t_delta, band)
        except WIRangeError as exc:
            return "crosses receiver" in str(exc)
        return False

    def enough(n):
        try:
            return valid_striation_count(n, grid, t_delta, band)[0] >= m_target
        except WIRangeError:
            return False

    lo = max(2, m_target) - 1
    if lo >= n_max:
        raise WIRangeError(f"no window of at most {n_max} snapshots gives {m_target} valid striations")
    n_ok = n_max
    if crosses(n_max):
        # longest window that stays on one side of the receiver
        n_ok = _first_true(crosses, 1, n_max) - 1
    if n_ok <= lo or not enough(n_ok):
        raise WIRangeError(f"no window of at most {n_max} snapshots gives {m_target} valid striations")
    return _first_true(enough, lo, n_ok)


@dataclass
class TrackPoint:
    time_s: float
    range_hat: float | None
    range_true: float | None
    n_snapshots: int = 0
    error: str | None = None
    result: EstimateResult | None = field(default=None, repr=False)

    @property
    def signed_error(self) -> float | None:
        if self.range_hat is None or self.range_true is None:
            return None
        return self.range_hat - self.range_true


def run_track(
    surface: ComplexSurface,
    end_times: Sequence[float],
    rdot: float,
    beta: float,
    band: BandPartition,
    m_target: int,
    grid_center: GroundTruth | Callable[[float], float],
    grid_frac: float = 0.4,
    grid_step: float = 10.0,
    truth: GroundTruth | None = None,
    estimator: Callable = estimate_range,
) -> list[TrackPoint]:
    """Range estimates for windows ending at each of ``end_times``.

    Each window ends at the snapshot nearest the requested time, so the
    estimate refers to that snapshot. The range grid spans
    ``center * (1 +/- grid_frac)`` around ``grid_center(t)`` (for example a
    ground-truth track) and the window is the shortest one that keeps
    ``m_target`` striations valid over that grid. Windows that cannot be
    formed are reported with ``error`` set; the track continues.
    """
    center = grid_center.range_at if isinstance(grid_center, GroundTruth) else grid_center
    times = surface.times
    out = []
    for t_end in end_times:
        e = int(np.abs(times - t_end).argmin())
        t = float(times[e])
        r_true = truth.range_at(t) if truth is not None else None
        try:
            grid = SearchGrid.around(center(t), grid_frac, grid_step, rdot, beta)
            n = window_length_for(m_target, grid, surface.t_delta, band, e + 1)
            window = surface.snapshots(e + 1 - n, e + 1)
            res = estimator(window, rdot, beta, grid.r_grid, band, n_striations=m_target)
            out.append(TrackPoint(t, res.argmax, r_true, n, None, res))
        except WIRangeError as exc:
            out.append(TrackPoint(t, None, r_true, 0, str(exc)))
    return out


def track_rmse(points: Sequence[TrackPoint]) -> float:
    errs = [p.signed_error for p in points if p.signed_error is not None]
    if not errs:
        raise WIRangeError("no track point has both an estimate and a ground truth")
    return float(np.sqrt(np.mean(np.square(errs))))
