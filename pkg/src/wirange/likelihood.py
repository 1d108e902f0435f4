"""Rayleigh scale estimation along striations and the joint log-likelihood."""

from __future__ import annotations

import math

import numpy as np

from .core import StriationMatrix, WIRangeError

__all__ = ["rayleigh_mle", "rayleigh_logpdf", "row_scales", "joint_loglik"]


def rayleigh_mle(row, K: int | None = None) -> float:
    """Maximum-likelihood Rayleigh scale: ``sqrt(sum(x**2) / (2K))``."""
    x = np.asarray(row, dtype=float)
    K = x.size if K is None else int(K)
    if K < 1 or x.size != K:
        raise WIRangeError("row length must equal K >= 1")
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise WIRangeError("row must be finite and non-negative")
    ss = float(np.dot(x, x))
    if ss == 0.0:
        raise WIRangeError("degenerate striation: all magnitudes are zero")
    return math.sqrt(ss / (2 * K))


def rayleigh_logpdf(x, theta):
    """Log of the standard Rayleigh density ``x/theta^2 * exp(-x^2/(2 theta^2))``.

    ``x == 0`` gives ``-inf``.
    """
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(~(theta > 0)):
        raise WIRangeError("Rayleigh scale must be positive")
    with np.errstate(divide="ignore"):
        out = np.log(x) - 2.0 * np.log(theta) - x * x / (2.0 * theta * theta)
    return float(out) if out.ndim == 0 else out


def row_scales(mags: np.ndarray) -> np.ndarray:
    """Per-row Rayleigh MLE of an (M, K) magnitude matrix."""
    ss = np.einsum("ij,ij->i", mags, mags)
    if np.any(ss == 0):
        raise WIRangeError("degenerate striation: all magnitudes are zero")
    return np.sqrt(ss / (2 * mags.shape[1]))


def joint_loglik(zmat: StriationMatrix) -> float:
    """Sum of Rayleigh log-densities of the whitened magnitudes, each row
    evaluated at its own plug-in scale estimate."""
    if zmat.whitened_mags is None:
        raise WIRangeError("striation matrix has not been whitened")
    if not zmat.valid.all():
        raise WIRangeError("striation matrix contains invalid cells")
    x = zmat.whitened_mags
    theta = row_scales(x)
    rows = rayleigh_logpdf(x, theta[:, None]).sum(axis=1)
    # fixed-order compensated reduction over rows
    return math.fsum(rows.tolist())
