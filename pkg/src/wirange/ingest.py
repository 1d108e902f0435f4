"""Hydrophone samples to complex surfaces, and the on-disk formats.

Formats
-------
WIRF surface (little-endian)::

    b"WIRF" | u32 version=1 | u32 N | u32 K | f64 t0 | f64 t_delta | f64 f0 | f64 df
    | N*K pairs of f64 (re, im), row-major by snapshot

Surface metadata (sample rate, STFT parameters, generator seed) does not fit
in the binary header; when present it is written to a ``<path>.meta``
key=value sidecar next to the surface.

Raw audio is headerless little-endian float32 mono with a ``<path>.meta``
sidecar carrying at least ``sample_rate``.

Ground truth is a two-column CSV ``time_s,range_m``; ``#`` comment lines and
a non-numeric header row are skipped.
"""

from __future__ import annotations

import csv
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ComplexSurface, WIRangeError, frozen_array

__all__ = [
    "StftParams",
    "stft",
    "save_surface",
    "load_surface",
    "WirfFormatError",
    "WirfVersionError",
    "WirfTruncatedError",
    "WirfValueError",
    "wirf_size",
    "GroundTruth",
    "load_groundtruth",
    "save_groundtruth",
    "load_raw",
    "save_raw",
    "read_kv",
    "write_kv",
]

MAGIC = b"WIRF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdddd")


class WirfFormatError(WIRangeError):
    """Not a WIRF file (bad magic)."""


class WirfVersionError(WIRangeError):
    """Unsupported WIRF version."""


class WirfTruncatedError(WIRangeError):
    """Header or payload shorter than the header promises."""


class WirfValueError(WIRangeError):
    """Payload holds NaN or infinity."""


# ---------------------------------------------------------------------------
# key=value text files


def read_kv(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise WIRangeError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def write_kv(path, items: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in items.items():
            fh.write(f"{key}={value}\n")


def _meta_path(path) -> Path:
    return Path(str(path) + ".meta")


# ---------------------------------------------------------------------------
# STFT


@dataclass(frozen=True)
class StftParams:
    """Spectrogram settings: Hamming-windowed segments, zero padded, overlapped."""

    sample_rate: float
    segment_s: float = 5.0
    zeropad_s: float = 5.0
    overlap_frac: float = 0.5

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise WIRangeError("sample_rate must be positive")
        if not self.segment_s > 0 or self.zeropad_s < 0:
            raise WIRangeError("segment_s must be positive and zeropad_s >= 0")
        if not 0 <= self.overlap_frac < 1:
            raise WIRangeError("overlap_frac must be in [0, 1)")

    @property
    def t_delta(self) -> float:
        return self.segment_s * (1.0 - self.overlap_frac)

    def _samples(self, seconds: float, what: str) -> int:
        n = seconds * self.sample_rate
        if abs(n - round(n)) > 1e-6:
            raise WIRangeError(f"{what} of {seconds} s is not a whole number of samples")
        return int(round(n))

    @property
    def segment_len(self) -> int:
        return self._samples(self.segment_s, "segment")

    @property
    def nfft(self) -> int:
        return self._samples(self.segment_s + self.zeropad_s, "padded segment")

    @property
    def hop(self) -> int:
        return self._samples(self.t_delta, "hop")


def stft(samples, params: StftParams, band_hz) -> ComplexSurface:
    """Complex spectrogram restricted to the bins inside ``band_hz``.

    Snapshot ``n`` covers samples ``[n*hop, n*hop + segment_len)`` and is
    time-stamped at the segment centre. Trailing partial segments are
    dropped. The bin spacing is ``1 / (segment_s + zeropad_s)`` Hz.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1:
        raise WIRangeError("samples must be 1-D")
    if not np.all(np.isfinite(x)):
        raise WIRangeError("samples contain non-finite values")
    seg, hop, nfft = params.segment_len, params.hop, params.nfft
    if seg < 2 or hop < 1:
        raise WIRangeError("segment too short for the sample rate")
    n_snap = (x.size - seg) // hop + 1 if x.size >= seg else 0
    if n_snap < 2:
        raise WIRangeError(f"{x.size} samples give {n_snap} snapshot(s); need at least 2")
    f_lo, f_hi = (float(b) for b in band_hz)
    nyq = params.sample_rate / 2
    if not (0 <= f_lo <= f_hi <= nyq):
        raise WIRangeError(f"band [{f_lo}, {f_hi}] Hz outside [0, {nyq}] Hz")

    df = params.sample_rate / nfft
    k_all = np.arange(nfft // 2 + 1)
    f_all = k_all * df
    tol = 1e-9 * df
    sel = k_all[(f_all >= f_lo - tol) & (f_all <= f_hi + tol)]
    if sel.size < 2:
        raise WIRangeError("band holds fewer than 2 bins after restriction")

    window = np.hamming(seg)
    starts = np.arange(n_snap) * hop
    frames = x[starts[:, None] + np.arange(seg)[None, :]] * window[None, :]
    bins = np.fft.rfft(frames, n=nfft, axis=1)[:, sel]
    t0 = (seg / 2) / params.sample_rate
    meta = {
        "sample_rate": repr(float(params.sample_rate)),
        "segment_s": repr(float(params.segment_s)),
        "zeropad_s": repr(float(params.zeropad_s)),
        "overlap_frac": repr(float(params.overlap_frac)),
        "window": "hamming",
    }
    return ComplexSurface(bins, t0, params.t_delta, float(sel[0] * df), df, meta)


# ---------------------------------------------------------------------------
# WIRF


def wirf_size(n: int, k: int) -> int:
    """Exact byte size of a WIRF file holding an ``n`` x ``k`` surface."""
    return _HEADER.size + 16 * n * k


def save_surface(surface: ComplexSurface, path) -> None:
    n, k = surface.values.shape
    pairs = np.empty((n, k, 2), dtype="<f8")
    pairs[..., 0] = surface.values.real
    pairs[..., 1] = surface.values.imag
    header = _HEADER.pack(MAGIC, VERSION, n, k, surface.t0, surface.t_delta, surface.f0, surface.df)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pairs.tobytes(order="C"))
    meta_path = _meta_path(path)
    if surface.meta:
        write_kv(meta_path, dict(surface.meta))
    elif meta_path.exists():
        os.remove(meta_path)


def load_surface(path) -> ComplexSurface:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise WirfFormatError(f"{path}: not a WIRF file (bad magic)")
    if len(raw) < _HEADER.size:
        raise WirfTruncatedError(f"{path}: header truncated")
    _, version, n, k, t0, t_delta, f0, df = _HEADER.unpack_from(raw)
    if version != VERSION:
        raise WirfVersionError(f"{path}: WIRF version {version}, expected {VERSION}")
    expected = wirf_size(n, k)
    if len(raw) < expected:
        raise WirfTruncatedError(f"{path}: payload holds {len(raw) - _HEADER.size} bytes, expected {16 * n * k}")
    if len(raw) > expected:
        raise WirfFormatError(f"{path}: {len(raw) - expected} trailing bytes after payload")
    pairs = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(n, k, 2)
    if not np.all(np.isfinite(pairs)):
        raise WirfValueError(f"{path}: payload contains non-finite values")
    # assign parts directly; re + 1j*im would not preserve signed zeros
    values = np.empty((n, k), dtype=np.complex128)
    values.real = pairs[..., 0]
    values.imag = pairs[..., 1]
    meta_path = _meta_path(path)
    meta = read_kv(meta_path) if meta_path.exists() else {}
    return ComplexSurface(values, t0, t_delta, f0, df, meta)


# ---------------------------------------------------------------------------
# raw samples


def save_raw(samples, path, sample_rate: float) -> None:
    np.asarray(samples, dtype="<f4").tofile(path)
    write_kv(_meta_path(path), {"sample_rate": repr(float(sample_rate))})


def load_raw(path) -> tuple[np.ndarray, float]:
    """Return ``(samples, sample_rate)`` from a float32 file and its sidecar."""
    meta_path = _meta_path(path)
    if not meta_path.exists():
        raise WIRangeError(f"{path}: missing sidecar {meta_path.name} with sample_rate")
    meta = read_kv(meta_path)
    try:
        fs = float(meta["sample_rate"])
    except (KeyError, ValueError):
        raise WIRangeError(f"{meta_path}: sample_rate missing or not a number") from None
    data = np.fromfile(path, dtype="<f4").astype(float)
    return data, fs


# ---------------------------------------------------------------------------
# ground truth


class GroundTruth(list):
    """Ascending ``(time_s, range_m)`` rows with linear interpolation."""

    def __init__(self, rows):
        rows = [(float(t), float(r)) for t, r in rows]
        if len(rows) < 2:
            raise WIRangeError("ground truth needs at least 2 rows")
        t = np.array([row[0] for row in rows])
        if np.any(np.diff(t) <= 0):
            raise WIRangeError("ground-truth times must be strictly increasing")
        super().__init__(rows)
        self.times = frozen_array(t)
        self.ranges = frozen_array([row[1] for row in rows])

    def range_at(self, t):
        """Linearly interpolated range; raises outside the covered time span."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < self.times[0]) or np.any(t_arr > self.times[-1]):
            raise WIRangeError("time outside the ground-truth span")
        out = np.interp(t_arr, self.times, self.ranges)
        return float(out) if out.ndim == 0 else out


def load_groundtruth(path) -> GroundTruth:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, rec in enumerate(csv.reader(fh), 1):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            if len(rec) < 2:
                raise WIRangeError(f"{path}:{lineno}: expected two columns")
            try:
                rows.append((float(rec[0]), float(rec[1])))
            except ValueError:
                if rows:
                    raise WIRangeError(f"{path}:{lineno}: non-numeric row") from None
                continue  # header
    return GroundTruth(rows)


def save_groundtruth(path, times, ranges, comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write("time_s,range_m\n")
        for t, r in zip(times, ranges):
            fh.write(f"{float(t)!r},{float(r)!r}\n")
