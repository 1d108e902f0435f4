"""Synthetic range-frequency surfaces with known range, range rate and WI.

The channel magnitude is built directly in the invariant coordinate
``u = ln f - beta * ln r``::

    |g(r, f)| = A(f) * (c0 + c1 * cos(2*pi*u / P)) * r**(-alpha)

With ``alpha = 0`` the magnitude is exactly constant along every locus
``f * r**(-beta) = const`` up to the per-frequency envelope ``A(f)``, so the
along-striation scaling assumption of the estimator holds exactly.

Each cell is ``z = g * s + u`` with ``s ~ CN(0, source_sigma_k**2)`` and
``u ~ CN(0, noise_sigma_k**2)`` independent over snapshots and bins
(per-component variances, see :mod:`wirange.core`). Tonal lines add
``a_j * g(r_n, f_j)`` at the bin nearest ``f_j``: a constant complex source
amplitude heard through the same channel.

Random numbers come from numpy's PCG64 bit generator seeded with
``SceneConfig.seed``; the draw order is source real, source imaginary, noise
real, noise imaginary, each as an ``(N, K)`` block.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import ComplexSurface, ParameterHypothesis, WIRangeError, frozen_array
from .ingest import read_kv, write_kv
from .transform import range_axis

__all__ = [
    "SceneConfig",
    "reference_scene",
    "channel_magnitude",
    "scene_ranges",
    "synth_surface",
    "cpa_ranges",
    "track_scene",
    "load_scene_config",
    "save_scene_config",
]

REFERENCE_BAND = (42.0, 49.0)
REFERENCE_DF = 0.1
REFERENCE_TONALS = (42.6, 44.0, 45.4, 46.7, 48.1)


def _per_bin(v, k: int, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        a = np.full(k, float(a))
    if a.shape != (k,):
        raise WIRangeError(f"{name} needs one value per bin ({k}), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise WIRangeError(f"{name} must be finite")
    return frozen_array(a)


@dataclass(frozen=True)
class SceneConfig:
    """Everything needed to draw one synthetic surface.

    ``freq_envelope``, ``source_sigma`` and ``noise_sigma`` accept a scalar
    or one value per bin. ``tonal`` is a sequence of ``(freq_hz, amplitude)``
    pairs with complex amplitudes.
    """

    true_range_m: float
    range_rate: float | np.ndarray
    beta: float
    t_delta_s: float
    n_snapshots: int
    freqs: np.ndarray
    striation_pattern: tuple[float, float, float] = (1.0, 0.8, 0.025)
    freq_envelope: float | np.ndarray = 1.0
    source_sigma: float | np.ndarray = 1.0
    noise_sigma: float | np.ndarray = 0.0
    tonal: tuple = ()
    spreading_exponent: float = 0.0
    seed: int = 0
    t0_s: float = 0.0

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        if freqs.ndim != 1 or freqs.size < 2 or np.any(np.diff(freqs) <= 0) or freqs[0] <= 0:
            raise WIRangeError("freqs must be positive and strictly ascending")
        if not np.allclose(np.diff(freqs), freqs[1] - freqs[0], rtol=1e-9, atol=0):
            raise WIRangeError("freqs must be evenly spaced")
        k = freqs.size
        object.__setattr__(self, "freqs", frozen_array(freqs))
        object.__setattr__(self, "freq_envelope", _per_bin(self.freq_envelope, k, "freq_envelope"))
        object.__setattr__(self, "source_sigma", _per_bin(self.source_sigma, k, "source_sigma"))
        object.__setattr__(self, "noise_sigma", _per_bin(self.noise_sigma, k, "noise_sigma"))
        if np.any(self.freq_envelope <= 0):
            raise WIRangeError("freq_envelope must be > 0")
        if np.any(self.source_sigma < 0) or np.any(self.noise_sigma < 0):
            raise WIRangeError("sigmas must be >= 0")
        c0, c1, period = (float(c) for c in self.striation_pattern)
        if not c0 > c1:
            raise WIRangeError(f"striation pattern needs c0 > c1 (got c0={c0}, c1={c1}): channel would vanish")
        if c1 < 0 or period <= 0:
            raise WIRangeError("striation pattern needs c1 >= 0 and period > 0")
        object.__setattr__(self, "striation_pattern", (c0, c1, period))
        if self.n_snapshots < 2:
            raise WIRangeError("n_snapshots must be >= 2")
        if self.spreading_exponent < 0:
            raise WIRangeError("spreading_exponent must be >= 0")
        rr = np.asarray(self.range_rate, dtype=float)
        object.__setattr__(self, "range_rate", float(rr) if rr.ndim == 0 else frozen_array(rr))
        tonal = tuple((float(f), complex(a)) for f, a in self.tonal)
        for f, _ in tonal:
            if not freqs[0] - 1e-9 <= f <= freqs[-1] + 1e-9:
                raise WIRangeError(f"tonal frequency {f} Hz outside the band")
        object.__setattr__(self, "tonal", tonal)
        # validates range positivity along the window
        scene_ranges(self)

    def replace(self, **kw) -> "SceneConfig":
        return replace(self, **kw)


def reference_scene(**overrides) -> SceneConfig:
    """Scene on the 42-49 Hz band at 0.1 Hz with 2.5 s snapshots.

    Defaults mirror the ranging setup: 22.7 km at the last snapshot,
    10.2 m/s range rate, WI 1.21. The envelope and source spectrum vary
    across the band so that whitening has real work to do.
    """
    freqs = np.round(np.arange(REFERENCE_BAND[0], REFERENCE_BAND[1] + REFERENCE_DF / 2, REFERENCE_DF), 10)
    base = dict(
        true_range_m=22_700.0,
        range_rate=10.2,
        beta=1.21,
        t_delta_s=2.5,
        n_snapshots=347,
        freqs=freqs,
        striation_pattern=(1.0, 0.8, 0.025),
        freq_envelope=1.0 + 0.3 * np.cos(2 * np.pi * (freqs - freqs[0]) / 5.0),
        source_sigma=(freqs / 45.0) ** -2.0,
        noise_sigma=0.0,
    )
    base.update(overrides)
    return SceneConfig(**base)


def channel_magnitude(r, f, cfg: SceneConfig):
    """Channel magnitude ``|g(r, f)|``; the envelope is interpolated between bins."""
    r = np.asarray(r, dtype=float)
    f = np.asarray(f, dtype=float)
    if np.any(r <= 0) or np.any(f <= 0):
        raise WIRangeError("range and frequency must be positive")
    c0, c1, period = cfg.striation_pattern
    u = np.log(f) - cfg.beta * np.log(r)
    env = np.interp(f, cfg.freqs, cfg.freq_envelope)
    out = env * (c0 + c1 * np.cos(2 * np.pi * u / period))
    if cfg.spreading_exponent:
        out = out * r ** (-cfg.spreading_exponent)
    return float(out) if out.ndim == 0 else out


def scene_ranges(cfg: SceneConfig) -> np.ndarray:
    return range_axis(cfg.true_range_m, cfg.range_rate, cfg.t_delta_s, cfg.n_snapshots).ranges


def synth_surface(cfg: SceneConfig) -> tuple[ComplexSurface, ParameterHypothesis]:
    """Draw a surface and return it with the true parameter vector."""
    n, k = cfg.n_snapshots, cfg.freqs.size
    ranges = scene_ranges(cfg)
    g = channel_magnitude(ranges[:, None], cfg.freqs[None, :], cfg)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    s_re = rng.standard_normal((n, k))
    s_im = rng.standard_normal((n, k))
    u_re = rng.standard_normal((n, k))
    u_im = rng.standard_normal((n, k))
    z = g * cfg.source_sigma * (s_re + 1j * s_im) + cfg.noise_sigma * (u_re + 1j * u_im)
    for f_t, amp in cfg.tonal:
        j = int(np.abs(cfg.freqs - f_t).argmin())
        z[:, j] += amp * g[:, j]
    meta = {"generator": "wirange.simulate", "rng": "PCG64", "seed": str(cfg.seed)}
    df = float(cfg.freqs[-1] - cfg.freqs[0]) / (k - 1)
    surface = ComplexSurface(z, cfg.t0_s, cfg.t_delta_s, float(cfg.freqs[0]), df, meta)
    return surface, ParameterHypothesis(cfg.true_range_m, cfg.range_rate, cfg.beta)


def cpa_ranges(times, cpa_m: float, speed: float, t_cpa: float = 0.0) -> np.ndarray:
    """Ranges of a source on a straight track past the receiver."""
    t = np.asarray(times, dtype=float)
    return np.hypot(cpa_m, speed * (t - t_cpa))


def track_scene(ranges, **overrides) -> SceneConfig:
    """Reference-band scene whose true range follows ``ranges`` snapshot by snapshot.

    The range rate becomes the per-step vector ``diff(ranges) / t_delta``, so
    the range axis rebuilt from it reproduces ``ranges``.
    """
    r = np.asarray(ranges, dtype=float)
    if r.ndim != 1 or r.size < 2:
        raise WIRangeError("a track needs at least 2 ranges")
    t_delta = float(overrides.pop("t_delta_s", 2.5))
    return reference_scene(
        true_range_m=float(r[-1]),
        range_rate=np.diff(r) / t_delta,
        t_delta_s=t_delta,
        n_snapshots=r.size,
        **overrides,
    )


# ---------------------------------------------------------------------------
# flat key=value scene files

_FLOAT_KEYS = ("true_range_m", "beta", "t_delta_s", "spreading_exponent", "t0_s")


def _floats(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",") if v.strip()])


def _scalar_or_list(text: str):
    a = _floats(text)
    return float(a[0]) if a.size == 1 else a


def load_scene_config(path, **overrides) -> SceneConfig:
    """Read a scene file.

    Keys: ``true_range_m, range_rate, beta, t_delta_s, n_snapshots`` and
    either ``freqs`` (list) or ``f_lo, f_hi, df``; optional
    ``pattern_c0, pattern_c1, pattern_period, freq_envelope, source_sigma,
    noise_sigma, tonal_freqs, tonal_amps, tonal_phases, spreading_exponent,
    seed, t0_s``. Lists are comma separated.
    """
    kv = read_kv(path)
    try:
        args = {key: float(kv[key]) for key in _FLOAT_KEYS if key in kv}
        args["range_rate"] = _scalar_or_list(kv["range_rate"])
        args["n_snapshots"] = int(kv["n_snapshots"])
        if "freqs" in kv:
            args["freqs"] = _floats(kv["freqs"])
        else:
            lo, hi, df = float(kv["f_lo"]), float(kv["f_hi"]), float(kv["df"])
            n = int(np.floor((hi - lo) / df + 1e-9)) + 1
            args["freqs"] = lo + df * np.arange(n)
        pattern = list(SceneConfig.__dataclass_fields__["striation_pattern"].default)
        for i, key in enumerate(("pattern_c0", "pattern_c1", "pattern_period")):
            if key in kv:
                pattern[i] = float(kv[key])
        args["striation_pattern"] = tuple(pattern)
        for key in ("freq_envelope", "source_sigma", "noise_sigma"):
            if key in kv:
                args[key] = _scalar_or_list(kv[key])
        if "tonal_freqs" in kv:
            tf = _floats(kv["tonal_freqs"])
            amps = _floats(kv.get("tonal_amps", "0")) * np.ones(tf.size)
            phases = _floats(kv.get("tonal_phases", "0")) * np.ones(tf.size)
            args["tonal"] = tuple(zip(tf, amps * np.exp(1j * phases)))
        if "seed" in kv:
            args["seed"] = int(kv["seed"])
    except KeyError as exc:
        raise WIRangeError(f"{path}: missing key {exc.args[0]}") from None
    except ValueError as exc:
        raise WIRangeError(f"{path}: {exc}") from None
    args.update(overrides)
    return SceneConfig(**args)


def _fmt(v) -> str:
    a = np.atleast_1d(np.asarray(v, dtype=float))
    return ",".join(repr(float(x)) for x in a)


def save_scene_config(cfg: SceneConfig, path) -> None:
    c0, c1, period = cfg.striation_pattern
    items = {
        "true_range_m": repr(cfg.true_range_m),
        "range_rate": _fmt(cfg.range_rate),
        "beta": repr(cfg.beta),
        "t_delta_s": repr(cfg.t_delta_s),
        "n_snapshots": cfg.n_snapshots,
        "freqs": _fmt(cfg.freqs),
        "pattern_c0": repr(c0),
        "pattern_c1": repr(c1),
        "pattern_period": repr(period),
        "freq_envelope": _fmt(cfg.freq_envelope),
        "source_sigma": _fmt(cfg.source_sigma),
        "noise_sigma": _fmt(cfg.noise_sigma),
        "spreading_exponent": repr(cfg.spreading_exponent),
        "seed": cfg.seed,
        "t0_s": repr(cfg.t0_s),
    }
    if cfg.tonal:
        items["tonal_freqs"] = _fmt([f for f, _ in cfg.tonal])
        items["tonal_amps"] = _fmt([abs(a) for _, a in cfg.tonal])
        items["tonal_phases"] = _fmt([np.angle(a) for _, a in cfg.tonal])
    write_kv(path, items)
