"""Command-line front end.

Every subcommand reads WIRF surfaces and flat key=value config files and
writes WIRF or CSV. CSV outputs start with one ``#`` line naming the
package version, the subcommand and its parameters.

Exit codes: 0 success, 1 usage error, 2 data or model error.

Band config keys (all optional except where noted)::

    tonal_freqs=42.6,44.0,45.4,46.7,48.1
    guard_hz=0.4
    f_lo=42.0          # restrict the surface before partitioning
    f_hi=49.0
    neighborhood_hz=1.0  # tonal background window
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .core import BandPartition, ComplexSurface, ParameterHypothesis, SearchGrid, WIRangeError, partition_bands
from .estimate import estimate_range, estimate_wi, run_track, track_rmse
from .ingest import (
    StftParams,
    load_groundtruth,
    load_raw,
    load_surface,
    read_kv,
    save_groundtruth,
    save_surface,
    stft,
)
from .simulate import load_scene_config, scene_ranges, synth_surface
from .tonal import DEFAULT_NEIGHBORHOOD_HZ, estimate_range_tonal, estimate_wi_tonal
from .transform import build_striation_matrix, valid_striation_count
from .whiten import whiten

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; this CLI reserves 2 for data errors
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _rdot(text: str):
    vals = _floats(text)
    if not vals:
        raise argparse.ArgumentTypeError("empty range rate")
    return vals[0] if len(vals) == 1 else np.array(vals)


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# shared helpers


class _Band:
    def __init__(self, path):
        kv = read_kv(path) if path else {}
        self.tonal = _floats(kv.get("tonal_freqs", ""))
        self.guard = float(kv.get("guard_hz", 0.4))
        self.f_lo = float(kv["f_lo"]) if "f_lo" in kv else None
        self.f_hi = float(kv["f_hi"]) if "f_hi" in kv else None
        self.neighborhood = float(kv.get("neighborhood_hz", DEFAULT_NEIGHBORHOOD_HZ))

    def apply(self, surface: ComplexSurface, tonal_override=None) -> tuple[ComplexSurface, BandPartition]:
        if self.f_lo is not None or self.f_hi is not None:
            f = surface.freqs
            surface = surface.restrict(
                f[0] if self.f_lo is None else self.f_lo, f[-1] if self.f_hi is None else self.f_hi
            )
        tonal = self.tonal if tonal_override is None else tonal_override
        return surface, partition_bands(surface.freqs, tonal, self.guard)


def _header(cmd: str, args: argparse.Namespace) -> str:
    skip = {"func", "command"}
    parts = []
    for key in sorted(vars(args)):
        if key in skip:
            continue
        val = getattr(args, key)
        if val is None:
            continue
        if isinstance(val, np.ndarray):
            val = ",".join(_fmt(v) for v in val)
        elif isinstance(val, (list, tuple)):
            val = ",".join(str(v) for v in val)
        parts.append(f"{key}={val}")
    return f"# wirange {__version__} {cmd} " + " ".join(parts)


def _write_csv(path, header: str, columns: Sequence[str], rows, footer: Sequence[str] = ()):
    lines = [header, ",".join(columns)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _fmt(v) for v in row))
    lines.extend(footer)
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _grid(lo, hi, step, name):
    if not step > 0 or hi < lo:
        raise WIRangeError(f"{name} grid needs min <= max and a positive step")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _curve_out(args, cmd, result, col):
    footer = [f"argmax,{_fmt(result.argmax)}"]
    _write_csv(args.out, _header(cmd, args), [col, "loglik"], zip(result.grid, result.loglik), footer)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> None:
    overrides = {} if args.seed is None else {"seed": args.seed}
    cfg = load_scene_config(args.config, **overrides)
    surface, truth = synth_surface(cfg)
    save_surface(surface, args.out)
    if args.truth:
        save_groundtruth(args.truth, surface.times, scene_ranges(cfg), _header("simulate", args)[2:])


def cmd_stft(args) -> None:
    samples, fs = load_raw(args.raw)
    params = StftParams(fs, args.segment_s, args.zeropad_s, args.overlap)
    surface = stft(samples, params, (args.f_lo, args.f_hi))
    save_surface(surface, args.out)


def _hypothesis(args):
    return ParameterHypothesis(args.range, args.rdot, args.beta)


def _m_for_single(surface, q, band, m):
    if m is not None:
        return m
    grid = SearchGrid([q.range_m], q.range_rate, [q.beta])
    return valid_striation_count(surface.n_snapshots, grid, surface.t_delta, band)[0]


def cmd_transform_debug(args) -> None:
    surface, band = _Band(args.band_config).apply(load_surface(args.surface))
    q = _hypothesis(args)
    m = _m_for_single(surface, q, band, args.m)
    zmat = build_striation_matrix(surface, q, band, m)
    rows = []
    for i, l in enumerate(zmat.striation_ids):
        for j, k in enumerate(band.broadband):
            z = zmat.complex_vals[i, j]
            rows.append((str(int(l)), str(int(k)), band.freqs[k], z.real, z.imag, abs(z)))
    _write_csv(args.out, _header("transform-debug", args), ["l", "k", "f_hz", "re", "im", "abs"], rows)


def cmd_whiten_diag(args) -> None:
    surface, band = _Band(args.band_config).apply(load_surface(args.surface))
    q = _hypothesis(args)
    m = _m_for_single(surface, q, band, args.m)
    zmat = whiten(build_striation_matrix(surface, q, band, m))
    rows = [(str(int(k)), band.freqs[k], rho) for k, rho in zip(band.broadband, zmat.whitening.rho_hat)]
    _write_csv(args.out, _header("whiten-diag", args), ["k", "f_hz", "rho_hat"], rows)


def _tonal_freqs(args):
    return getattr(args, "tonal_freqs", None) or None


def cmd_estimate_range(args) -> None:
    cfg = _Band(args.band_config)
    surface, band = cfg.apply(load_surface(args.surface), _tonal_freqs(args))
    r_grid = _grid(args.rmin, args.rmax, args.rstep, "range")
    if args.method == "tonal":
        res = estimate_range_tonal(surface, args.rdot, args.beta, r_grid, band, args.m, cfg.neighborhood)
    else:
        res = estimate_range(surface, args.rdot, args.beta, r_grid, band, args.m)
    _curve_out(args, "estimate-range", res, "range_m")


def cmd_estimate_wi(args) -> None:
    cfg = _Band(args.band_config)
    surface, band = cfg.apply(load_surface(args.surface), _tonal_freqs(args))
    b_grid = np.round(_grid(args.bmin, args.bmax, args.bstep, "beta"), 12)
    if args.method == "tonal":
        res = estimate_wi_tonal(surface, args.range, args.rdot, b_grid, band, args.m, cfg.neighborhood)
    else:
        res = estimate_wi(surface, args.range, args.rdot, b_grid, band, args.m)
    _curve_out(args, "estimate-wi", res, "beta")


def cmd_track(args) -> None:
    cfg = _Band(args.band_config)
    surface, band = cfg.apply(load_surface(args.surface))
    truth = load_groundtruth(args.truth)
    center = load_groundtruth(args.center) if args.center else truth
    if args.end_times:
        ends = args.end_times
    else:
        ends = list(np.arange(surface.times[0] + args.every, surface.times[-1] + 1e-9, args.every))
    estimator = estimate_range
    if args.method == "tonal":
        def estimator(window, rdot, beta, r_grid, band, n_striations=None):
            return estimate_range_tonal(window, rdot, beta, r_grid, band, n_striations, cfg.neighborhood)

    points = run_track(
        surface, ends, args.rdot, args.beta, band, args.m_target, center, args.grid_frac, args.grid_step, truth, estimator
    )
    rows = []
    for p in points:
        status = "ok" if p.error is None else p.error.replace(",", ";")
        rows.append(
            (
                p.time_s,
                "" if p.range_hat is None else _fmt(p.range_hat),
                "" if p.range_true is None else _fmt(p.range_true),
                "" if p.signed_error is None else _fmt(p.signed_error),
                str(p.n_snapshots),
                status,
            )
        )
    try:
        footer = [f"rmse,{_fmt(track_rmse(points))}"]
    except WIRangeError:
        footer = ["rmse,"]
    cols = ["time_s", "range_hat_m", "range_true_m", "error_m", "n_snapshots", "status"]
    _write_csv(args.out, _header("track", args), cols, rows, footer)


def cmd_compare(args) -> None:
    cfg = _Band(args.band_config)
    surface, band = cfg.apply(load_surface(args.surface), _tonal_freqs(args))
    if args.param == "wi":
        if args.range is None:
            raise UsageError("compare --param wi needs --range")
        grid = np.round(_grid(args.bmin, args.bmax, args.bstep, "beta"), 12)
        bb = estimate_wi(surface, args.range, args.rdot, grid, band, args.m)
        tn = estimate_wi_tonal(surface, args.range, args.rdot, grid, band, args.m, cfg.neighborhood)
        col = "beta"
    else:
        if args.beta is None or args.rmin is None or args.rmax is None:
            raise UsageError("compare --param range needs --beta, --rmin and --rmax")
        grid = _grid(args.rmin, args.rmax, args.rstep, "range")
        bb = estimate_range(surface, args.rdot, args.beta, grid, band, args.m)
        tn = estimate_range_tonal(surface, args.rdot, args.beta, grid, band, args.m, cfg.neighborhood)
        col = "range_m"
    footer = [f"argmax_broadband,{_fmt(bb.argmax)}", f"argmax_tonal,{_fmt(tn.argmax)}"]
    _write_csv(
        args.out,
        _header("compare", args),
        [col, "loglik_broadband", "loglik_tonal"],
        zip(bb.grid, bb.loglik, tn.loglik),
        footer,
    )


# ---------------------------------------------------------------------------
# parser


def _common_estimate(p, need_range: bool, need_beta: bool):
    p.add_argument("--surface", required=True, help="input WIRF surface")
    p.add_argument("--band-config", help="key=value band config file")
    p.add_argument("--rdot", type=_rdot, required=True, help="range rate (m/s), scalar or one value per step")
    p.add_argument("--beta", type=float, required=need_beta, help="waveguide invariant")
    p.add_argument("--range", type=float, required=need_range, help="range at the last snapshot (m)")
    p.add_argument("--m", type=int, help="number of striations (default: largest valid)")
    p.add_argument("--out", required=True, help="output CSV ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wirange", description="Waveguide-invariant ranging from single-receiver spectrograms.")
    parser.add_argument("--version", action="version", version=f"wirange {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", help="draw a synthetic surface from a scene config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output WIRF surface")
    p.add_argument("--truth", help="output ground-truth CSV")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stft", help="raw float32 samples to a WIRF surface")
    p.add_argument("--raw", required=True, help="float32 samples with a .meta sidecar")
    p.add_argument("--out", required=True)
    p.add_argument("--f-lo", type=float, required=True)
    p.add_argument("--f-hi", type=float, required=True)
    p.add_argument("--segment-s", type=float, default=5.0)
    p.add_argument("--zeropad-s", type=float, default=5.0)
    p.add_argument("--overlap", type=float, default=0.5)
    p.set_defaults(func=cmd_stft)

    for name, func, help_ in (
        ("transform-debug", cmd_transform_debug, "dump the striation matrix of one hypothesis"),
        ("whiten-diag", cmd_whiten_diag, "per-bin scale ratios of one hypothesis"),
    ):
        p = sub.add_parser(name, help=help_)
        _common_estimate(p, need_range=True, need_beta=True)
        p.set_defaults(func=func)

    p = sub.add_parser("estimate-range", help="likelihood curve over a range grid")
    _common_estimate(p, need_range=False, need_beta=True)
    p.add_argument("--rmin", type=float, required=True)
    p.add_argument("--rmax", type=float, required=True)
    p.add_argument("--rstep", type=float, default=10.0)
    p.add_argument("--method", choices=("broadband", "tonal"), default="broadband")
    p.add_argument("--tonal-freqs", type=_floats, help="override the band config tonal list")
    p.set_defaults(func=cmd_estimate_range)

    p = sub.add_parser("estimate-wi", help="likelihood curve over a WI grid at known range")
    _common_estimate(p, need_range=True, need_beta=False)
    p.add_argument("--bmin", type=float, default=0.5)
    p.add_argument("--bmax", type=float, default=1.3)
    p.add_argument("--bstep", type=float, default=0.01)
    p.add_argument("--method", choices=("broadband", "tonal"), default="broadband")
    p.add_argument("--tonal-freqs", type=_floats)
    p.set_defaults(func=cmd_estimate_wi)

    p = sub.add_parser("track", help="range estimates over successive windows")
    p.add_argument("--surface", required=True)
    p.add_argument("--band-config")
    p.add_argument("--rdot", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--truth", required=True, help="ground-truth CSV for errors and RMSE")
    p.add_argument("--center", help="CSV of grid centres (default: the ground truth)")
    p.add_argument("--m-target", type=int, required=True)
    p.add_argument("--end-times", type=_floats, help="window end times (s)")
    p.add_argument("--every", type=float, default=60.0, help="window spacing (s) when --end-times is absent")
    p.add_argument("--grid-frac", type=float, default=0.4)
    p.add_argument("--grid-step", type=float, default=10.0)
    p.add_argument("--method", choices=("broadband", "tonal"), default="broadband")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("compare", help="broadband and tonal curves on one surface")
    _common_estimate(p, need_range=False, need_beta=False)
    p.add_argument("--param", choices=("range", "wi"), default="range")
    p.add_argument("--rmin", type=float)
    p.add_argument("--rmax", type=float)
    p.add_argument("--rstep", type=float, default=10.0)
    p.add_argument("--bmin", type=float, default=0.5)
    p.add_argument("--bmax", type=float, default=1.3)
    p.add_argument("--bstep", type=float, default=0.01)
    p.add_argument("--tonal-freqs", type=_floats)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        args.func(args)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip("\n") + "\n")
        return 1
    except (WIRangeError, OSError) as exc:
        sys.stderr.write(f"wirange: error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
