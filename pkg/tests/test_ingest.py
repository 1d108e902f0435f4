import cmath
import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from wirange.core import ComplexSurface, WIRangeError
from wirange.ingest import (
    GroundTruth,
    StftParams,
    WirfFormatError,
    WirfTruncatedError,
    WirfValueError,
    WirfVersionError,
    load_groundtruth,
    load_raw,
    load_surface,
    save_groundtruth,
    save_raw,
    save_surface,
    stft,
    wirf_size,
)


def _hamming(m):
    return [0.54 - 0.46 * math.cos(2 * math.pi * i / (m - 1)) for i in range(m)]


def _dft_bin(x, k, n):
    return sum(v * cmath.exp(-2j * math.pi * k * i / n) for i, v in enumerate(x))


# ---------------------------------------------------------------------------
# STFT


def test_padded_resolution_is_a_tenth_of_a_hertz():
    fs = 100.0
    p = StftParams(fs, 5.0, 5.0, 0.5)
    assert p.t_delta == 2.5
    assert (p.segment_len, p.nfft, p.hop) == (500, 1000, 250)
    s = stft(np.random.default_rng(0).standard_normal(5000), p, (0.0, 50.0))
    assert s.df == pytest.approx(0.1, abs=1e-12)
    assert s.t_delta == 2.5
    # floor((len - seg) / hop) + 1
    assert s.n_snapshots == (5000 - 500) // 250 + 1


def test_dc_input_matches_window_sum_and_direct_dft():
    fs, c = 20.0, 3.0
    p = StftParams(fs, 5.0, 0.0, 0.5)  # unpadded: 100-point transform
    s = stft(np.full(400, c), p, (0.0, 10.0))
    w = _hamming(100)
    assert abs(s.values[0, 0]) == pytest.approx(c * sum(w), rel=1e-12)
    # the Hamming window leaks into neighbouring bins, so compare with a
    # direct DFT sum rather than with zero
    for k in (1, 2, 5, 17):
        assert abs(s.values[1, k]) == pytest.approx(abs(c * _dft_bin(w, k, 100)), abs=1e-9)


def test_sinusoid_at_bin_centre_is_the_peak():
    fs = 200.0
    p = StftParams(fs, 5.0, 5.0, 0.5)
    f = 45.3
    t = np.arange(int(fs * 60)) / fs
    s = stft(np.cos(2 * np.pi * f * t), p, (42.0, 49.0))
    mags = np.abs(s.values)
    for n in range(s.n_snapshots):
        best = max(range(s.n_bins), key=lambda k: mags[n, k])
        assert s.freqs[best] == pytest.approx(f, abs=1e-9)


def test_window_energy_scaling():
    rng = np.random.default_rng(7)
    fs = 10.0
    ratios = []
    for seg in (5.0, 10.0):
        p = StftParams(fs, seg, seg, 0.5)
        w = np.hamming(p.segment_len)
        acc = []
        for _ in range(100):
            s = stft(rng.standard_normal(int(fs * 200)), p, (0.5, 4.5))
            acc.append(np.mean(np.abs(s.values) ** 2))
        ratios.append(np.mean(acc) / np.sum(w**2))
    # white noise of unit variance: E|X|^2 = sum(w^2) for every bin
    assert ratios[0] == pytest.approx(ratios[1], rel=0.05)
    assert ratios[0] == pytest.approx(1.0, rel=0.05)


def test_stft_errors():
    p = StftParams(10.0, 5.0, 5.0, 0.5)
    with pytest.raises(WIRangeError):
        stft(np.ones(60), p, (0.0, 5.0))  # one snapshot only
    x = np.ones(500)
    x[3] = np.nan
    with pytest.raises(WIRangeError):
        stft(x, p, (0.0, 5.0))
    with pytest.raises(WIRangeError):
        stft(np.ones(500), p, (1.01, 1.05))  # no bin inside
    with pytest.raises(WIRangeError):
        stft(np.ones(500), p, (0.0, 6.0))  # beyond Nyquist
    with pytest.raises(WIRangeError):
        StftParams(10.0, 5.0, 5.0, 1.0)


# ---------------------------------------------------------------------------
# WIRF


def _surface(n=4, k=4, seed=0, meta=None):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    return ComplexSurface(z, 1.25, 2.5, 42.0, 0.1, meta or {})


def _same(a: ComplexSurface, b: ComplexSurface) -> bool:
    return (
        a.values.tobytes() == b.values.tobytes()
        and (a.t0, a.t_delta, a.f0, a.df) == (b.t0, b.t_delta, b.f0, b.df)
        and dict(a.meta) == dict(b.meta)
    )


def test_round_trip_4x4(tmp_path):
    s = _surface(meta={"seed": "3", "generator": "test"})
    save_surface(s, tmp_path / "s.wirf")
    back = load_surface(tmp_path / "s.wirf")
    assert _same(s, back)
    assert back == s


def test_payload_size_formula(tmp_path):
    s = _surface(212, 70)
    path = tmp_path / "s.wirf"
    save_surface(s, path)
    # 4-byte magic, three u32, four f64, then 16 bytes per complex value
    expected = 4 + 3 * 4 + 4 * 8 + 212 * 70 * 16
    assert path.stat().st_size == expected == wirf_size(212, 70)


def test_header_layout(tmp_path):
    path = tmp_path / "s.wirf"
    save_surface(_surface(3, 2), path)
    raw = path.read_bytes()
    assert raw[:4] == b"WIRF"
    assert struct.unpack("<III", raw[4:16]) == (1, 3, 2)
    assert struct.unpack("<dddd", raw[16:48]) == (1.25, 2.5, 42.0, 0.1)


def test_distinct_format_errors(tmp_path):
    path = tmp_path / "s.wirf"
    save_surface(_surface(), path)
    good = path.read_bytes()

    bad = tmp_path / "bad.wirf"
    bad.write_bytes(b"XXXX" + good[4:])
    with pytest.raises(WirfFormatError, match="magic"):
        load_surface(bad)

    bad.write_bytes(good[:4] + struct.pack("<I", 2) + good[8:])
    with pytest.raises(WirfVersionError):
        load_surface(bad)

    bad.write_bytes(good[:-8])
    with pytest.raises(WirfTruncatedError):
        load_surface(bad)
    bad.write_bytes(good[:20])
    with pytest.raises(WirfTruncatedError):
        load_surface(bad)

    bad.write_bytes(good + b"\0")
    with pytest.raises(WirfFormatError):
        load_surface(bad)

    bad.write_bytes(good[:48] + struct.pack("<d", float("nan")) + good[56:])
    with pytest.raises(WirfValueError):
        load_surface(bad)


@settings(max_examples=40, deadline=None)
@given(
    values=hnp.arrays(
        np.complex128,
        hnp.array_shapes(min_dims=2, max_dims=2, min_side=2, max_side=6),
        elements=st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e300),
    ),
    t0=st.floats(-1e6, 1e6),
    f0=st.floats(0, 1e4),
)
def test_round_trip_property(tmp_path_factory, values, t0, f0):
    s = ComplexSurface(values, t0, 2.5, f0, 0.1)
    path = tmp_path_factory.mktemp("rt") / "s.wirf"
    save_surface(s, path)
    assert _same(s, load_surface(path))


def test_raw_round_trip(tmp_path):
    x = np.linspace(-1, 1, 50, dtype=np.float32)
    save_raw(x, tmp_path / "a.f32", 8000)
    y, fs = load_raw(tmp_path / "a.f32")
    assert fs == 8000.0 and np.array_equal(y, x.astype(float))
    (tmp_path / "b.f32").write_bytes(x.tobytes())
    with pytest.raises(WIRangeError, match="sidecar"):
        load_raw(tmp_path / "b.f32")


# ---------------------------------------------------------------------------
# ground truth


def test_groundtruth_midpoint(tmp_path):
    path = tmp_path / "gt.csv"
    path.write_text("# comment\ntime_s,range_m\n0,1000\n10,1102\n")
    gt = load_groundtruth(path)
    assert gt.range_at(5.0) == pytest.approx(1051.0)
    assert len(gt) == 2
    with pytest.raises(WIRangeError):
        gt.range_at(11.0)


def test_groundtruth_errors(tmp_path):
    path = tmp_path / "gt.csv"
    path.write_text("0,1000\n")
    with pytest.raises(WIRangeError):
        load_groundtruth(path)
    path.write_text("0,1000\n10,1100\n5,1050\n")
    with pytest.raises(WIRangeError):
        load_groundtruth(path)


def test_groundtruth_slope(tmp_path):
    t = np.arange(0, 1801, 2.5)
    path = tmp_path / "gt.csv"
    save_groundtruth(path, t, 20_000 + 10.2 * t, comment="linear track")
    gt = load_groundtruth(path)
    h = 1.0
    for tm in (100.0, 900.0, 1700.0):
        slope = (gt.range_at(tm + h) - gt.range_at(tm - h)) / (2 * h)
        assert slope == pytest.approx(10.2, abs=1e-9)
    assert GroundTruth(list(gt)) == gt
