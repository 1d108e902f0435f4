"""
A synthetic scene and its striations
====================================

The simulator draws complex spectrogram samples whose magnitude follows an
interference pattern that is constant along ``f * r**(-beta)``. Projecting
one snapshot's range to every other frequency with the waveguide invariant
should land on the same pattern value, which is what the striation matrix
collects.
"""

import numpy as np

from wirange import ParameterHypothesis, build_striation_matrix, partition_bands, synth_surface
from wirange.simulate import REFERENCE_TONALS, channel_magnitude, reference_scene, scene_ranges
from wirange.transform import valid_striations, wi_project

cfg = reference_scene(n_snapshots=347, seed=0)
surface, truth = synth_surface(cfg)
band = partition_bands(surface.freqs, REFERENCE_TONALS, 0.4)
print(f"surface: {surface.n_snapshots} snapshots x {surface.n_bins} bins, dt {surface.t_delta} s")
print(f"truth: r_N = {truth.range_m:.0f} m, rdot = {truth.range_rate} m/s, beta = {truth.beta}")

# the same striation seen at 45.8 Hz and at 49.0 Hz
r_ref = truth.range_m
r_hi = wi_project(r_ref, 49.0, band.reference_freq, truth.beta)
print(f"range {r_ref:.0f} m at {band.reference_freq} Hz maps to {r_hi:.1f} m at 49.0 Hz")
g_ref = channel_magnitude(r_ref, band.reference_freq, cfg) / np.interp(band.reference_freq, cfg.freqs, cfg.freq_envelope)
g_hi = channel_magnitude(r_hi, 49.0, cfg) / np.interp(49.0, cfg.freqs, cfg.freq_envelope)
print(f"pattern value {g_ref:.6f} vs {g_hi:.6f}")

# only striations that stay inside the observed range span at every bin
# are usable; the newest ones run off the end at the upper frequencies
mask = valid_striations(surface.n_snapshots, truth, surface.t_delta, band)
ids = np.flatnonzero(mask) + 1
print(f"{mask.sum()} valid striations, snapshots {ids[0]}..{ids[-1]} of {surface.n_snapshots}")

zmat = build_striation_matrix(surface, truth, band, 212)
print("striation matrix", zmat.complex_vals.shape)

ranges = scene_ranges(cfg)
print(f"range axis {ranges[0]:.0f} .. {ranges[-1]:.0f} m")
