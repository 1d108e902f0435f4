"""
Splitting the band into broadband and tonal bins
================================================

Ship noise between 42 and 49 Hz, sampled every 0.1 Hz, carries five
machinery lines. Bins within 0.4 Hz of a line are set aside and the rest
feed the broadband likelihood. The reference bin sits in the middle of
what remains.
"""

import numpy as np

from wirange import partition_bands
from wirange.simulate import REFERENCE_TONALS

freqs = np.round(np.arange(42.0, 49.0 + 1e-9, 0.1), 1)
band = partition_bands(freqs, REFERENCE_TONALS, guard_hz=0.4)

print(f"{freqs.size} bins, {band.broadband.size} broadband, {band.tonal.size} tonal")
print("tonal lines at", band.tonal_freqs.tolist(), "Hz")
print("reference bin at", band.reference_freq, "Hz")

# a row of the band: '#' broadband, 'T' tonal, '.' guard
row = np.full(freqs.size, ".")
row[band.broadband] = "#"
row[band.tonal] = "T"
print("".join(row))

# the guard is closed: a bin exactly 0.4 Hz from a line is still broadband
single = partition_bands(freqs, [45.5], 0.4)
dropped = sorted(set(range(freqs.size)) - set(single.broadband.tolist()))
print("a lone line at 45.5 Hz removes", freqs[dropped].tolist())
