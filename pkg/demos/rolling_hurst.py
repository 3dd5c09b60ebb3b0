"""Tracking a change of persistence with a rolling Hurst exponent.

Run: python demos/rolling_hurst.py
"""
import numpy as np

from mfcca import ReturnSeries, rolling_hurst
from mfcca.synthetic import fgn_array

half = 2**16
x = np.concatenate([fgn_array(0.3, half, np.random.default_rng(0)),
                    fgn_array(0.7, half, np.random.default_rng(1))])
track = rolling_hurst(ReturnSeries(x, 10), 2**13)
print(f"{track.H.size} windows of {track.window_points} points, step {track.step_points}")
for t, h, e in list(zip(track.times, track.H, track.stderr))[::6]:
    bar = "#" * int(round(40 * h))
    print(f"t={t // 10:>7d}  H={h:.3f} +/- {e:.3f}  {bar}")
