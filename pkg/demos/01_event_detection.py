"""Detecting noise events in a continuous level stream.

A monitor reports one overall dBA value per second. An event opens when
the level rises strictly above 65 dBA, stays open while the level holds
at or above 63 dBA, and is kept only if it lasts at least 8 seconds.
This script builds a synthetic hour-long stream with a few plane-like
bumps and some short blips, then runs the detector over it.

Run:  python demos/01_event_detection.py
"""

from datetime import datetime, timedelta, timezone

import numpy as np

from noisenet.ingest import LevelStream, detect_events

rng = np.random.default_rng(42)
n = 3600
levels = 52.0 + rng.normal(0.0, 1.5, size=n)  # ambient

# three sustained flyover-like bumps
for center, width, peak in ((400, 30, 78.0), (1500, 45, 72.0), (2900, 25, 69.0)):
    t = np.arange(n)
    bump = (peak - 52.0) * np.exp(-0.5 * ((t - center) / (width / 2.5)) ** 2)
    levels = np.maximum(levels, 52.0 + bump)

# two blips too short to count
levels[700:702] = 70.0
levels[2200:2206] = 66.0

start = datetime(2017, 6, 1, tzinfo=timezone.utc)
stream = LevelStream(
    tuple(start + timedelta(seconds=i) for i in range(n)),
    tuple(float(v) for v in levels),
)

windows = detect_events(stream)
print(f"stream: {n} seconds, ambient ~52 dBA, {len(windows)} events detected\n")
print(f"{'start':>6} {'end':>6} {'dur (s)':>8} {'peak dBA':>9}")
for s, e in windows:
    print(f"{s:>6} {e:>6} {e - s:>8} {max(levels[s:e]):>9.1f}")

print("\nThe 2-second 70 dBA blip at t=700 and the 6-second 66 dBA blip at")
print("t=2200 both exceeded the 65 dBA onset but not the 8-second sustain,")
print("so neither was stored as an event.")
