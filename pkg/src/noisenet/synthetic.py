"""Synthetic event generator for desk-scale verification.

Two stylized populations:

* "aircraft": long (20-90 s) broadband events centered around mid bands
  with a smooth raised-cosine rise and fall.
* "community": short (8-40 s) events that are either impulsive (a few
  1-3 s spikes) or narrowband hums confined to at most 6 adjacent low
  bands with a fast-attack plateau envelope.

Per-cell Gaussian level noise has std 1 + 4*difficulty dB. ``difficulty``
in [0, 1] linearly blends each class's parameter ranges toward the
midpoint of the two classes, so at 0 the classes are cleanly separable
and at 1 they largely overlap. The overall-LAeq row is the energetic sum
of the band rows.

``rule_classify`` is the fixed reference rule used to sanity-check
separability at difficulty 0: an event is called "aircraft" when its
band-energy centroid sits at or above band 15 and its smoothed overall
envelope correlates at >= 0.8 with a raised-cosine template. Community
hums sit below the centroid threshold; community impulses fail the
envelope correlation.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np

from .events import ClassLabel, NoiseEvent, SpectralFrame
from .ingest import Dataset

RULE_CENTROID_THRESHOLD = 15.0
RULE_SMOOTHNESS_THRESHOLD = 0.8

_START = datetime(2017, 6, 1, tzinfo=timezone.utc)


def _lerp(a: float, b: float, t: float) -> float:
    return a + (b - a) * t


def _blend(own: tuple[float, float], other: tuple[float, float], d: float):
    """Move a parameter range halfway toward the other class's at d=1."""
    mid = ((own[0] + other[0]) / 2.0, (own[1] + other[1]) / 2.0)
    return _lerp(own[0], mid[0], d), _lerp(own[1], mid[1], d)


def _raised_cosine(t: int) -> np.ndarray:
    x = np.arange(t, dtype=np.float64)
    return np.sin(np.pi * x / (t - 1)) ** 2


def _overall_row(bands: np.ndarray) -> np.ndarray:
    return 10.0 * np.log10(np.power(10.0, bands / 10.0).sum(axis=0))


def _band_profile(center: float, halfwidth: float) -> np.ndarray:
    b = np.arange(36, dtype=np.float64)
    return np.exp(-0.5 * ((b - center) / halfwidth) ** 2)


def _aircraft_event(rng: np.random.Generator, difficulty: float) -> np.ndarray:
    dur_lo, dur_hi = _blend((20, 90), (8, 40), difficulty)
    peak_lo, peak_hi = _blend((70, 85), (66, 80), difficulty)
    t = int(rng.integers(int(round(dur_lo)), int(round(dur_hi)) + 1))
    base = rng.uniform(38.0, 45.0)
    peak = rng.uniform(peak_lo, peak_hi)
    center = rng.uniform(17.0, 23.0)
    halfwidth = rng.uniform(6.0, 10.0)
    envelope = _raised_cosine(t)
    bands = base + (peak - base) * _band_profile(center, halfwidth)[:, None] * envelope[None, :]
    return bands


def _community_event(rng: np.random.Generator, difficulty: float) -> np.ndarray:
    dur_lo, dur_hi = _blend((8, 40), (20, 90), difficulty)
    peak_lo, peak_hi = _blend((66, 80), (70, 85), difficulty)
    t = int(rng.integers(int(round(dur_lo)), int(round(dur_hi)) + 1))
    base = rng.uniform(38.0, 45.0)
    peak = rng.uniform(peak_lo, peak_hi)
    bands = np.full((36, t), base)
    if rng.random() < 0.5:
        # impulsive: a few short broadband spikes, always narrow relative
        # to the event; longer and smoother as difficulty rises
        n_spikes = int(rng.integers(1, 4))
        width_cap = max(1, min(int(round(_lerp(3.0, 12.0, difficulty))),
                               int(round(t / _lerp(6.0, 2.5, difficulty)))))
        for _ in range(n_spikes):
            width = int(rng.integers(1, width_cap + 1))
            start = int(rng.integers(0, max(t - width, 1)))
            center = rng.uniform(5.0, 30.0)
            halfwidth = rng.uniform(5.0, 15.0)
            profile = _band_profile(center, halfwidth)
            shape = _raised_cosine(width + 2)[1:-1] if width > 1 else np.ones(1)
            seg = bands[:, start : start + width]
            seg[:] = np.maximum(
                seg, base + (peak - base) * profile[:, None] * shape[None, : seg.shape[1]]
            )
    else:
        # narrowband hum: at most ~6 adjacent low bands, fast attack,
        # sustained plateau with wobble
        center_lo, center_hi = _lerp(2.0, 10.0, difficulty), _lerp(10.0, 24.0, difficulty)
        center = rng.uniform(center_lo, center_hi)
        halfwidth = rng.uniform(0.6, _lerp(2.2, 7.0, difficulty))
        ramp = max(1, int(round(t * _lerp(0.08, 0.42, difficulty))))
        envelope = np.ones(t)
        up = np.linspace(0.0, 1.0, ramp + 1)[1:]
        envelope[:ramp] = up
        envelope[t - ramp :] = up[::-1]
        wobble = 1.0 + 0.06 * np.sin(np.arange(t) * rng.uniform(0.5, 1.5) + rng.uniform(0, 6.28))
        envelope = np.clip(envelope * wobble, 0.0, 1.0)
        bands += (peak - base) * _band_profile(center, halfwidth)[:, None] * envelope[None, :]
    return bands


def _to_event(
    bands: np.ndarray,
    rng: np.random.Generator,
    difficulty: float,
    event_id: str,
    class_: str,
    index: int,
) -> NoiseEvent:
    noise_std = 1.0 + 4.0 * difficulty
    bands = bands + rng.normal(0.0, noise_std, size=bands.shape)
    bands = np.clip(bands, 0.0, 130.0)
    overall = _overall_row(bands)
    start = _START + timedelta(minutes=index)
    frames = tuple(
        SpectralFrame(tuple(bands[:, j]), float(overall[j])) for j in range(bands.shape[1])
    )
    label = ClassLabel(class_=class_, provenance="manual", labeler="synth", labeled_at=start)
    return NoiseEvent(
        event_id=event_id,
        monitor_id=f"synth-{index % 7:02d}",
        start_time=start,
        frames=frames,
        label=label,
    )


def generate_synthetic_dataset(n_per_class: int, seed: int, difficulty: float = 0.25) -> Dataset:
    """Deterministic balanced dataset of stylized aircraft/community events."""
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    if not (0.0 <= difficulty <= 1.0):
        raise ValueError("difficulty must lie in [0, 1]")
    rng = np.random.default_rng(np.random.SeedSequence([seed, int(round(difficulty * 1000))]))
    events = []
    for i in range(n_per_class):
        events.append(
            _to_event(_aircraft_event(rng, difficulty), rng, difficulty,
                      f"synth-a-{seed}-{i:05d}", "aircraft", len(events))
        )
        events.append(
            _to_event(_community_event(rng, difficulty), rng, difficulty,
                      f"synth-c-{seed}-{i:05d}", "community", len(events))
        )
    return Dataset.from_events(events)


def _community_variant_event(rng: np.random.Generator, difficulty: float) -> np.ndarray:
    """A drifted community sub-population: sustained hums that creep toward
    aircraft territory (longer, mid-band, smoother) as difficulty rises.

    Models a new noise source appearing in the field (e.g. seasonal HVAC
    plant) that a model trained on the base mix has not seen.
    """
    t = int(rng.integers(int(round(_lerp(10, 30, difficulty))),
                         int(round(_lerp(30, 75, difficulty))) + 1))
    base = rng.uniform(38.0, 45.0)
    peak = rng.uniform(*_blend((66, 80), (70, 85), difficulty))
    center = rng.uniform(_lerp(6.0, 16.0, difficulty), _lerp(12.0, 28.0, difficulty))
    halfwidth = rng.uniform(1.0, _lerp(2.5, 9.0, difficulty))
    ramp = max(1, int(round(t * _lerp(0.10, 0.50, difficulty))))
    ramp = min(ramp, t // 2)
    envelope = np.ones(t)
    if ramp >= 1:
        up = np.linspace(0.0, 1.0, ramp + 1)[1:]
        envelope[:ramp] = up
        envelope[t - ramp :] = up[::-1]
    wobble = 1.0 + 0.05 * np.sin(np.arange(t) * rng.uniform(0.5, 1.5) + rng.uniform(0, 6.28))
    envelope = np.clip(envelope * wobble, 0.0, 1.0)
    bands = np.full((36, t), base)
    bands += (peak - base) * _band_profile(center, halfwidth)[:, None] * envelope[None, :]
    return bands


def generate_community_variant(n: int, seed: int, difficulty: float = 0.6) -> Dataset:
    """Community-only drifted events (for active-learning experiments)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 777, int(round(difficulty * 1000))]))
    events = [
        _to_event(_community_variant_event(rng, difficulty), rng, difficulty,
                  f"variant-c-{seed}-{i:05d}", "community", i)
        for i in range(n)
    ]
    return Dataset.from_events(events)


def band_energy_centroid(event: NoiseEvent) -> float:
    """Energy-weighted mean band index over the 36 band rows."""
    bands = event.rows()[:36]
    energy = np.power(10.0, bands / 10.0).sum(axis=1)
    return float((np.arange(36) * energy).sum() / energy.sum())


def envelope_smoothness(event: NoiseEvent) -> float:
    """Correlation of the smoothed overall envelope with a raised cosine."""
    overall = event.rows()[36]
    t = len(overall)
    width = max(1, min(5, t // 8))
    kernel = np.ones(width) / width
    smooth = np.convolve(overall, kernel, mode="same")
    template = _raised_cosine(t)
    s = smooth - smooth.mean()
    tm = template - template.mean()
    denom = np.sqrt((s * s).sum() * (tm * tm).sum())
    if denom == 0.0:
        return 0.0
    return float((s * tm).sum() / denom)


def rule_classify(event: NoiseEvent) -> str:
    """Fixed reference rule: mid-band centroid AND smooth rise-fall => aircraft."""
    if (
        band_energy_centroid(event) >= RULE_CENTROID_THRESHOLD
        and envelope_smoothness(event) >= RULE_SMOOTHNESS_THRESHOLD
    ):
        return "aircraft"
    return "community"
