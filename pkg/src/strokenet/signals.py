"""Continuous target signals built from sparse event annotations.

Sparse per-frame event labels are smoothed into a [0, 1] signal that a
regression network can fit. Four shapes are supported:

* ``square``: 1 within 3 frames (inclusive) of an event, else 0.
* ``sine``: a cosine fitted between consecutive events, rescaled to [0, 1].
* ``truncated_sine``: the same cosine clipped to its non-negative quarter
  periods around each event.
* ``fixed_cosine``: a fixed half-cosine of configurable period (default 40
  frames) centred on each event, for sparse-event data.

Every shape takes the exact value 1 on annotated frames. Long event-free
gaps ("turns") and the stretches before the first / after the last event
get a cosine descent of one half median period from the edge event and sit
at the signal minimum in between, so they map to 0 after rescaling.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

SWIM_STYLES = ("Backstroke", "Breaststroke", "Butterfly", "Freestyle")


class SignalKind(str, enum.Enum):
    SQUARE = "square"
    SINE = "sine"
    TRUNCATED_SINE = "truncated_sine"
    FIXED_COSINE = "fixed_cosine"


@dataclass(frozen=True)
class EventAnnotation:
    """Ground-truth event frames for one video.

    ``frames`` are 0-based, strictly increasing and all below ``n_frames``.
    ``style`` is one of :data:`SWIM_STYLES` or None for non-swim data.
    """

    video_id: str
    frames: tuple[int, ...]
    n_frames: int
    style: str | None = None
    fps: float = 50.0

    def __post_init__(self):
        frames = tuple(int(f) for f in self.frames)
        object.__setattr__(self, "frames", frames)
        if self.n_frames < 1:
            raise ValueError("n_frames must be positive")
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValueError("event frames must be strictly increasing")
        if frames and (frames[0] < 0 or frames[-1] >= self.n_frames):
            raise ValueError("event frames must lie in [0, n_frames)")
        if self.style is not None and self.style not in SWIM_STYLES:
            raise ValueError(f"unknown style {self.style!r}")


@dataclass(frozen=True, eq=False)
class TargetSignal:
    """Per-frame regression targets in [0, 1]."""

    values: np.ndarray
    kind: SignalKind


def square_labels(ann: EventAnnotation) -> TargetSignal:
    """1 iff within 3 frames (inclusive) of an annotated event."""
    values = np.zeros(ann.n_frames)
    for f in ann.frames:
        values[max(0, f - 3):f + 4] = 1.0
    return TargetSignal(values, SignalKind.SQUARE)


def gap_median(frames) -> float:
    """Lower median of the inter-event gaps.

    The lower median (element at index (k - 1) // 2 of the sorted gaps) keeps
    the estimate at the typical stroke period even when a single huge turn
    gap would drag an averaged median far upward.
    """
    gaps = np.diff(np.asarray(frames))
    if gaps.size == 0:
        raise ValueError("need at least 2 events for a gap median")
    return float(np.sort(gaps)[(gaps.size - 1) // 2])


def _edge_descent(dist: np.ndarray, period: float) -> np.ndarray:
    """Cosine falling from 1 to -1 over half a period, then held at -1."""
    return np.cos(2.0 * np.pi * np.minimum(dist / period, 0.5))


def cosine_intermediate(ann: EventAnnotation,
                        turn_threshold: float = 2.5) -> np.ndarray:
    """Per-frame cosine values in [-1, 1] peaking at every event.

    Between consecutive events a full cosine period is fitted to the gap.
    Gaps longer than ``turn_threshold`` times the median gap are treated as
    turns: a cosine of the median period descends from each edge event and
    the interior is held at -1. The stretches before the first and after
    the last event get the same edge treatment.
    """
    frames = ann.frames
    if len(frames) < 2:
        raise ValueError("need at least 2 events to fit cosines")
    n = ann.n_frames
    med = gap_median(frames)
    turn_gap = turn_threshold * med
    c = np.empty(n)

    idx = np.arange(frames[0])
    c[:frames[0]] = _edge_descent(frames[0] - idx, med)
    for fa, fb in zip(frames, frames[1:]):
        gap = fb - fa
        rel = np.arange(fa, fb) - fa
        if gap > turn_gap:
            left = _edge_descent(rel.astype(float), med)
            right = _edge_descent(float(gap) - rel, med)
            c[fa:fb] = np.maximum(left, right)
        else:
            c[fa:fb] = np.cos(2.0 * np.pi * rel / gap)
    idx = np.arange(frames[-1], n)
    c[frames[-1]:] = _edge_descent(idx - frames[-1], med)
    return c


def amplitude_transform(c: np.ndarray, a: float) -> TargetSignal:
    """Rescale intermediate cosines: ``y = max(a * c + (1 - a), 0)``.

    ``a = 1/2`` keeps the full wave in [0, 1] (sine labels); ``a = 1``
    clips everything beyond the quarter periods (truncated sine labels).
    """
    if not 0.0 < a <= 1.0:
        raise ValueError(f"amplitude must be in (0, 1], got {a}")
    values = np.maximum(a * np.asarray(c, dtype=float) + (1.0 - a), 0.0)
    kind = SignalKind.TRUNCATED_SINE if a == 1.0 else SignalKind.SINE
    return TargetSignal(values, kind)


def fixed_cosine_labels(ann: EventAnnotation, period: float = 40.0) -> TargetSignal:
    """A half-cosine of fixed period around each event, combined by max."""
    if period <= 0:
        raise ValueError(f"period must be positive, got {period}")
    quarter = period / 4.0
    values = np.zeros(ann.n_frames)
    idx = np.arange(ann.n_frames)
    for f in ann.frames:
        lo = max(0, int(np.ceil(f - quarter)))
        hi = min(ann.n_frames, int(np.floor(f + quarter)) + 1)
        seg = np.cos(2.0 * np.pi * (idx[lo:hi] - f) / period)
        np.maximum(values[lo:hi], seg, out=values[lo:hi])
    return TargetSignal(values, SignalKind.FIXED_COSINE)


def sine_labels(ann: EventAnnotation, turn_threshold: float = 2.5,
                fallback_period: float = 40.0) -> TargetSignal:
    """Full-wave cosine labels, a = 1/2; < 2 events fall back to fixed cosine."""
    if len(ann.frames) < 2:
        return fixed_cosine_labels(ann, fallback_period)
    return amplitude_transform(cosine_intermediate(ann, turn_threshold), 0.5)


def truncated_sine_labels(ann: EventAnnotation, turn_threshold: float = 2.5,
                          fallback_period: float = 40.0) -> TargetSignal:
    """Quarter-period cosine labels, a = 1; same fallback as sine labels."""
    if len(ann.frames) < 2:
        return fixed_cosine_labels(ann, fallback_period)
    return amplitude_transform(cosine_intermediate(ann, turn_threshold), 1.0)


def build_target_signal(ann: EventAnnotation, kind: SignalKind | str,
                        turn_threshold: float = 2.5,
                        period: float = 40.0) -> TargetSignal:
    """Build any label kind from an annotation."""
    kind = SignalKind(kind)
    if kind is SignalKind.SQUARE:
        return square_labels(ann)
    if kind is SignalKind.SINE:
        return sine_labels(ann, turn_threshold, period)
    if kind is SignalKind.TRUNCATED_SINE:
        return truncated_sine_labels(ann, turn_threshold, period)
    return fixed_cosine_labels(ann, period)
