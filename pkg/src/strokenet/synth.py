"""Synthetic benchmark videos with exactly known event frames.

Two generators produce desk-scale stand-ins for real sports footage:

* ``gen_swim_like``: a bright body blob translates across the image while a
  smaller limb blob orbits it, phase-locked to a drifting stroke period.
  The limb's brightness and position peak exactly at each annotated event
  frame. Turns insert long event-free spans where the limb glides at its
  phase trough and the body reverses direction. A per-style trajectory and
  chroma tint make the styles distinguishable.
* ``gen_tennis_like``: sparse events (gap >= 40 frames), each marked by a
  fast arm swing whose angular speed peaks at the contact frame plus a ball
  that reverses off the racket; every fifth video is event-free background.

Both are pure functions of (spec, seed): the same spec reproduces the same
bytes. Optional pixel noise and black occlusion strips model nuisances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import VideoClip
from .signals import SWIM_STYLES, EventAnnotation

# Cycle order for assigning styles to videos (canonical one-hot order is
# SWIM_STYLES); a single-style dataset is all Freestyle.
_STYLE_CYCLE = ("Freestyle", "Backstroke", "Breaststroke", "Butterfly")

# (U, V) tint of the limb blob per canonical style index.
_STYLE_TINT = ((96, 168), (168, 96), (80, 80), (176, 176))


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic dataset."""

    n_videos: int = 20
    frames_per_video: int = 500
    image_h: int = 32
    image_w: int = 32
    period_range: tuple[float, float] = (14.0, 22.0)
    turn_prob: float = 0.15
    turn_len_range: tuple[int, int] = (60, 100)
    occlusion_prob: float = 0.02
    occlusion_span: int = 3
    n_styles: int = 4
    noise_level: float = 0.01
    seed: int = 0
    phase_offset: int | None = None  # fix the first event frame (tests)

    def __post_init__(self):
        if self.period_range[0] < 4:
            raise ValueError("minimum period must be >= 4 frames")
        if self.period_range[1] < self.period_range[0]:
            raise ValueError("period_range must be (low, high)")
        for p in (self.turn_prob, self.occlusion_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must be in [0, 1]")
        if not 1 <= self.n_styles <= 4:
            raise ValueError("n_styles must be in 1..4")
        if self.n_videos < 1 or self.frames_per_video < 8:
            raise ValueError("need at least 1 video of >= 8 frames")


def _swim_layout(spec: SynthSpec, rng: np.random.Generator):
    """Event frames, per-gap turn flags, and the local period at each event."""
    p_lo, p_hi = spec.period_range
    period = float(rng.uniform(p_lo, p_hi))
    if spec.phase_offset is not None:
        first = int(spec.phase_offset)
    else:
        first = int(round(period * rng.uniform(0.5, 1.0)))
    n = spec.frames_per_video
    events, periods, turns = [first], [period], []
    while True:
        is_turn = rng.random() < spec.turn_prob
        if is_turn:
            gap = int(rng.integers(spec.turn_len_range[0],
                                   spec.turn_len_range[1] + 1))
        else:
            gap = int(round(period))
        period = float(np.clip(period * np.exp(rng.normal(0.0, 0.03)), p_lo, p_hi))
        nxt = events[-1] + gap
        if nxt > n - 3:
            break
        events.append(nxt)
        periods.append(period)
        turns.append(is_turn)
    return events, turns, periods


def _swim_phase(events, turns, periods, n: int) -> np.ndarray:
    """Per-frame phase: 0 (mod 2 pi) exactly at events, +/- pi trough in turns."""
    phi = np.empty(n)
    first, last = events[0], events[-1]
    d = first - np.arange(first)
    phi[:first] = -np.minimum(2.0 * np.pi * d / periods[0], np.pi)
    for gi, (fa, fb) in enumerate(zip(events, events[1:])):
        gap = fb - fa
        rel = np.arange(gap, dtype=float)
        if turns[gi]:
            left = np.minimum(2.0 * np.pi * rel / periods[gi], np.pi)
            right = -np.minimum(2.0 * np.pi * (gap - rel) / periods[gi + 1], np.pi)
            phi[fa:fb] = np.where(rel <= gap / 2.0, left, right)
        else:
            phi[fa:fb] = 2.0 * np.pi * rel / gap
    d = np.arange(n - last, dtype=float)
    phi[last:] = np.minimum(2.0 * np.pi * d / periods[-1], np.pi)
    return phi


def _limb_offset(style_idx: int, phase: float, amp: float) -> tuple[int, int]:
    c, s = np.cos(phase), np.sin(phase)
    if style_idx == 0:    # Backstroke: vertical bob
        dy, dx = -amp * c, 0.0
    elif style_idx == 1:  # Breaststroke: horizontal sweep
        dy, dx = -amp / 2.0, amp * c
    elif style_idx == 2:  # Butterfly: full circle
        dy, dx = -amp * c, amp * s
    else:                 # Freestyle: narrow ellipse
        dy, dx = -amp * c, amp * s / 2.0
    return int(round(dy)), int(round(dx))


def _stamp(img: np.ndarray, y: int, x: int, half_h: int, half_w: int, yuv) -> None:
    h, w, _ = img.shape
    y0, y1 = max(0, y - half_h), min(h, y + half_h + 1)
    x0, x1 = max(0, x - half_w), min(w, x + half_w + 1)
    if y0 < y1 and x0 < x1:
        img[y0:y1, x0:x1] = yuv


def _finish_frame(img: np.ndarray, spec: SynthSpec, rng: np.random.Generator,
                  occl_left: int) -> tuple[np.ndarray, int]:
    h, w, _ = img.shape
    if spec.occlusion_prob > 0:
        if occl_left > 0:
            occl_left -= 1
        elif rng.random() < spec.occlusion_prob:
            occl_left = spec.occlusion_span
        if occl_left > 0:
            x0 = int(rng.integers(0, max(1, w - w // 3)))
            img[:, x0:x0 + w // 3] = 0.0
    if spec.noise_level > 0:
        img += rng.normal(0.0, 255.0 * spec.noise_level, img.shape)
    return np.clip(img, 0, 255).astype(np.uint8), occl_left


def gen_swim_like(spec: SynthSpec) -> tuple[list[VideoClip], list[EventAnnotation]]:
    """Swim-like dataset: periodic strokes, turns, styles; exact ground truth."""
    clips, annotations = [], []
    children = np.random.SeedSequence(spec.seed).spawn(spec.n_videos)
    h, w = spec.image_h, spec.image_w
    amp = max(3.0, h / 6.0)
    for vi in range(spec.n_videos):
        rng = np.random.default_rng(children[vi])
        style = _STYLE_CYCLE[vi % spec.n_styles]
        sidx = SWIM_STYLES.index(style)
        events, turns, periods = _swim_layout(spec, rng)
        phi = _swim_phase(events, turns, periods, spec.frames_per_video)
        flips = sorted(fa + (fb - fa) // 2
                       for (fa, fb), t in zip(zip(events, events[1:]), turns) if t)

        x_body = float(rng.uniform(0.25 * w, 0.75 * w))
        direction = float(rng.choice((-1.0, 1.0)))
        speed = 0.35 * w / 32.0
        y_body = h // 2
        frames = np.empty((spec.frames_per_video, h, w, 3), np.uint8)
        occl_left = 0
        flip_i = 0
        for t in range(spec.frames_per_video):
            while flip_i < len(flips) and flips[flip_i] == t:
                direction = -direction
                flip_i += 1
            x_body += direction * speed
            if x_body < 4 or x_body > w - 5:
                direction = -direction
                x_body = float(np.clip(x_body, 4, w - 5))
            img = np.empty((h, w, 3), np.float64)
            img[..., 0] = 60.0
            img[..., 1] = 128.0
            img[..., 2] = 128.0
            img[h // 8, :, 0] = 40.0    # lane ropes
            img[h - 1 - h // 8, :, 0] = 40.0
            bx = int(round(x_body))
            _stamp(img, y_body, bx, 2, 3, (150.0, 120.0, 136.0))
            dy, dx = _limb_offset(sidx, phi[t], amp)
            luma = 180.0 + 60.0 * np.cos(phi[t])
            u, v = _STYLE_TINT[sidx]
            _stamp(img, y_body + dy, bx + dx, 1, 1, (luma, float(u), float(v)))
            frames[t], occl_left = _finish_frame(img, spec, rng, occl_left)
        video_id = f"swim{vi:03d}"
        clips.append(VideoClip(video_id, frames, fps=50.0))
        annotations.append(EventAnnotation(video_id, tuple(events),
                                           spec.frames_per_video, style, fps=50.0))
    return clips, annotations


def _tennis_layout(spec: SynthSpec, rng: np.random.Generator,
                   background: bool) -> list[int]:
    if background:
        return []
    n = spec.frames_per_video
    p_lo, p_hi = spec.period_range
    first = int(round(rng.uniform(max(14.0, p_lo / 2.0), max(15.0, p_lo))))
    events = []
    nxt = first
    while nxt <= n - 10:
        events.append(nxt)
        gap = max(40, int(round(rng.uniform(p_lo, p_hi))))
        nxt += gap
    return events


def gen_tennis_like(spec: SynthSpec) -> tuple[list[VideoClip], list[EventAnnotation]]:
    """Tennis-like dataset: sparse swings with a motion burst at each event."""
    clips, annotations = [], []
    children = np.random.SeedSequence(spec.seed).spawn(spec.n_videos)
    h, w = spec.image_h, spec.image_w
    reach = 0.28 * h
    for vi in range(spec.n_videos):
        rng = np.random.default_rng(children[vi])
        background = spec.n_videos >= 5 and vi % 5 == 4
        events = _tennis_layout(spec, rng, background)
        cy, cx0 = int(0.55 * h), int(0.30 * w)
        frames = np.empty((spec.frames_per_video, h, w, 3), np.uint8)
        occl_left = 0
        for t in range(spec.frames_per_video):
            img = np.empty((h, w, 3), np.float64)
            img[..., 0] = 80.0
            img[..., 1] = 128.0
            img[..., 2] = 128.0
            img[:, w // 2, 0] = 55.0    # net
            cx = cx0 + int(round(2.0 * np.sin(2.0 * np.pi * t / 50.0)))
            _stamp(img, cy, cx, 3, 1, (140.0, 118.0, 140.0))
            for f in events:
                if abs(t - f) <= 4:
                    theta = (np.pi / 2.0) * np.sin(np.pi * (t - f) / 8.0)
                    for r in np.linspace(0.3, 1.0, 5):
                        ay = cy - int(round(r * reach * np.cos(theta)))
                        ax = cx + int(round(r * reach * np.sin(theta)))
                        _stamp(img, ay, ax, 0, 0, (210.0, 128.0, 128.0))
                if t == f:  # impact flash at racket-ball contact
                    _stamp(img, cy - int(round(reach)), cx, 2, 2,
                           (255.0, 140.0, 140.0))
                if -12 <= t - f < 0:    # ball incoming from the right
                    frac = (t - f + 12) / 12.0
                    by = cy - int(round(reach))
                    bx = int(round((w - 2) * (1 - frac) + cx * frac))
                    _stamp(img, by, bx, 1, 1, (250.0, 128.0, 128.0))
                elif 0 <= t - f <= 8:   # ball driven away, faster
                    by = cy - int(round(reach)) - 2 * (t - f)
                    bx = cx + int(round(3.0 * (t - f) * w / 32.0))
                    if 0 <= by < h and 0 <= bx < w:
                        _stamp(img, by, bx, 1, 1, (250.0, 128.0, 128.0))
            frames[t], occl_left = _finish_frame(img, spec, rng, occl_left)
        video_id = f"tennis{vi:03d}"
        clips.append(VideoClip(video_id, frames, fps=30.0))
        annotations.append(EventAnnotation(video_id, tuple(events),
                                           spec.frames_per_video, None, fps=30.0))
    return clips, annotations
