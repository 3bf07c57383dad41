"""Turn a predicted per-frame signal back into exact event frames.

Three steps: smooth the signal with a triangular weighted moving average
(width 9 by default; edge windows renormalise over the available samples),
threshold it at its own mean (or at a fixed value, 0.5 for sparse-event
data) into a square wave, and emit the middle frame of every unbroken run
of 1s. Ties are fixed for determinism: thresholding uses >=, and even-length
runs take the lower middle frame.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

THRESHOLD_MEAN = "mean"


@dataclass(frozen=True)
class DiscretiseParams:
    smooth_window: int = 9
    threshold: str | float = THRESHOLD_MEAN
    max_run_length: int = 0  # 0 = unlimited

    def __post_init__(self):
        if self.threshold != THRESHOLD_MEAN:
            object.__setattr__(self, "threshold", float(self.threshold))


def smooth(values: np.ndarray, window: int = 9) -> np.ndarray:
    """Triangular weighted moving average, renormalised at the edges."""
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window}")
    values = np.asarray(values, dtype=float)
    half = window // 2
    weights = (half + 1.0) - np.abs(np.arange(-half, half + 1))
    num = np.convolve(values, weights, mode="same")
    den = np.convolve(np.ones_like(values), weights, mode="same")
    return num / den


def threshold_signal(values: np.ndarray, mode: str | float = THRESHOLD_MEAN) -> np.ndarray:
    """Binary wave: 1 where the value is >= the threshold."""
    values = np.asarray(values, dtype=float)
    if mode == THRESHOLD_MEAN:
        thr = values.mean()
        if values.size and np.all(values == values[0]):
            warnings.warn("constant signal under mean thresholding is degenerate; "
                          "the whole signal becomes one run", stacklevel=2)
    else:
        thr = float(mode)
    return (values >= thr).astype(np.uint8)


def midpoints(binary: np.ndarray) -> np.ndarray:
    """Middle frame (lower middle for even runs) of each run of 1s."""
    b = np.asarray(binary).astype(np.int8)
    edges = np.diff(np.concatenate(([0], b, [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return (starts + ends) // 2


def run_lengths(binary: np.ndarray) -> np.ndarray:
    b = np.asarray(binary).astype(np.int8)
    edges = np.diff(np.concatenate(([0], b, [0])))
    return np.flatnonzero(edges == -1) - np.flatnonzero(edges == 1)


def discretise(values: np.ndarray,
               params: DiscretiseParams = DiscretiseParams()) -> np.ndarray:
    """Smoothed, thresholded run midpoints of a raw signal."""
    smoothed = smooth(values, params.smooth_window)
    binary = threshold_signal(smoothed, params.threshold)
    mids = midpoints(binary)
    if params.max_run_length > 0:
        keep = run_lengths(binary) <= params.max_run_length
        mids = mids[keep]
    return mids
