"""Loading, standardisation, augmentation, and minibatch sampling.

Frames live in a YUV-style byte encoding and are standardised per channel
with statistics computed over the whole training set. Training windows are
augmented with one zoom factor and one per-channel colour factor drawn per
window (identical across the frames of that window); colour scaling happens
before standardisation. Windows are assembled with a frame skip, and frames
past either end of the video replicate the edge frame so every frame index
can serve as a window centre.

Minibatches are drawn video-by-video: the source video of each window is
sampled proportionally to its frame count and every video keeps a
sequential cursor that wraps at the end, so disk-order access stays mostly
sequential. The whole stream is reproducible bit-exactly from the sampler's
RNG state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelConfig, StyleMode, TemporalMode, style_onehot
from .signals import SWIM_STYLES, EventAnnotation, TargetSignal


class DatasetError(ValueError):
    """Empty or degenerate dataset."""


@dataclass
class VideoClip:
    """Pre-decoded frames ``(N, H, W, 3)`` as uint8, plus metadata."""

    video_id: str
    frames: np.ndarray
    fps: float = 50.0

    def __post_init__(self):
        if self.frames.ndim != 4 or self.frames.shape[0] < 1 or self.frames.shape[3] != 3:
            raise DatasetError(f"frames must be (N, H, W, 3), got {self.frames.shape}")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class DatasetStats:
    """Per-channel mean and population standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.std) <= 0):
            raise DatasetError("channel std must be strictly positive")


def compute_stats(clips) -> DatasetStats:
    """Exact two-pass per-channel mean/std over every pixel of every clip."""
    clips = list(clips)
    if not clips:
        raise DatasetError("no clips to compute statistics from")
    count = 0
    total = np.zeros(3, np.float64)
    for clip in clips:
        f = clip.frames.reshape(-1, 3)
        total += f.sum(axis=0, dtype=np.float64)
        count += f.shape[0]
    mean = total / count
    ssq = np.zeros(3, np.float64)
    for clip in clips:
        d = clip.frames.reshape(-1, 3).astype(np.float64) - mean
        ssq += (d * d).sum(axis=0)
    std = np.sqrt(ssq / count)
    if np.any(std <= 0):
        raise DatasetError("a channel has zero variance; cannot standardise")
    return DatasetStats(mean, std)


def standardize(frames: np.ndarray, stats: DatasetStats) -> np.ndarray:
    """(x - mean) / std per channel, in float32."""
    out = (np.asarray(frames, dtype=np.float32) - stats.mean.astype(np.float32))
    out /= stats.std.astype(np.float32)
    return out


def unstandardize(frames: np.ndarray, stats: DatasetStats) -> np.ndarray:
    return (np.asarray(frames, dtype=np.float32) * stats.std.astype(np.float32)
            + stats.mean.astype(np.float32))


def zoom_crop(frames: np.ndarray, scale: float, off_y: int, off_x: int) -> np.ndarray:
    """Bilinear upscale of ``(T, H, W, C)`` by ``scale``, cropped back to H x W."""
    t, h, w, c = frames.shape
    zh, zw = int(round(h * scale)), int(round(w * scale))
    if zh == h and zw == w:
        return frames.copy()

    def axis_coords(size, zsize, off, n):
        grid = np.linspace(0.0, size - 1.0, zsize) if zsize > 1 else np.zeros(1)
        coords = grid[off:off + n]
        lo = np.floor(coords).astype(np.intp)
        frac = (coords - lo).astype(frames.dtype)
        hi = np.minimum(lo + 1, size - 1)
        return lo, hi, frac

    y0, y1, fy = axis_coords(h, zh, off_y, h)
    x0, x1, fx = axis_coords(w, zw, off_x, w)
    rows = frames[:, y0] * (1.0 - fy)[None, :, None, None] + frames[:, y1] * fy[None, :, None, None]
    out = rows[:, :, x0] * (1.0 - fx)[None, None, :, None] + rows[:, :, x1] * fx[None, None, :, None]
    return out.astype(frames.dtype)


def augment_zoom(frames: np.ndarray, rng: np.random.Generator,
                 max_zoom: float = 0.2) -> np.ndarray:
    """One uniform scale in [1, 1 + max_zoom] and one crop offset per window."""
    t, h, w, _ = frames.shape
    scale = float(rng.uniform(1.0, 1.0 + max_zoom))
    zh, zw = int(round(h * scale)), int(round(w * scale))
    off_y = int(rng.integers(0, zh - h + 1))
    off_x = int(rng.integers(0, zw - w + 1))
    return zoom_crop(frames, scale, off_y, off_x)


def scale_channels(frames: np.ndarray, factors: np.ndarray) -> np.ndarray:
    return frames * np.asarray(factors, dtype=frames.dtype)


def augment_color(frames: np.ndarray, rng: np.random.Generator,
                  low: float = 1.0 / 3.0, high: float = 3.0) -> np.ndarray:
    """Per-channel scaling by one log-uniform factor in [low, high] per window."""
    factors = np.exp(rng.uniform(np.log(low), np.log(high), size=3))
    return scale_channels(frames, factors)


def sample_source(frame_counts, rng: np.random.Generator) -> int:
    """Index sampled with probability proportional to frame count."""
    counts = np.asarray(frame_counts, dtype=np.float64)
    if counts.size == 0 or counts.sum() <= 0:
        raise DatasetError("no frames to sample from")
    return int(rng.choice(counts.size, p=counts / counts.sum()))


def window_indices(center: int, n_frames: int, half_width: int, skip: int) -> np.ndarray:
    """Raw frame indices of a window; out-of-range entries clip to the edges."""
    offs = np.arange(-half_width, half_width + 1) * skip
    return np.clip(center + offs, 0, n_frames - 1)


def assemble_window(frames: np.ndarray, mode: TemporalMode) -> np.ndarray:
    """Pack standardised window frames ``(T, H, W, 3)`` for one model input."""
    if mode is TemporalMode.SINGLE_FRAME:
        return frames[frames.shape[0] // 2]
    if mode is TemporalMode.EARLY_FUSION:
        t, h, w, c = frames.shape
        return frames.transpose(1, 2, 0, 3).reshape(h, w, t * c)
    return frames


@dataclass
class PreparedVideo:
    """A clip joined with its annotation and target signal."""

    clip: VideoClip
    annotation: EventAnnotation
    target: TargetSignal

    @property
    def video_id(self) -> str:
        return self.clip.video_id

    @property
    def style_index(self) -> int:
        if self.annotation.style is None:
            return -1
        return SWIM_STYLES.index(self.annotation.style)


def split_videos(video_ids, val_fraction: float, seed: int) -> tuple[list, list]:
    """Deterministic whole-video split; at least one video on each side."""
    ids = sorted(video_ids)
    if len(ids) < 2:
        raise DatasetError("need at least two videos to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ids))
    n_val = min(len(ids) - 1, max(1, int(round(len(ids) * val_fraction))))
    val = {ids[i] for i in perm[:n_val]}
    return [v for v in ids if v not in val], [v for v in ids if v in val]


class WindowSampler:
    """Deterministic stream of augmented training windows.

    Draw order per window is fixed (source video, zoom scale, zoom offsets,
    colour factors), so a given RNG state always reproduces the same stream.
    """

    def __init__(self, videos: list[PreparedVideo], cfg: ModelConfig,
                 stats: DatasetStats, rng: np.random.Generator,
                 augment: bool = True):
        if not videos:
            raise DatasetError("no videos to sample from")
        self.videos = videos
        self.cfg = cfg
        self.stats = stats
        self.rng = rng
        self.augment = augment
        self.cursors = [0] * len(videos)
        self._counts = [v.clip.n_frames for v in videos]

    def next_window(self):
        """One (input, target, style_index) triple; advances one cursor."""
        vi = sample_source(self._counts, self.rng)
        video = self.videos[vi]
        center = self.cursors[vi]
        self.cursors[vi] = (center + 1) % video.clip.n_frames
        cfg = self.cfg
        idx = window_indices(center, video.clip.n_frames,
                             cfg.window_half_width, cfg.frame_skip)
        frames = video.clip.frames[idx].astype(np.float32)
        if self.augment:
            frames = augment_color(frames, self.rng)
            frames = augment_zoom(frames, self.rng)
        frames = standardize(frames, self.stats)
        x = assemble_window(frames, cfg.temporal_mode)
        u = float(video.target.values[center])
        if cfg.style_mode is StyleMode.MULTI_CLASS:
            if video.annotation.style is None:
                raise DatasetError(
                    f"multi_class training needs styled annotations; "
                    f"{video.video_id} has none")
            y = u * style_onehot(video.annotation.style)
        else:
            y = np.array([u], np.float32)
        return x, y, video.style_index

    def next_batch(self, size: int):
        """Stacked batch of windows: (X, Y, style one-hots)."""
        xs, ys, styles = [], [], []
        for _ in range(size):
            x, y, si = self.next_window()
            xs.append(x)
            ys.append(y)
            styles.append(si)
        s = np.zeros((size, 4), np.float32)
        for row, si in enumerate(styles):
            if si >= 0:
                s[row, si] = 1.0
        return np.stack(xs), np.stack(ys), s

    # -- resumable state ---------------------------------------------------

    def state_dict(self) -> dict:
        return {"cursors": list(self.cursors),
                "rng_state": self.rng.bit_generator.state}

    def load_state(self, state: dict) -> None:
        if len(state["cursors"]) != len(self.cursors):
            raise DatasetError("sampler state does not match the dataset")
        self.cursors = [int(c) for c in state["cursors"]]
        self.rng.bit_generator.state = state["rng_state"]


def iter_eval_batches(video: PreparedVideo, cfg: ModelConfig,
                      stats: DatasetStats, batch_size: int = 256):
    """Batches of un-augmented windows covering every frame in order."""
    n = video.clip.n_frames
    for lo in range(0, n, batch_size):
        hi = min(n, lo + batch_size)
        xs = []
        for center in range(lo, hi):
            idx = window_indices(center, n, cfg.window_half_width, cfg.frame_skip)
            frames = standardize(video.clip.frames[idx].astype(np.float32), stats)
            xs.append(assemble_window(frames, cfg.temporal_mode))
        targets = video.target.values[lo:hi]
        yield np.stack(xs), targets
