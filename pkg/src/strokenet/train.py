"""Minibatch training of a configured network against a target signal.

Plain MSE regression, Adadelta steps, no weight regularisation. The loss
curve records every training step and a periodic validation loss; the
parameters with the best validation loss are retained alongside the final
ones. Training aborts with :class:`TrainingDiverged` on a non-finite loss.

Under a fixed seed the whole run is reproducible bit-exactly, including
resumption: a checkpoint carries the optimizer accumulators and the data
sampler state, so continuing from step k matches an uninterrupted run.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .data import DatasetStats, PreparedVideo, WindowSampler, iter_eval_batches
from .layers import MseLoss
from .model import ModelConfig, Network, StyleMode, build_model, style_onehot
from .optim import Adadelta
from .signals import SignalKind


class TrainingDiverged(RuntimeError):
    """The training loss became NaN or Inf."""


@dataclass
class TrainRun:
    """One training job: model config plus schedule."""

    cfg: ModelConfig
    signal_kind: SignalKind = SignalKind.SINE
    seed: int = 0
    batch_size: int = 64
    steps: int = 2000
    val_interval: int = 250
    augment: bool = True
    per_style: str = "Freestyle"  # dataset filter for style_mode=per_style

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        object.__setattr__(self, "signal_kind", SignalKind(self.signal_kind))


@dataclass
class TrainResult:
    net: Network
    history: list = field(default_factory=list)  # (step, train_loss, val_loss|None)
    best_val: float = np.inf
    best_step: int = 0
    best_params: dict = field(default_factory=dict)
    best_buffers: dict = field(default_factory=dict)

    def restore_best(self) -> Network:
        """Copy the best-validation parameters back into the network."""
        if self.best_params:
            for name, p in self.net.named_parameters():
                p.data[...] = self.best_params[name]
            self.net.load_buffers(self.best_buffers)
        return self.net


def select_style_videos(videos: list[PreparedVideo], style: str) -> list[PreparedVideo]:
    return [v for v in videos if v.annotation.style == style]


def evaluate_loss(net: Network, videos: list[PreparedVideo], stats: DatasetStats,
                  batch_size: int = 256) -> float:
    """Mean MSE over every window centre of the given videos (eval mode)."""
    if not videos:
        raise ValueError("empty evaluation split")
    cfg = net.cfg
    loss = MseLoss()
    total, count = 0.0, 0
    for video in videos:
        for x, targets in iter_eval_batches(video, cfg, stats, batch_size):
            style = None
            if cfg.style_mode is StyleMode.STYLE_AS_INPUT:
                style = np.zeros((x.shape[0], 4), np.float32)
                style[:, video.style_index] = 1.0
            out = net.forward(x, style=style, train=False)
            if cfg.k == 4:
                y = targets[:, None] * style_onehot(video.annotation.style)[None, :]
            else:
                y = targets[:, None]
            total += loss.forward(out, y.astype(out.dtype)) * out.size
            count += out.size
    return total / count


def predict_signal(net: Network, video: PreparedVideo, stats: DatasetStats,
                   batch_size: int = 256) -> np.ndarray:
    """Raw per-frame outputs ``(N, k)`` over a whole video (eval mode)."""
    cfg = net.cfg
    outs = []
    for x, _ in iter_eval_batches(video, cfg, stats, batch_size):
        style = None
        if cfg.style_mode is StyleMode.STYLE_AS_INPUT:
            style = np.zeros((x.shape[0], 4), np.float32)
            style[:, video.style_index] = 1.0
        outs.append(net.forward(x, style=style, train=False))
    return np.concatenate(outs, axis=0)


def train(run: TrainRun, train_videos: list[PreparedVideo],
          val_videos: list[PreparedVideo], stats: DatasetStats,
          resume_state: dict | None = None,
          step_callback=None) -> TrainResult:
    """Run the minibatch loop; returns the network plus the loss curve."""
    cfg = run.cfg
    if cfg.style_mode is StyleMode.PER_STYLE:
        train_videos = select_style_videos(train_videos, run.per_style)
        val_videos = select_style_videos(val_videos, run.per_style)

    ss = np.random.SeedSequence(run.seed)
    model_seed, data_seed = ss.spawn(2)
    net = build_model(cfg, int(model_seed.generate_state(1)[0]))
    opt = Adadelta(net.named_parameters())
    sampler = WindowSampler(train_videos, cfg, stats,
                            np.random.default_rng(data_seed), augment=run.augment)
    start_step = 0
    if resume_state is not None:
        entries = resume_state["entries"]
        for name, p in net.named_parameters():
            p.data[...] = entries[name]
        net.load_buffers(entries)
        opt.load_state_entries(entries)
        sampler.load_state(resume_state["sampler"])
        start_step = int(resume_state["step"])

    result = TrainResult(net=net)
    mse = MseLoss()
    use_style = cfg.style_mode is StyleMode.STYLE_AS_INPUT
    for step in range(start_step + 1, run.steps + 1):
        x, y, s = sampler.next_batch(run.batch_size)
        out = net.forward(x, style=s if use_style else None, train=True)
        loss = mse.forward(out, y.astype(out.dtype))
        if not np.isfinite(loss):
            raise TrainingDiverged(f"non-finite loss {loss} at step {step}")
        net.zero_grad()
        net.backward(mse.backward())
        opt.step()

        val = None
        if val_videos and (step % run.val_interval == 0 or step == run.steps):
            val = evaluate_loss(net, val_videos, stats)
            if val < result.best_val:
                result.best_val = val
                result.best_step = step
                result.best_params = {n: p.data.copy()
                                      for n, p in net.named_parameters()}
                result.best_buffers = {n: copy.deepcopy(b)
                                       for n, b in net.named_buffers()}
        result.history.append((step, loss, val))
        if step_callback is not None:
            step_callback(step, loss, val, net, opt, sampler)
    return result


def write_loss_csv(path, history) -> None:
    """CSV ``step,train_loss,val_loss`` (val column empty off-cadence)."""
    with open(path, "w") as fh:
        fh.write("step,train_loss,val_loss\n")
        for step, tr, val in history:
            vs = f"{val:.8f}" if val is not None else ""
            fh.write(f"{step},{tr:.8f},{vs}\n")


def read_loss_csv(path) -> list[tuple[int, float, float | None]]:
    rows = []
    with open(path) as fh:
        next(fh)
        for line in fh:
            step, tr, val = line.rstrip("\n").split(",")
            rows.append((int(step), float(tr), float(val) if val else None))
    return rows
