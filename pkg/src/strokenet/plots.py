"""Static SVG figures rendered from the pipeline's CSV outputs."""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .formats import read_inferred_signals_csv, read_target_signals_csv
from .train import read_loss_csv


def plot_loss(loss_csv, out_path) -> None:
    rows = read_loss_csv(loss_csv)
    steps = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(steps, [r[1] for r in rows], label="train", lw=0.8)
    val = [(s, v) for s, _, v in rows if v is not None]
    if val:
        ax.plot([s for s, _ in val], [v for _, v in val], "o-", label="validation")
    ax.set_xlabel("step")
    ax.set_ylabel("MSE loss")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)


def plot_signals(signals_csv, out_path, video_id: str, targets_csv=None) -> None:
    per_video, _ = read_inferred_signals_csv(signals_csv)
    if video_id not in per_video:
        raise ValueError(f"video {video_id!r} not present in {signals_csv}")
    cols = per_video[video_id]
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.plot(cols["raw"], label="raw", lw=0.7, alpha=0.8)
    ax.plot(cols["smoothed"], label="smoothed", lw=1.2)
    if targets_csv:
        targets = read_target_signals_csv(targets_csv)
        if video_id in targets:
            ax.plot(targets[video_id], label="target", lw=0.9, ls="--")
    ax.set_xlabel("frame")
    ax.set_ylabel("signal")
    ax.set_title(video_id)
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)


def plot_histogram(hist_csv, out_path) -> None:
    labels, counts = [], []
    with open(hist_csv, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            labels.append(row["bin"])
            counts.append(int(row["count"]))
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(range(len(labels)), counts)
    ax.set_xticks(range(len(labels)), labels)
    ax.set_xlabel("frames to nearest label (cumulative)")
    ax.set_ylabel("predictions")
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)
