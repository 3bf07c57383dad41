"""Text file formats: the CSV schemas shared across commands.

* labels CSV: one row per video,
  ``video_id,n_frames,fps,style,event_frames`` with the event frames
  space-separated (empty for none, style empty for non-swim data).
* target signals CSV: ``video_id,frame,target``.
* inferred signals CSV: ``video_id,frame,raw,smoothed,binary`` with an
  optional leading meta line ``#meta key=value ...``.
* predictions CSV: ``video_id,frame``.
* stats cache: ``channel,mean,std``.
* results table row: ``temporal_architecture,style_mode,target_signal,
  f_score,avg_frame_distance,delta_smooth``.
* cumulative histogram CSV: ``bin,count`` with bins 0..9, ``10+`` and
  ``missed_truths``.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from .data import DatasetStats
from .signals import EventAnnotation


class FormatError(ValueError):
    """Malformed CSV content."""


# -- labels ----------------------------------------------------------------

def write_labels_csv(path, annotations: list[EventAnnotation]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["video_id", "n_frames", "fps", "style", "event_frames"])
        for ann in annotations:
            writer.writerow([ann.video_id, ann.n_frames, f"{ann.fps:g}",
                             ann.style or "",
                             " ".join(str(f) for f in ann.frames)])


def read_labels_csv(path) -> list[EventAnnotation]:
    annotations = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"video_id", "n_frames", "fps", "style", "event_frames"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise FormatError(f"{path}: expected columns {sorted(required)}")
        for row in reader:
            frames = tuple(int(f) for f in row["event_frames"].split())
            annotations.append(EventAnnotation(
                video_id=row["video_id"], frames=frames,
                n_frames=int(row["n_frames"]),
                style=row["style"] or None, fps=float(row["fps"])))
    return annotations


# -- per-frame signals -------------------------------------------------------

def write_target_signals_csv(path, per_video: dict[str, np.ndarray]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["video_id", "frame", "target"])
        for video_id in sorted(per_video):
            for frame, value in enumerate(per_video[video_id]):
                writer.writerow([video_id, frame, f"{value:.6f}"])


def read_target_signals_csv(path) -> dict[str, np.ndarray]:
    return _read_per_frame(path, ["target"])


def write_inferred_signals_csv(path, per_video: dict[str, dict], meta: dict | None = None) -> None:
    """``per_video[vid]`` maps to arrays ``raw``, ``smoothed``, ``binary``."""
    with open(path, "w", newline="") as fh:
        if meta:
            fh.write("#meta " + " ".join(f"{k}={v}" for k, v in sorted(meta.items())) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["video_id", "frame", "raw", "smoothed", "binary"])
        for video_id in sorted(per_video):
            cols = per_video[video_id]
            for frame in range(len(cols["raw"])):
                writer.writerow([video_id, frame,
                                 f"{cols['raw'][frame]:.6f}",
                                 f"{cols['smoothed'][frame]:.6f}",
                                 int(cols["binary"][frame])])


def read_inferred_signals_csv(path) -> tuple[dict[str, dict], dict]:
    meta: dict[str, str] = {}
    with open(path, newline="") as fh:
        first = fh.readline()
        if first.startswith("#meta"):
            for pair in first[len("#meta"):].split():
                key, _, value = pair.partition("=")
                meta[key] = value
        else:
            fh.seek(0)
        reader = csv.DictReader(fh)
        per_video: dict[str, dict] = {}
        for row in reader:
            entry = per_video.setdefault(row["video_id"],
                                         {"raw": [], "smoothed": [], "binary": []})
            entry["raw"].append(float(row["raw"]))
            entry["smoothed"].append(float(row["smoothed"]))
            entry["binary"].append(int(row["binary"]))
    for entry in per_video.values():
        entry["raw"] = np.array(entry["raw"])
        entry["smoothed"] = np.array(entry["smoothed"])
        entry["binary"] = np.array(entry["binary"], np.uint8)
    return per_video, meta


def _read_per_frame(path, columns):
    out: dict[str, list] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.setdefault(row["video_id"], []).append(
                [float(row[c]) for c in columns])
    return {vid: np.array(rows).reshape(len(rows), -1).squeeze(axis=-1)
            if len(columns) == 1 else np.array(rows)
            for vid, rows in out.items()}


# -- predictions --------------------------------------------------------------

def write_predictions_csv(path, per_video: dict[str, np.ndarray]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["video_id", "frame"])
        for video_id in sorted(per_video):
            for frame in per_video[video_id]:
                writer.writerow([video_id, int(frame)])


def read_predictions_csv(path) -> dict[str, np.ndarray]:
    per_video: dict[str, list[int]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["video_id", "frame"]:
            raise FormatError(f"{path}: expected header video_id,frame")
        for row in reader:
            per_video.setdefault(row["video_id"], []).append(int(row["frame"]))
    return {vid: np.array(frames, np.int64) for vid, frames in per_video.items()}


# -- stats cache ---------------------------------------------------------------

def write_stats_csv(path, stats: DatasetStats) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("channel,mean,std\n")
        for c in range(3):
            fh.write(f"{c},{stats.mean[c]:.10f},{stats.std[c]:.10f}\n")


def read_stats_csv(path) -> DatasetStats:
    mean, std = np.zeros(3), np.zeros(3)
    with open(path, newline="") as fh:
        next(fh)
        for line in fh:
            c, m, s = line.rstrip("\n").split(",")
            mean[int(c)], std[int(c)] = float(m), float(s)
    return DatasetStats(mean, std)


# -- results table ----------------------------------------------------------

RESULTS_HEADER = ("temporal_architecture,style_mode,target_signal,"
                  "f_score,avg_frame_distance,delta_smooth")


def append_results_row(path, temporal: str, style: str, signal: str,
                       f: float, avg_dist: float, dsmooth: float | None) -> None:
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        if new:
            fh.write(RESULTS_HEADER + "\n")
        ds = f"{dsmooth:.6f}" if dsmooth is not None else ""
        fh.write(f"{temporal},{style},{signal},{f:.6f},{avg_dist:.6f},{ds}\n")


def write_histogram_csv(path, cumulative: np.ndarray, far: int, missed: int) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("bin,count\n")
        for d, c in enumerate(cumulative):
            fh.write(f"{d},{int(c)}\n")
        fh.write(f"10+,{far}\n")
        fh.write(f"missed_truths,{missed}\n")


def clip_path(clips_dir, video_id: str) -> Path:
    return Path(clips_dir) / f"{video_id}.dedv"
