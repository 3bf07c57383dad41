"""Train the three temporal fusion modes on one synthetic dataset.

Produces a results table row per mode (F-score, average frame distance,
mean raw-vs-smoothed delta) plus loss-curve SVGs, mirroring the main
architecture comparison experiment at desk scale.

Usage:
    python scripts/compare_temporal_modes.py --out runs/temporal [--steps 1200]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

import strokenet as sn
from strokenet.discretise import discretise, smooth
from strokenet.formats import append_results_row
from strokenet.metrics import (aggregate_reports, avg_frame_distance,
                               delta_smooth, match_events)
from strokenet.model import ModelConfig, StyleMode, TemporalMode
from strokenet.train import TrainRun, predict_signal, train, write_loss_csv


def evaluate(net, videos, stats, tol):
    reports, dists, deltas = [], [], []
    for video in videos:
        raw = predict_signal(net, video, stats)[:, 0]
        smoothed = smooth(raw)
        deltas.append(delta_smooth(raw, smoothed))
        pred = discretise(raw)
        reports.append(match_events(pred, video.annotation.frames, tol))
        if len(pred) and len(video.annotation.frames):
            dists.append(avg_frame_distance(pred, video.annotation.frames))
    agg = aggregate_reports(reports)
    return agg, float(np.mean(dists)), float(np.mean(deltas))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/temporal")
    parser.add_argument("--videos", type=int, default=25)
    parser.add_argument("--frames", type=int, default=500)
    parser.add_argument("--steps", type=int, default=1200)
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--tolerance", type=int, default=3)
    parser.add_argument("--skip-conv3d", action="store_true",
                        help="conv3d is several times slower; skip it")
    args = parser.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    spec = sn.SynthSpec(n_videos=args.videos, frames_per_video=args.frames,
                        seed=args.seed)
    clips, anns = sn.gen_swim_like(spec)
    videos = [sn.PreparedVideo(c, a, sn.build_target_signal(a, "sine"))
              for c, a in zip(clips, anns)]
    n_val = max(2, args.videos // 5)
    train_videos, val_videos = videos[:-n_val], videos[-n_val:]
    stats = sn.compute_stats([v.clip for v in train_videos])

    modes = [TemporalMode.SINGLE_FRAME, TemporalMode.EARLY_FUSION]
    if not args.skip_conv3d:
        modes.append(TemporalMode.CONV3D)
    for mode in modes:
        w = 0 if mode is TemporalMode.SINGLE_FRAME else 2
        cfg = ModelConfig(temporal_mode=mode, style_mode=StyleMode.ALL_STYLES,
                          window_half_width=w, frame_skip=2,
                          input_h=spec.image_h, input_w=spec.image_w,
                          blocks=(8, 16), fc_widths=(32,))
        run = TrainRun(cfg=cfg, signal_kind="sine", seed=args.seed,
                       batch_size=args.batch, steps=args.steps)
        result = train(run, train_videos, val_videos, stats)
        result.restore_best()
        agg, dist, delta = evaluate(result.net, val_videos, stats, args.tolerance)
        append_results_row(out / "results.csv", mode.value, "all_styles", "sine",
                           agg.f_score, dist, delta)
        write_loss_csv(out / f"loss_{mode.value}.csv", result.history)
        print(f"{mode.value}: F={agg.f_score:.4f} dist={dist:.2f} "
              f"delta={delta:.4f} best_val={result.best_val:.5f}")
    print(f"results in {out / 'results.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
