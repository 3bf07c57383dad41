"""Train one architecture against each target-signal shape.

Compares square, sine and truncated-sine labels (and the fixed half-cosine
on tennis-like data) by validation F-score, mirroring the label-smoothing
comparison experiment at desk scale.

Usage:
    python scripts/compare_target_signals.py --out runs/signals [--steps 1200]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

import strokenet as sn
from strokenet.discretise import DiscretiseParams, discretise, smooth
from strokenet.formats import append_results_row
from strokenet.metrics import aggregate_reports, delta_smooth, match_events
from strokenet.model import ModelConfig, StyleMode, TemporalMode
from strokenet.signals import SignalKind
from strokenet.train import TrainRun, predict_signal, train


def run_one(kind, videos_by_kind, stats, args, params):
    videos = videos_by_kind[kind]
    n_val = max(2, len(videos) // 5)
    train_videos, val_videos = videos[:-n_val], videos[-n_val:]
    cfg = ModelConfig(temporal_mode=TemporalMode.EARLY_FUSION,
                      style_mode=StyleMode.ALL_STYLES, window_half_width=2,
                      frame_skip=2, input_h=32, input_w=32,
                      blocks=(8, 16), fc_widths=(32,))
    run = TrainRun(cfg=cfg, signal_kind=kind, seed=args.seed,
                   batch_size=args.batch, steps=args.steps)
    result = train(run, train_videos, val_videos, stats)
    result.restore_best()
    reports, deltas = [], []
    for video in val_videos:
        raw = predict_signal(result.net, video, stats)[:, 0]
        deltas.append(delta_smooth(raw, smooth(raw, params.smooth_window)))
        pred = discretise(raw, params)
        reports.append(match_events(pred, video.annotation.frames, args.tolerance))
    return aggregate_reports(reports), float(np.mean(deltas))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/signals")
    parser.add_argument("--videos", type=int, default=25)
    parser.add_argument("--frames", type=int, default=500)
    parser.add_argument("--steps", type=int, default=1200)
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--tolerance", type=int, default=3)
    args = parser.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    spec = sn.SynthSpec(n_videos=args.videos, frames_per_video=args.frames,
                        seed=args.seed)
    clips, anns = sn.gen_swim_like(spec)
    stats = sn.compute_stats([c for c in clips[:-max(2, args.videos // 5)]])

    kinds = (SignalKind.SQUARE, SignalKind.SINE, SignalKind.TRUNCATED_SINE)
    videos_by_kind = {
        kind: [sn.PreparedVideo(c, a, sn.build_target_signal(a, kind))
               for c, a in zip(clips, anns)]
        for kind in kinds}
    for kind in kinds:
        params = (DiscretiseParams(threshold=0.5) if kind is SignalKind.SQUARE
                  else DiscretiseParams())
        agg, delta = run_one(kind, videos_by_kind, stats, args, params)
        append_results_row(out / "results.csv", "early_fusion", "all_styles",
                           kind.value, agg.f_score, 0.0, delta)
        print(f"{kind.value}: F={agg.f_score:.4f} delta={delta:.4f}")
    print(f"results in {out / 'results.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
