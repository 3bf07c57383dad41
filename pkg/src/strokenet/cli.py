"""Command-line pipeline: synth -> gen-signal -> train -> infer -> eval.

Every command is deterministic given its flags, config and seed, writes the
file formats documented in :mod:`strokenet.formats`, and exits 0 on success
or 1 with a single machine-readable JSON error line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import container, formats
from .config import ConfigError, RunConfig, config_to_text, load_config, parse_config
from .data import (DatasetStats, PreparedVideo, VideoClip, compute_stats,
                   split_videos)
from .discretise import midpoints, smooth, threshold_signal
from .metrics import (aggregate_reports, avg_frame_distance,
                      cumulative_distance_histogram, delta_histogram,
                      delta_smooth, match_events)
from .model import StyleMode, build_model, infer_style
from .signals import EventAnnotation, SignalKind, build_target_signal
from .synth import SynthSpec, gen_swim_like, gen_tennis_like
from .train import TrainRun, predict_signal, train, write_loss_csv


class CliError(RuntimeError):
    """User-facing command failure."""


# -- dataset assembly ---------------------------------------------------------

def _load_dataset(clips_dir, labels_path, run_cfg: RunConfig) -> list[PreparedVideo]:
    annotations = {a.video_id: a for a in formats.read_labels_csv(labels_path)}
    videos = []
    for ann in annotations.values():
        path = formats.clip_path(clips_dir, ann.video_id)
        if not path.exists():
            raise CliError(f"missing clip container {path}")
        frames = container.read_clip(path)
        clip = VideoClip(ann.video_id, frames.astype(np.uint8), fps=ann.fps)
        target = build_target_signal(ann, run_cfg.kind(),
                                     run_cfg.turn_threshold, run_cfg.fixed_period)
        videos.append(PreparedVideo(clip, ann, target))
    if not videos:
        raise CliError(f"no labelled clips found under {clips_dir}")
    return sorted(videos, key=lambda v: v.video_id)


def _checkpoint_entries(net, opt=None):
    entries = [(n, p.data) for n, p in net.named_parameters()]
    entries += [(n, b) for n, b in net.named_buffers()]
    if opt is not None:
        entries += opt.state_entries()
    return entries


def _stats_to_extra(stats: DatasetStats) -> dict:
    return {"mean": [float(m) for m in stats.mean],
            "std": [float(s) for s in stats.std]}


def _stats_from_extra(extra: dict) -> DatasetStats:
    return DatasetStats(np.array(extra["stats"]["mean"]),
                        np.array(extra["stats"]["std"]))


# -- commands -----------------------------------------------------------------

def cmd_synth(args) -> None:
    out = Path(args.out)
    (out / "clips").mkdir(parents=True, exist_ok=True)
    spec = SynthSpec(
        n_videos=args.videos, frames_per_video=args.frames,
        image_h=args.height, image_w=args.width,
        period_range=tuple(args.period_range),
        turn_prob=args.turn_prob, occlusion_prob=args.occlusion_prob,
        n_styles=args.styles, noise_level=args.noise, seed=args.seed)
    gen = gen_swim_like if args.preset == "swim" else gen_tennis_like
    clips, annotations = gen(spec)
    for clip in clips:
        container.write_clip(formats.clip_path(out / "clips", clip.video_id),
                             clip.frames)
    formats.write_labels_csv(out / "labels.csv", annotations)
    print(f"wrote {len(clips)} clips and labels.csv under {out}")


def cmd_gen_signal(args) -> None:
    annotations = formats.read_labels_csv(args.labels)
    try:
        kind = SignalKind(args.kind.replace("-", "_"))
    except ValueError as exc:
        raise CliError(f"unknown signal kind {args.kind!r}") from exc
    per_video = {}
    for ann in annotations:
        sig = build_target_signal(ann, kind, args.turn_threshold, args.period)
        per_video[ann.video_id] = sig.values
    formats.write_target_signals_csv(args.out, per_video)
    print(f"wrote target signals for {len(per_video)} videos to {args.out}")


def _train_once(run_cfg: RunConfig, out_dir: Path, resume: str | None):
    videos = _load_dataset(run_cfg.clips_dir, run_cfg.labels, run_cfg)
    first = videos[0].clip.frames
    cfg = run_cfg.model_config(input_h=first.shape[1], input_w=first.shape[2])
    run_cfg.input_h, run_cfg.input_w = cfg.input_h, cfg.input_w

    train_ids, val_ids = split_videos([v.video_id for v in videos],
                                      run_cfg.val_fraction, run_cfg.seed)
    by_id = {v.video_id: v for v in videos}
    train_videos = [by_id[i] for i in train_ids]
    val_videos = [by_id[i] for i in val_ids]
    stats = compute_stats([v.clip for v in train_videos])
    formats.write_stats_csv(out_dir / "stats.csv", stats)

    run = TrainRun(cfg=cfg, signal_kind=run_cfg.kind(), seed=run_cfg.seed,
                   batch_size=run_cfg.batch_size, steps=run_cfg.steps,
                   val_interval=run_cfg.val_interval, augment=run_cfg.augment,
                   per_style=run_cfg.per_style)

    resume_state = None
    prior_best = np.inf
    if resume:
        cfg_text, extra, entries = container.read_checkpoint(resume)
        if extra.get("sampler") is None:
            raise CliError(f"{resume} carries no resume state; resume from "
                           "last.ckpt, not best.ckpt")
        resume_state = {"entries": entries, "sampler": {
            "cursors": extra["sampler"]["cursors"],
            "rng_state": extra["sampler"]["rng_state"],
        }, "step": extra["step"]}
        if extra.get("best_val") is not None:
            prior_best = float(extra["best_val"])

    config_text = config_to_text(run_cfg)
    ckpt_meta = {"stats": _stats_to_extra(stats),
                 "train_ids": train_ids, "val_ids": val_ids}

    def callback(step, loss, val, net, opt, sampler):
        if val is not None:
            print(f"step {step}: train_loss={loss:.5f} val_loss={val:.5f}")
        cadence = run_cfg.checkpoint_interval
        if (cadence and step % cadence == 0) or step == run.steps:
            extra = dict(ckpt_meta, step=step, sampler=sampler.state_dict(),
                         best_val=None)
            container.write_checkpoint(out_dir / "last.ckpt", config_text, extra,
                                       _checkpoint_entries(net, opt))

    result = train(run, train_videos, val_videos, stats,
                   resume_state=resume_state, step_callback=callback)
    write_loss_csv(out_dir / "loss.csv", result.history)

    # the last.ckpt written by the callback lacks best_val; rewrite with it
    best_val = min(result.best_val, prior_best)
    extra = dict(ckpt_meta, step=run.steps, best_val=float(best_val),
                 sampler=None)
    if result.best_params and result.best_val <= prior_best:
        result.restore_best()
        container.write_checkpoint(out_dir / "best.ckpt", config_text, extra,
                                   _checkpoint_entries(result.net))
    return result, run_cfg, cfg, stats, val_videos


def cmd_train(args) -> None:
    try:
        run_cfg = load_config(args.config)
    except (OSError, ConfigError) as exc:
        raise CliError(str(exc)) from exc
    if args.out:
        run_cfg.out_dir = args.out
    if args.seed is not None:
        run_cfg.seed = args.seed
    out_dir = Path(run_cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result, run_cfg, cfg, stats, val_videos = _train_once(
        run_cfg, out_dir, args.resume)

    # score the best model on the validation split and append a results row
    params = run_cfg.discretise_params()
    reports, deltas = [], []
    for video in val_videos:
        out = predict_signal(result.net, video, stats)
        raw = out[:, infer_style(out)] if cfg.k == 4 else out[:, 0]
        smoothed = smooth(raw, params.smooth_window)
        binary = threshold_signal(smoothed, params.threshold)
        pred = midpoints(binary)
        reports.append(match_events(pred, video.annotation.frames,
                                    run_cfg.tolerance))
        deltas.append(delta_smooth(raw, smoothed))
    agg = aggregate_reports(reports)
    formats.append_results_row(
        out_dir / "results.csv", cfg.temporal_mode.value, cfg.style_mode.value,
        run_cfg.signal_kind, agg.f_score, float("nan") if agg.tp + agg.fp == 0
        else float(np.mean([d for r in reports for d in r.distances if d >= 0])),
        float(np.mean(deltas)))
    print(f"validation F-score {agg.f_score:.4f} at tolerance {run_cfg.tolerance}; "
          f"artifacts in {out_dir}")


def _rebuild_network(checkpoint_path):
    cfg_text, extra, entries = container.read_checkpoint(checkpoint_path)
    run_cfg = parse_config(cfg_text)
    cfg = run_cfg.model_config()
    net = build_model(cfg, seed=0)
    for name, p in net.named_parameters():
        p.data[...] = entries[name]
    net.load_buffers(entries)
    return net, run_cfg, cfg, _stats_from_extra(extra)


def cmd_infer(args) -> None:
    net, run_cfg, cfg, stats = _rebuild_network(args.checkpoint)
    clip_files = sorted(Path(args.clips).glob("*.dedv"))
    if not clip_files:
        raise CliError(f"no .dedv clips under {args.clips}")
    styles = {}
    if cfg.style_mode is StyleMode.STYLE_AS_INPUT:
        if not args.labels:
            raise CliError("style_as_input checkpoints need --labels for the styles")
        styles = {a.video_id: a for a in formats.read_labels_csv(args.labels)}

    window = args.smooth_window or run_cfg.smooth_window
    thr = args.threshold or run_cfg.threshold
    per_video, preds = {}, {}
    for path in clip_files:
        video_id = path.stem
        frames = container.read_clip(path).astype(np.uint8)
        clip = VideoClip(video_id, frames)
        ann = styles.get(video_id)
        if cfg.style_mode is StyleMode.STYLE_AS_INPUT and ann is None:
            raise CliError(f"no label row (and so no style) for {video_id}")
        dummy = ann or EventAnnotation(video_id, (), clip.n_frames)
        video = PreparedVideo(clip, dummy, build_target_signal(dummy, SignalKind.SQUARE))
        if frames.shape[1] != cfg.input_h or frames.shape[2] != cfg.input_w:
            raise CliError(f"{video_id}: clip is {frames.shape[1]}x{frames.shape[2]} "
                           f"but the checkpoint expects {cfg.input_h}x{cfg.input_w}")
        out = predict_signal(net, video, stats)
        raw = out[:, infer_style(out)] if cfg.k == 4 else out[:, 0]
        smoothed = smooth(raw, window)
        binary = threshold_signal(smoothed, thr if thr == "mean" else float(thr))
        per_video[video_id] = {"raw": raw, "smoothed": smoothed, "binary": binary}
        preds[video_id] = midpoints(binary)
    meta = {"temporal_mode": cfg.temporal_mode.value,
            "style_mode": cfg.style_mode.value,
            "signal_kind": run_cfg.signal_kind}
    formats.write_inferred_signals_csv(args.out, per_video, meta)
    if args.predictions_out:
        formats.write_predictions_csv(args.predictions_out, preds)
    print(f"wrote signals for {len(per_video)} videos to {args.out}")


def cmd_eval(args) -> None:
    annotations = {a.video_id: a for a in formats.read_labels_csv(args.labels)}
    meta = {"temporal_mode": "-", "style_mode": "-", "signal_kind": "-"}
    deltas = {}
    delta_hist = None
    if args.signals:
        per_video, file_meta = formats.read_inferred_signals_csv(args.signals)
        meta.update(file_meta)
        preds = {vid: midpoints(cols["binary"]) for vid, cols in per_video.items()}
        deltas = {vid: delta_smooth(cols["raw"], cols["smoothed"])
                  for vid, cols in per_video.items()}
        all_raw = np.concatenate([c["raw"] for c in per_video.values()])
        all_smooth = np.concatenate([c["smoothed"] for c in per_video.values()])
        counts, edges = delta_histogram(all_raw, all_smooth)
        delta_hist = {"counts": [int(c) for c in counts],
                      "bin_edges": [float(e) for e in edges]}
    else:
        preds = formats.read_predictions_csv(args.predictions)

    missing = sorted(set(preds) - set(annotations))
    if missing:
        raise CliError(f"predictions reference unlabelled videos: {missing}")

    reports, all_pred, all_truth, per_video_json = [], [], [], {}
    offset = 0
    for vid in sorted(preds):
        truth = np.array(annotations[vid].frames, np.int64)
        report = match_events(preds[vid], truth, args.tolerance)
        reports.append(report)
        per_video_json[vid] = report.to_dict()
        if truth.size:
            per_video_json[vid]["avg_frame_distance"] = (
                avg_frame_distance(preds[vid], truth))
        if vid in deltas:
            per_video_json[vid]["delta_smooth"] = deltas[vid]
        # offset per video so cross-video pairs cannot match in the pooled histogram
        all_pred.extend(int(p) + offset for p in preds[vid])
        all_truth.extend(int(t) + offset for t in truth)
        offset += annotations[vid].n_frames + 1000
    agg = aggregate_reports(reports)
    finite = [d for d in agg.distances if d >= 0]
    avg_dist = float(np.mean(finite)) if finite else 0.0
    mean_delta = float(np.mean(list(deltas.values()))) if deltas else None

    cumulative, far, missed = cumulative_distance_histogram(all_pred, all_truth)
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    report = dict(agg.to_dict(), avg_frame_distance=avg_dist,
                  delta_smooth=mean_delta, delta_histogram=delta_hist,
                  per_video=per_video_json)
    Path(f"{prefix}_report.json").write_text(json.dumps(report, indent=2,
                                                        sort_keys=True) + "\n")
    formats.append_results_row(f"{prefix}_row.csv", meta["temporal_mode"],
                               meta["style_mode"], meta["signal_kind"],
                               agg.f_score, avg_dist, mean_delta)
    formats.write_histogram_csv(f"{prefix}_hist.csv", cumulative, far, missed)
    print(f"F-score {agg.f_score:.4f} (tp={agg.tp} fp={agg.fp} fn={agg.fn}) "
          f"at tolerance {args.tolerance}")


def cmd_plot(args) -> None:
    from . import plots
    if args.kind == "loss":
        plots.plot_loss(args.infile, args.out)
    elif args.kind == "signals":
        if not args.video:
            raise CliError("plot signals needs --video")
        plots.plot_signals(args.infile, args.out, args.video, args.targets)
    else:
        plots.plot_histogram(args.infile, args.out)
    print(f"wrote {args.out}")


# -- argument parsing --------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strokenet",
        description="Detect discrete events in continuous video via signal regression.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--preset", choices=("swim", "tennis"), default="swim")
    p.add_argument("--out", required=True)
    p.add_argument("--videos", type=int, default=20)
    p.add_argument("--frames", type=int, default=500)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--styles", type=int, default=4)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--turn-prob", type=float, default=0.15)
    p.add_argument("--occlusion-prob", type=float, default=0.02)
    p.add_argument("--period-range", type=float, nargs=2, default=(14.0, 22.0))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("gen-signal", help="labels CSV -> target signals CSV")
    p.add_argument("--labels", required=True)
    p.add_argument("--kind", required=True,
                   choices=("square", "sine", "truncated-sine", "fixed-cosine"))
    p.add_argument("--out", required=True)
    p.add_argument("--turn-threshold", type=float, default=2.5)
    p.add_argument("--period", type=float, default=40.0)
    p.set_defaults(func=cmd_gen_signal)

    p = sub.add_parser("train", help="train a model from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="override out_dir")
    p.add_argument("--seed", type=int, default=None, help="override seed")
    p.add_argument("--resume", default=None, help="resume from last.ckpt")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="slide a checkpoint over clips")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--clips", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--predictions-out", default=None)
    p.add_argument("--labels", default=None,
                   help="labels CSV (needed for style_as_input models)")
    p.add_argument("--smooth-window", type=int, default=None)
    p.add_argument("--threshold", default=None,
                   help="'mean' or a number such as 0.5")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="score predictions against labels")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--signals", help="inferred signals CSV")
    group.add_argument("--predictions", help="predictions CSV")
    p.add_argument("--labels", required=True)
    p.add_argument("--tolerance", type=int, default=3)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot", help="render SVG figures from pipeline CSVs")
    p.add_argument("--kind", choices=("loss", "signals", "histogram"), required=True)
    p.add_argument("--infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--video", default=None)
    p.add_argument("--targets", default=None, help="target signals CSV overlay")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (CliError, ConfigError, formats.FormatError,
            container.ContainerError, ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
