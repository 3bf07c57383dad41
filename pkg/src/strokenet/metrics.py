"""Evaluation metrics for event predictions against ground truth.

Matching is tolerance-based and deliberately not one-to-one: a prediction
is a true positive when any truth frame lies within the tolerance
(inclusive), and a truth frame is covered when any prediction lies within
the tolerance. Precision is therefore prediction-side, recall label-side,
and a single prediction may cover two close labels. Empty sides define the
affected ratio as 0 and flag the report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class MatchReport:
    """Match counts plus per-prediction nearest-truth distances.

    ``distances`` holds one non-negative int per prediction; -1 stands in
    for "no truth frames at all" (the report is flagged in that case).
    """

    tp: int
    fp: int
    fn: int
    covered: int
    precision: float
    recall: float
    f_score: float
    tolerance: int
    distances: list[int] = field(default_factory=list)
    flagged: bool = False

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn,
                "covered": self.covered, "precision": self.precision,
                "recall": self.recall, "f_score": self.f_score,
                "tolerance": self.tolerance, "flagged": self.flagged}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def f_score(precision: float, recall: float) -> float:
    """Harmonic mean; 0 when both sides are 0."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _nearest_distances(points: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """For each point, the distance to the nearest target (inf if none)."""
    points = np.asarray(points, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.int64)
    if points.size == 0:
        return np.zeros(0)
    if targets.size == 0:
        return np.full(points.size, np.inf)
    targets = np.sort(targets)
    pos = np.searchsorted(targets, points)
    left = targets[np.clip(pos - 1, 0, targets.size - 1)]
    right = targets[np.clip(pos, 0, targets.size - 1)]
    return np.minimum(np.abs(points - left), np.abs(points - right)).astype(float)


def match_events(pred, truth, tol: int = 3) -> MatchReport:
    """Tolerance-based match of predicted event frames against labels."""
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    pred_dist = _nearest_distances(pred, truth)
    truth_dist = _nearest_distances(truth, pred)
    tp = int(np.sum(pred_dist <= tol))
    fp = int(pred.size - tp)
    covered = int(np.sum(truth_dist <= tol))
    fn = int(truth.size - covered)
    precision = tp / pred.size if pred.size else 0.0
    recall = covered / truth.size if truth.size else 0.0
    return MatchReport(
        tp=tp, fp=fp, fn=fn, covered=covered,
        precision=precision, recall=recall,
        f_score=f_score(precision, recall), tolerance=tol,
        distances=[int(d) if np.isfinite(d) else -1 for d in pred_dist],
        flagged=pred.size == 0 or truth.size == 0)


def aggregate_reports(reports: list[MatchReport]) -> MatchReport:
    """Pool counts over videos evaluated at the same tolerance."""
    if not reports:
        raise ValueError("nothing to aggregate")
    tol = reports[0].tolerance
    if any(r.tolerance != tol for r in reports):
        raise ValueError("cannot aggregate reports at different tolerances")
    tp = sum(r.tp for r in reports)
    fp = sum(r.fp for r in reports)
    fn = sum(r.fn for r in reports)
    covered = sum(r.covered for r in reports)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = covered / (covered + fn) if covered + fn else 0.0
    dists: list[int] = []
    for r in reports:
        dists.extend(r.distances)
    return MatchReport(tp=tp, fp=fp, fn=fn, covered=covered,
                       precision=precision, recall=recall,
                       f_score=f_score(precision, recall), tolerance=tol,
                       distances=dists,
                       flagged=any(r.flagged for r in reports))


def avg_frame_distance(pred, truth) -> float:
    """Mean distance from each prediction to its nearest truth frame."""
    truth = np.asarray(truth)
    if truth.size == 0:
        raise ValueError("average frame distance needs a non-empty truth set")
    d = _nearest_distances(np.asarray(pred), truth)
    return float(d.mean()) if d.size else 0.0


def delta_smooth(raw, smoothed) -> float:
    """Mean pointwise |raw - smoothed|: how noisy the raw signal is."""
    raw = np.asarray(raw, dtype=float)
    smoothed = np.asarray(smoothed, dtype=float)
    if raw.shape != smoothed.shape:
        raise ValueError(f"length mismatch: {raw.shape} vs {smoothed.shape}")
    return float(np.mean(np.abs(raw - smoothed)))


def delta_histogram(raw, smoothed, bins: int = 20, top: float = 0.2):
    """Counts of pointwise |raw - smoothed| over equal bins in [0, top].

    The final bin also collects everything above ``top``. Feeds the
    noisiness histogram report alongside :func:`delta_smooth`.
    """
    deltas = np.abs(np.asarray(raw, dtype=float) - np.asarray(smoothed, dtype=float))
    edges = np.linspace(0.0, top, bins + 1)
    counts, _ = np.histogram(np.minimum(deltas, top - 1e-12), bins=edges)
    return counts, edges


def cumulative_distance_histogram(pred, truth, max_bin: int = 10):
    """Cumulative prediction counts by nearest-truth distance.

    Returns ``(cumulative, far, missed)``: ``cumulative[d]`` counts the
    predictions whose nearest truth is within d frames for d in
    0..max_bin-1, ``far`` counts predictions at max_bin or further (the
    "10+" column), and ``missed`` counts truth frames with no prediction
    closer than max_bin.
    """
    pred_dist = _nearest_distances(np.asarray(pred), np.asarray(truth))
    truth_dist = _nearest_distances(np.asarray(truth), np.asarray(pred))
    cumulative = np.array([int(np.sum(pred_dist <= d)) for d in range(max_bin)])
    far = int(np.sum(pred_dist >= max_bin))
    missed = int(np.sum(truth_dist >= max_bin))
    return cumulative, far, missed


def stroke_rate_error(pred, truth) -> float:
    """Relative error in the number of detected events."""
    n_truth = int(np.asarray(truth).size)
    if n_truth == 0:
        raise ValueError("stroke rate error needs a non-empty truth set")
    return abs(int(np.asarray(pred).size) - n_truth) / n_truth
