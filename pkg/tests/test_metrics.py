"""Event-matching metrics against quadratic brute-force oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strokenet.metrics import (aggregate_reports, avg_frame_distance,
                               cumulative_distance_histogram, delta_histogram,
                               delta_smooth, f_score, match_events,
                               stroke_rate_error)


# -- oracles ------------------------------------------------------------------

def brute_match(pred, truth, tol):
    tp = sum(1 for p in pred if any(abs(p - t) <= tol for t in truth))
    covered = sum(1 for t in truth if any(abs(p - t) <= tol for p in pred))
    return tp, len(pred) - tp, len(truth) - covered, covered


def brute_avg_distance(pred, truth):
    return float(np.mean([min(abs(p - t) for t in truth) for p in pred]))


def brute_histogram(pred, truth, max_bin=10):
    dists = [min((abs(p - t) for t in truth), default=np.inf) for p in pred]
    cum = [sum(1 for d in dists if d <= b) for b in range(max_bin)]
    far = sum(1 for d in dists if d >= max_bin)
    missed = sum(1 for t in truth
                 if min((abs(p - t) for p in pred), default=np.inf) >= max_bin)
    return cum, far, missed


events = st.lists(st.integers(0, 500), min_size=0, max_size=50, unique=True).map(sorted)


class TestFScore:
    @pytest.mark.parametrize("p,r,f", [(1, 1, 1.0), (0.5, 0.5, 0.5), (1, 0, 0.0)])
    def test_known_values(self, p, r, f):
        assert f_score(p, r) == pytest.approx(f)


class TestMatchEvents:
    def test_stated_example(self):
        rep = match_events([10, 50], [12, 80], tol=3)
        assert (rep.tp, rep.fp, rep.fn) == (1, 1, 1)
        assert rep.precision == 0.5 and rep.recall == 0.5
        assert rep.f_score == pytest.approx(0.5)

    def test_perfect_match(self):
        rep = match_events([4, 9, 20], [4, 9, 20])
        assert rep.f_score == 1.0 and rep.fp == rep.fn == 0

    def test_empty_sides_flagged_zero(self):
        rep = match_events([], [5, 10])
        assert rep.precision == 0.0 and rep.recall == 0.0 and rep.flagged
        rep = match_events([5], [])
        assert rep.recall == 0.0 and rep.flagged

    def test_one_prediction_can_cover_two_labels(self):
        rep = match_events([10], [8, 12], tol=3)
        assert rep.tp == 1 and rep.covered == 2 and rep.fn == 0
        assert rep.recall == 1.0

    @given(pred=events, truth=events, tol=st.integers(0, 10))
    @settings(max_examples=150, deadline=None)
    def test_matches_brute_force(self, pred, truth, tol):
        rep = match_events(pred, truth, tol)
        tp, fp, fn, covered = brute_match(pred, truth, tol)
        assert (rep.tp, rep.fp, rep.fn, rep.covered) == (tp, fp, fn, covered)

    @given(pred=events, truth=events, shift=st.integers(0, 100))
    @settings(max_examples=60, deadline=None)
    def test_shift_invariance(self, pred, truth, shift):
        a = match_events(pred, truth)
        b = match_events([p + shift for p in pred], [t + shift for t in truth])
        assert (a.tp, a.fp, a.fn) == (b.tp, b.fp, b.fn)

    @given(pred=events, truth=events)
    @settings(max_examples=60, deadline=None)
    def test_count_identities_and_monotone_tolerance(self, pred, truth):
        prev_f = -1.0
        for tol in (0, 2, 5, 9):
            rep = match_events(pred, truth, tol)
            assert rep.tp + rep.fp == len(pred)
            assert rep.covered + rep.fn == len(truth)
            if pred and truth:
                assert rep.f_score >= prev_f - 1e-12
                prev_f = rep.f_score


class TestAvgFrameDistance:
    def test_stated_example(self):
        assert avg_frame_distance([10, 50], [12, 80]) == 16.0

    def test_zero_for_exact(self):
        assert avg_frame_distance([3, 7], [3, 7]) == 0.0

    def test_empty_truth_rejected(self):
        with pytest.raises(ValueError):
            avg_frame_distance([3], [])

    @given(pred=events.filter(lambda e: len(e) > 0),
           truth=events.filter(lambda e: len(e) > 0))
    @settings(max_examples=100, deadline=None)
    def test_matches_brute_force(self, pred, truth):
        assert avg_frame_distance(pred, truth) == pytest.approx(
            brute_avg_distance(pred, truth))


class TestDeltaSmooth:
    def test_identical_signals(self):
        assert delta_smooth([0.1, 0.5], [0.1, 0.5]) == 0.0

    def test_hand_value(self):
        assert delta_smooth([0.0, 1.0], [0.5, 0.5]) == 0.5

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            delta_smooth([0.1], [0.1, 0.2])

    def test_delta_histogram_counts_every_point(self, rng):
        raw = rng.uniform(0, 1, 200)
        smoothed = raw + rng.normal(0, 0.03, 200)
        counts, edges = delta_histogram(raw, smoothed)
        assert counts.sum() == 200
        assert len(edges) == len(counts) + 1
        big = delta_histogram([0.0], [0.9])[0]
        assert big[-1] == 1  # overflow collects in the final bin


class TestCumulativeHistogram:
    def test_exact_predictions_all_in_bin_zero(self):
        cum, far, missed = cumulative_distance_histogram([5, 9], [5, 9])
        assert cum[0] == 2 and np.all(np.asarray(cum) == 2)
        assert far == 0 and missed == 0

    def test_far_prediction_lands_in_plus_column(self):
        cum, far, missed = cumulative_distance_histogram([0], [12])
        assert far == 1 and cum[9] == 0 and missed == 1

    @given(pred=events, truth=events)
    @settings(max_examples=100, deadline=None)
    def test_matches_brute_force(self, pred, truth):
        cum, far, missed = cumulative_distance_histogram(pred, truth)
        bcum, bfar, bmissed = brute_histogram(pred, truth)
        assert list(cum) == bcum and far == bfar and missed == bmissed


class TestStrokeRateError:
    def test_equal_counts(self):
        assert stroke_rate_error([1, 2, 3], [4, 5, 6]) == 0.0

    def test_five_percent(self):
        assert stroke_rate_error(list(range(19)), list(range(20))) == 0.05

    def test_all_missed(self):
        assert stroke_rate_error([], list(range(20))) == 1.0

    def test_empty_truth_rejected(self):
        with pytest.raises(ValueError):
            stroke_rate_error([1], [])


class TestAggregate:
    def test_pools_counts(self):
        a = match_events([10], [10], tol=3)
        b = match_events([5, 50], [8, 90], tol=3)
        agg = aggregate_reports([a, b])
        assert agg.tp == 2 and agg.fp == 1 and agg.fn == 1
        assert agg.precision == pytest.approx(2 / 3)

    def test_rejects_mixed_tolerances(self):
        with pytest.raises(ValueError):
            aggregate_reports([match_events([1], [1], 3), match_events([1], [1], 5)])
