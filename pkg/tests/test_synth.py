"""Synthetic generators: exact ground truth, determinism, solvability."""

import numpy as np
import pytest

from strokenet.signals import SWIM_STYLES
from strokenet.synth import SynthSpec, gen_swim_like, gen_tennis_like


def small_spec(**kw):
    base = dict(n_videos=4, frames_per_video=200, noise_level=0.0,
                occlusion_prob=0.0, turn_prob=0.0, seed=11)
    base.update(kw)
    return SynthSpec(**base)


class TestSpecValidation:
    def test_rejects_tiny_period(self):
        with pytest.raises(ValueError):
            SynthSpec(period_range=(3, 10))

    def test_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            SynthSpec(turn_prob=1.5)


class TestSwimLike:
    def test_fixed_period_and_offset_give_exact_phase_arithmetic(self):
        spec = small_spec(n_videos=1, period_range=(20.0, 20.0), phase_offset=10)
        _, anns = gen_swim_like(spec)
        assert anns[0].frames == tuple(range(10, 200, 20))
        assert len(anns[0].frames) == 10

    def test_same_seed_bit_identical(self):
        spec = small_spec(noise_level=0.02, occlusion_prob=0.05, turn_prob=0.2)
        a_clips, a_anns = gen_swim_like(spec)
        b_clips, b_anns = gen_swim_like(spec)
        for ca, cb in zip(a_clips, b_clips):
            assert np.array_equal(ca.frames, cb.frames)
        assert [a.frames for a in a_anns] == [b.frames for b in b_anns]

    def test_different_seed_differs(self):
        a, _ = gen_swim_like(small_spec(seed=1, noise_level=0.01))
        b, _ = gen_swim_like(small_spec(seed=2, noise_level=0.01))
        assert not np.array_equal(a[0].frames, b[0].frames)

    def test_styles_cycle_over_variants(self):
        _, anns = gen_swim_like(small_spec(n_videos=8, n_styles=4))
        styles = [a.style for a in anns]
        assert styles[:4] == styles[4:]
        assert len(set(styles[:4])) == 4
        assert all(s in SWIM_STYLES for s in styles)

    def test_single_style_dataset_is_freestyle(self):
        _, anns = gen_swim_like(small_spec(n_styles=1))
        assert all(a.style == "Freestyle" for a in anns)

    def test_events_strictly_increasing_with_min_gap(self):
        spec = SynthSpec(n_videos=6, frames_per_video=400, turn_prob=0.3, seed=5)
        _, anns = gen_swim_like(spec)
        for ann in anns:
            gaps = np.diff(ann.frames)
            assert np.all(gaps >= round(spec.period_range[0]))

    def test_clip_shape_and_dtype(self):
        clips, _ = gen_swim_like(small_spec(n_videos=1))
        assert clips[0].frames.shape == (200, 32, 32, 3)
        assert clips[0].frames.dtype == np.uint8

    def test_phase_detector_oracle_recovers_all_events(self):
        """Brightest-pixel phase peaks recover 100% of events, noise-free.

        The detector is independent of the CNN: the limb's peak luminance
        coincides with each annotated frame by construction, so local maxima
        of the per-frame max-luma signal are exactly the events.
        """
        spec = SynthSpec(n_videos=6, frames_per_video=300, noise_level=0.0,
                         occlusion_prob=0.0, turn_prob=0.2, seed=21)
        clips, anns = gen_swim_like(spec)
        for clip, ann in zip(clips, anns):
            luma = clip.frames[..., 0].reshape(clip.n_frames, -1).max(axis=1)
            peaks = [t for t in range(1, clip.n_frames - 1)
                     if luma[t] > 200 and luma[t] >= luma[t - 1]
                     and luma[t] > luma[t + 1]]
            assert len(peaks) == len(ann.frames)
            assert np.all(np.abs(np.array(peaks) - np.array(ann.frames)) <= 1)

    def test_occlusions_black_out_strips(self):
        spec = small_spec(n_videos=1, occlusion_prob=1.0)
        clips, _ = gen_swim_like(spec)
        frame = clips[0].frames[5]
        cols = np.flatnonzero(np.all(frame == 0, axis=(0, 2)))
        assert len(cols) >= frame.shape[1] // 4


class TestTennisLike:
    def test_min_gap_at_least_40(self):
        spec = SynthSpec(n_videos=8, frames_per_video=600,
                         period_range=(45.0, 80.0), seed=3, n_styles=1)
        _, anns = gen_tennis_like(spec)
        assert any(len(a.frames) >= 2 for a in anns)
        for ann in anns:
            if len(ann.frames) > 1:
                assert np.diff(ann.frames).min() >= 40

    def test_every_fifth_video_is_background(self):
        spec = SynthSpec(n_videos=10, frames_per_video=300,
                         period_range=(50.0, 90.0), seed=7)
        _, anns = gen_tennis_like(spec)
        assert anns[4].frames == () and anns[9].frames == ()

    def test_huge_period_gives_background_only(self):
        spec = SynthSpec(n_videos=3, frames_per_video=100,
                         period_range=(5000.0, 6000.0), seed=1)
        _, anns = gen_tennis_like(spec)
        assert all(a.frames == () for a in anns)

    def test_style_is_none(self):
        spec = SynthSpec(n_videos=2, frames_per_video=200,
                         period_range=(50.0, 90.0), seed=2)
        _, anns = gen_tennis_like(spec)
        assert all(a.style is None for a in anns)

    def test_motion_energy_peaks_at_events(self):
        """Frame-difference energy spikes within 2 frames of each contact."""
        spec = SynthSpec(n_videos=4, frames_per_video=500, noise_level=0.0,
                         occlusion_prob=0.0, period_range=(60.0, 110.0), seed=9)
        clips, anns = gen_tennis_like(spec)
        checked = 0
        for clip, ann in zip(clips, anns):
            f32 = clip.frames.astype(np.float32)
            energy = ((f32[1:] - f32[:-1]) ** 2).sum(axis=(1, 2, 3))
            energy = np.concatenate([[0.0], energy])
            for f in ann.frames:
                lo, hi = max(0, f - 6), min(clip.n_frames, f + 7)
                peak = lo + int(np.argmax(energy[lo:hi]))
                assert abs(peak - f) <= 2
                checked += 1
        assert checked >= 5

    def test_deterministic(self):
        spec = SynthSpec(n_videos=3, frames_per_video=150,
                         period_range=(50.0, 70.0), seed=12, noise_level=0.02)
        a, _ = gen_tennis_like(spec)
        b, _ = gen_tennis_like(spec)
        assert all(np.array_equal(x.frames, y.frames) for x, y in zip(a, b))
