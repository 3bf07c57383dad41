"""Architecture assembly, fusion modes, style handling."""

import numpy as np
import pytest

from strokenet.gradcheck import grad_check_model
from strokenet.model import (ModelConfig, Network, StyleMode, TemporalMode,
                             StyleInputError, build_model, infer_style,
                             multiclass_target, style_onehot)
from strokenet.tensor import ShapeError


class TestModelConfig:
    def test_single_frame_requires_zero_window(self):
        with pytest.raises(ValueError):
            ModelConfig(temporal_mode=TemporalMode.SINGLE_FRAME, window_half_width=1)

    def test_k_follows_style_mode(self):
        base = dict(temporal_mode=TemporalMode.SINGLE_FRAME, window_half_width=0)
        assert ModelConfig(style_mode=StyleMode.MULTI_CLASS, **base).k == 4
        for mode in (StyleMode.PER_STYLE, StyleMode.ALL_STYLES,
                     StyleMode.STYLE_AS_INPUT):
            assert ModelConfig(style_mode=mode, **base).k == 1

    def test_early_fusion_channel_count(self):
        cfg = ModelConfig(temporal_mode=TemporalMode.EARLY_FUSION,
                          window_half_width=5)
        assert cfg.in_channels == 33 and cfg.window_len == 11

    def test_window_span_with_skip(self):
        cfg = ModelConfig(window_half_width=5, frame_skip=2)
        assert cfg.window_span == 21  # 11 sampled frames over 21 raw ones

    def test_paper_scale_shape_algebra(self):
        cfg = ModelConfig(temporal_mode=TemporalMode.SINGLE_FRAME,
                          window_half_width=0, input_h=48, input_w=128,
                          blocks=(32, 64, 128), fc_widths=(256,))
        assert cfg.feature_shape() == (6, 16, 128)
        assert cfg.flat_features() == 6 * 16 * 128

    def test_conv3d_temporal_collapse(self):
        cfg = ModelConfig(temporal_mode=TemporalMode.CONV3D, window_half_width=5,
                          input_h=48, input_w=128, blocks=(8, 8, 8))
        # 11 -> 9 -> 7 -> 5 with the no-padding-above-3 rule
        assert cfg.feature_shape()[0] == 5

    def test_declared_shape_algebra_matches_a_real_forward(self):
        cfg = ModelConfig(temporal_mode=TemporalMode.SINGLE_FRAME,
                          window_half_width=0, input_h=48, input_w=128,
                          blocks=(4, 4, 4), fc_widths=(8,))
        net = build_model(cfg, seed=0)
        z = np.zeros((1, 48, 128, 3), np.float32)
        for layer in net.conv_layers:
            z = layer.forward(z, train=True)
        assert z.shape[1:] == cfg.feature_shape() == (6, 16, 4)
        assert z.reshape(1, -1).shape[1] == cfg.flat_features()


class TestBuildModel:
    def test_parameter_count_closed_form(self):
        cfg = ModelConfig(temporal_mode=TemporalMode.SINGLE_FRAME,
                          window_half_width=0, input_h=128, input_w=48,
                          blocks=(16, 32), fc_widths=(64,))
        net = build_model(cfg, seed=0)
        conv = (16 * 3 * 9 + 16) + (16 * 16 * 9 + 16)
        conv += (32 * 16 * 9 + 32) + (32 * 32 * 9 + 32)
        bn_conv = 2 * (16 + 16 + 32 + 32)
        flat = 32 * 32 * 12
        fc = flat * 64 + 64 + 2 * 64
        head = 64 * 1 + 1
        assert net.count_parameters() == conv + bn_conv + fc + head

    def test_same_seed_identical_parameters(self, make_tiny_config):
        cfg = make_tiny_config()
        a, b = build_model(cfg, seed=5), build_model(cfg, seed=5)
        for (_, pa), (_, pb) in zip(a.named_parameters(), b.named_parameters()):
            assert np.array_equal(pa.data, pb.data)
        c = build_model(cfg, seed=6)
        assert any(not np.array_equal(pa.data, pc.data)
                   for (_, pa), (_, pc) in zip(a.named_parameters(),
                                               c.named_parameters()))

    def test_conv3d_window_is_11_frames_wide(self):
        cfg = ModelConfig(temporal_mode=TemporalMode.CONV3D, window_half_width=5,
                          input_h=32, input_w=32, blocks=(4,), fc_widths=(8,))
        net = build_model(cfg, seed=0)
        assert net.conv_layers[0].weight.shape == (3, 3, 3, 3, 4)
        out = net.forward(np.zeros((1, 11, 32, 32, 3), np.float32), train=True)
        assert out.shape == (1, 1)

    def test_parameter_count_ordering_across_temporal_modes(self):
        kw = dict(input_h=32, input_w=32, blocks=(8, 16), fc_widths=(32,))
        sf = build_model(ModelConfig(temporal_mode=TemporalMode.SINGLE_FRAME,
                                     window_half_width=0, **kw), 0)
        ef = build_model(ModelConfig(temporal_mode=TemporalMode.EARLY_FUSION,
                                     window_half_width=2, **kw), 0)
        c3 = build_model(ModelConfig(temporal_mode=TemporalMode.CONV3D,
                                     window_half_width=2, **kw), 0)
        assert c3.count_parameters() > ef.count_parameters() > sf.count_parameters()


class TestForward:
    def test_zero_input_zero_biases_gives_zero_output(self, make_tiny_config):
        for temporal in TemporalMode:
            cfg = make_tiny_config(temporal=temporal)
            net = build_model(cfg, seed=0)
            shape = ((2, cfg.window_len, 8, 8, 3)
                     if temporal is TemporalMode.CONV3D
                     else (2, 8, 8, cfg.in_channels))
            out = net.forward(np.zeros(shape, np.float32), train=True)
            np.testing.assert_allclose(out, 0.0, atol=1e-7)

    def test_eval_forward_is_deterministic(self, make_tiny_config, rng):
        net = build_model(make_tiny_config(), seed=1)
        x = rng.standard_normal((4, 8, 8, 3)).astype(np.float32)
        net.forward(x, train=True)
        a = net.forward(x, train=False)
        b = net.forward(x, train=False)
        assert np.array_equal(a, b)

    def test_window_shape_mismatch_raises(self, make_tiny_config, rng):
        net = build_model(make_tiny_config(), seed=1)
        with pytest.raises(ShapeError):
            net.forward(rng.standard_normal((1, 9, 8, 3)).astype(np.float32))

    def test_early_fusion_of_replicated_frames_equals_summed_single_frame(self, rng):
        """Stacking identical frames is the single-frame net whose first-layer
        kernel is the channel-group sum, by linearity of the first conv."""
        kw = dict(input_h=8, input_w=8, blocks=(3,), fc_widths=(4,))
        ef_cfg = ModelConfig(temporal_mode=TemporalMode.EARLY_FUSION,
                             window_half_width=1, **kw)
        sf_cfg = ModelConfig(temporal_mode=TemporalMode.SINGLE_FRAME,
                             window_half_width=0, **kw)
        ef = build_model(ef_cfg, seed=3, dtype=np.float64)
        sf = build_model(sf_cfg, seed=99, dtype=np.float64)
        ef_params = dict(ef.named_parameters())
        for name, p in sf.named_parameters():
            src = ef_params[name].data
            if name == "conv.0.weight":
                p.data[...] = src.reshape(3, 3, 3, 3, -1).sum(axis=2)
            else:
                p.data[...] = src
        frame = rng.standard_normal((2, 8, 8, 3))
        stacked = np.concatenate([frame] * 3, axis=-1)
        np.testing.assert_allclose(sf.forward(frame, train=True),
                                   ef.forward(stacked, train=True), atol=1e-9)

    def test_style_gate_of_ones_matches_ungated_network(self, rng):
        kw = dict(input_h=8, input_w=8, blocks=(2,), fc_widths=(4,),
                  temporal_mode=TemporalMode.SINGLE_FRAME, window_half_width=0)
        gated = build_model(ModelConfig(style_mode=StyleMode.STYLE_AS_INPUT, **kw),
                            seed=4, dtype=np.float64)
        plain = build_model(ModelConfig(style_mode=StyleMode.ALL_STYLES, **kw),
                            seed=4, dtype=np.float64)
        gated_params = dict(gated.named_parameters())
        for name, p in plain.named_parameters():
            p.data[...] = gated_params[name].data
        gated.gate.weight.data[...] = 0.0
        gated.gate.bias.data[...] = 1.0
        x = rng.standard_normal((3, 8, 8, 3))
        style = style_onehot("Butterfly").astype(np.float64)
        np.testing.assert_array_equal(
            gated.forward(x, style=np.tile(style, (3, 1)), train=True),
            plain.forward(x, train=True))

    def test_style_required_iff_style_as_input(self, make_tiny_config, rng):
        x = rng.standard_normal((2, 8, 8, 3)).astype(np.float32)
        gated = build_model(make_tiny_config(style=StyleMode.STYLE_AS_INPUT), 0)
        with pytest.raises(StyleInputError):
            gated.forward(x, train=True)
        plain = build_model(make_tiny_config(), 0)
        with pytest.raises(StyleInputError):
            plain.forward(x, style=style_onehot("Freestyle"), train=True)


class TestMulticlassTarget:
    def test_scaled_one_hot(self):
        np.testing.assert_allclose(
            multiclass_target(0.8, np.array([0.0, 0.0, 1.0, 0.0])),
            [0.0, 0.0, 0.8, 0.0])

    def test_zero_value_gives_zero_vector(self):
        assert np.all(multiclass_target(0.0, style_onehot("Backstroke")) == 0.0)

    def test_unit_case(self):
        np.testing.assert_allclose(
            multiclass_target(1.0, np.array([1.0, 0.0, 0.0, 0.0])),
            [1.0, 0.0, 0.0, 0.0])

    def test_rejects_non_one_hot(self):
        with pytest.raises(ValueError):
            multiclass_target(0.5, np.array([1.0, 1.0, 0.0, 0.0]))


class TestInferStyle:
    def test_single_active_channel(self):
        outputs = [np.array([0.0, 0.0, 0.9, 0.0])] * 5
        assert infer_style(outputs) == 2

    def test_argmax_of_sums(self):
        outputs = np.array([[5.0, 4.9, 0.0, 0.0]])
        assert infer_style(outputs) == 0

    def test_tie_breaks_to_lowest_index(self):
        outputs = np.array([[0.0, 1.0, 1.0, 0.0]])
        assert infer_style(outputs) == 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            infer_style(np.zeros((0, 4)))


@pytest.mark.parametrize("temporal", list(TemporalMode))
def test_end_to_end_gradients_per_temporal_mode(temporal, make_tiny_config, rng):
    cfg = make_tiny_config(temporal=temporal)
    net = build_model(cfg, seed=0, dtype=np.float64)
    shape = ((2, cfg.window_len, 8, 8, 3) if temporal is TemporalMode.CONV3D
             else (2, 8, 8, cfg.in_channels))
    assert grad_check_model(net, rng.standard_normal(shape)) < 1e-3
