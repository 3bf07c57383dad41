import numpy as np
import pytest

from strokenet.model import ModelConfig, StyleMode, TemporalMode


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def tiny_config(temporal=TemporalMode.SINGLE_FRAME, style=StyleMode.ALL_STYLES,
                w=0, h=8, width=8, blocks=(2,), fc=(4,), skip=1):
    if temporal is not TemporalMode.SINGLE_FRAME and w == 0:
        w = 1
    return ModelConfig(temporal_mode=temporal, style_mode=style,
                       window_half_width=w, frame_skip=skip,
                       input_h=h, input_w=width, blocks=blocks, fc_widths=fc)


@pytest.fixture
def make_tiny_config():
    return tiny_config
