"""Model assembly: temporal fusion modes, style modes, and the base CNN.

The base network is a VGG-style pattern of blocks (two same-padded 3x3
convolutions, each followed by batch norm and ELU, then one 5x5/stride-2
max pool), a flatten, hidden fully-connected layers (batch norm + ELU),
and a bare linear regression head with ``k`` outputs.

Temporal modes:

* ``single_frame``: one RGB-like frame, ``(N, H, W, 3)``.
* ``early_fusion``: the ``2w + 1`` window frames stacked along the channel
  axis, ``(N, H, W, 3 * (2w + 1))``.
* ``conv3d``: the window kept as a temporal axis, ``(N, 2w + 1, H, W, 3)``,
  with 3x3x3 convolutions and temporal max pooling.

Style modes:

* ``per_style`` / ``all_styles``: scalar output (k = 1).
* ``multi_class``: k = 4 outputs, trained against ``u * s`` targets.
* ``style_as_input``: k = 1 plus a learned gate: the one-hot style passes
  through a single linear layer sized to the flattened convolutional
  feature and multiplies it elementwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .layers import (BatchNorm, Conv2d, Conv3d, Elu, Flatten, Linear,
                     MaxPool2d, MaxPool3d, pooled_extent)
from .signals import SWIM_STYLES
from .tensor import ShapeError


class TemporalMode(str, enum.Enum):
    SINGLE_FRAME = "single_frame"
    EARLY_FUSION = "early_fusion"
    CONV3D = "conv3d"


class StyleMode(str, enum.Enum):
    PER_STYLE = "per_style"
    ALL_STYLES = "all_styles"
    MULTI_CLASS = "multi_class"
    STYLE_AS_INPUT = "style_as_input"


class StyleInputError(ValueError):
    """Style vector missing where required, or supplied where it is not."""


@dataclass(frozen=True)
class ModelConfig:
    """Everything that determines a network, minus the random seed."""

    temporal_mode: TemporalMode = TemporalMode.EARLY_FUSION
    style_mode: StyleMode = StyleMode.ALL_STYLES
    window_half_width: int = 2
    frame_skip: int = 2
    input_h: int = 48
    input_w: int = 128
    blocks: tuple[int, ...] = (32, 64, 128)
    fc_widths: tuple[int, ...] = (256,)

    def __post_init__(self):
        object.__setattr__(self, "temporal_mode", TemporalMode(self.temporal_mode))
        object.__setattr__(self, "style_mode", StyleMode(self.style_mode))
        object.__setattr__(self, "blocks", tuple(int(b) for b in self.blocks))
        object.__setattr__(self, "fc_widths", tuple(int(b) for b in self.fc_widths))
        if self.temporal_mode is TemporalMode.SINGLE_FRAME and self.window_half_width != 0:
            raise ValueError("single_frame requires window_half_width == 0")
        if self.window_half_width < 0:
            raise ValueError("window_half_width must be >= 0")
        if self.frame_skip < 1:
            raise ValueError("frame_skip must be >= 1")
        if not self.blocks:
            raise ValueError("need at least one block")
        if min(self.input_h, self.input_w) < 2 ** len(self.blocks):
            raise ValueError("input too small for the number of pooling stages")

    @property
    def k(self) -> int:
        """Output width: 4 for multi_class, otherwise 1."""
        return 4 if self.style_mode is StyleMode.MULTI_CLASS else 1

    @property
    def window_len(self) -> int:
        return 2 * self.window_half_width + 1

    @property
    def window_span(self) -> int:
        """Raw frames covered by one window including skipped frames."""
        return 2 * self.window_half_width * self.frame_skip + 1

    @property
    def in_channels(self) -> int:
        if self.temporal_mode is TemporalMode.EARLY_FUSION:
            return 3 * self.window_len
        return 3

    def feature_shape(self) -> tuple[int, ...]:
        """Shape (time, h, w, maps) of the last conv activation per sample."""
        h, w = self.input_h, self.input_w
        t = self.window_len if self.temporal_mode is TemporalMode.CONV3D else None
        for _ in self.blocks:
            h, w = pooled_extent(h), pooled_extent(w)
            if t is not None:
                t = t - 2 if t > 3 else t
        maps = self.blocks[-1]
        return (t, h, w, maps) if t is not None else (h, w, maps)

    def flat_features(self) -> int:
        return int(np.prod(self.feature_shape()))


def style_onehot(style: str, dtype=np.float32) -> np.ndarray:
    """One-hot 4-vector over the canonical style order."""
    vec = np.zeros(4, dtype)
    vec[SWIM_STYLES.index(style)] = 1.0
    return vec


def multiclass_target(u: float, s: np.ndarray) -> np.ndarray:
    """Four-channel target ``u * s``: three zeros and one scaled value."""
    s = np.asarray(s)
    if s.shape != (4,) or not (np.count_nonzero(s) == 1 and s.max() == 1.0):
        raise ValueError("style vector must be one-hot over 4 classes")
    return u * s


def infer_style(outputs) -> int:
    """Index with the highest summed output over a video; ties to lowest."""
    arr = np.asarray(outputs, dtype=float)
    if arr.size == 0:
        raise ValueError("no outputs to infer a style from")
    return int(np.argmax(arr.reshape(-1, arr.shape[-1]).sum(axis=0)))


class Network:
    """The configured CNN with explicit forward/backward passes."""

    def __init__(self, cfg: ModelConfig, seed: int, dtype=np.float32):
        self.cfg = cfg
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(seed)
        conv3d = cfg.temporal_mode is TemporalMode.CONV3D
        conv_cls = Conv3d if conv3d else Conv2d
        pool_cls = MaxPool3d if conv3d else MaxPool2d

        self.conv_layers: list = []
        in_ch = cfg.in_channels
        for maps in cfg.blocks:
            for sub_in in (in_ch, maps):
                self.conv_layers += [conv_cls(sub_in, maps, rng, dtype),
                                     BatchNorm(maps, dtype), Elu()]
            self.conv_layers.append(pool_cls())
            in_ch = maps
        self.flatten = Flatten()

        flat = cfg.flat_features()
        self.gate = (Linear(4, flat, rng, dtype)
                     if cfg.style_mode is StyleMode.STYLE_AS_INPUT else None)

        self.fc_layers: list = []
        width = flat
        for fc in cfg.fc_widths:
            self.fc_layers += [Linear(width, fc, rng, dtype),
                               BatchNorm(fc, dtype), Elu()]
            width = fc
        self.head = Linear(width, cfg.k, rng, dtype)
        self._gate_cache = None

    # -- parameter / buffer registry -------------------------------------

    def _named_layers(self):
        for i, layer in enumerate(self.conv_layers):
            yield f"conv.{i}", layer
        if self.gate is not None:
            yield "gate", self.gate
        for i, layer in enumerate(self.fc_layers):
            yield f"fc.{i}", layer
        yield "head", self.head

    def named_parameters(self):
        out = []
        for prefix, layer in self._named_layers():
            out += [(f"{prefix}.{n}", p) for n, p in layer.params()]
        return out

    def named_buffers(self):
        out = []
        for prefix, layer in self._named_layers():
            for n, b in layer.buffers():
                out.append((f"{prefix}.{n}", b))
            if isinstance(layer, BatchNorm):
                out.append((f"{prefix}.batches_tracked",
                            np.array([layer.batches_tracked], np.float32)))
        return out

    def load_buffers(self, entries: dict) -> None:
        for prefix, layer in self._named_layers():
            for n, b in layer.buffers():
                b[...] = entries[f"{prefix}.{n}"]
            if isinstance(layer, BatchNorm):
                layer.batches_tracked = int(entries[f"{prefix}.batches_tracked"][0])

    def zero_grad(self) -> None:
        for _, p in self.named_parameters():
            p.zero_grad()

    def count_parameters(self) -> int:
        return sum(p.size for _, p in self.named_parameters())

    # -- passes -----------------------------------------------------------

    def _check_input(self, x: np.ndarray) -> None:
        cfg = self.cfg
        if cfg.temporal_mode is TemporalMode.CONV3D:
            want = (cfg.window_len, cfg.input_h, cfg.input_w, 3)
            if x.ndim != 5 or x.shape[1:] != want:
                raise ShapeError(f"expected (N, {want}), got {x.shape}")
        else:
            want = (cfg.input_h, cfg.input_w, cfg.in_channels)
            if x.ndim != 4 or x.shape[1:] != want:
                raise ShapeError(f"expected (N, {want}), got {x.shape}")

    def forward(self, x: np.ndarray, style: np.ndarray | None = None,
                train: bool = False) -> np.ndarray:
        self._check_input(np.asarray(x))
        if self.gate is not None and style is None:
            raise StyleInputError("style_as_input model requires a style vector")
        if self.gate is None and style is not None:
            raise StyleInputError("this model takes no style input")
        z = np.asarray(x, dtype=self.dtype)
        for layer in self.conv_layers:
            z = layer.forward(z, train=train)
        z = self.flatten.forward(z, train=train)
        if self.gate is not None:
            style = np.asarray(style, dtype=self.dtype)
            if style.ndim == 1:
                style = np.broadcast_to(style, (z.shape[0], 4))
            g = self.gate.forward(style, train=train)
            self._gate_cache = (z, g)
            z = z * g
        for layer in self.fc_layers:
            z = layer.forward(z, train=train)
        return self.head.forward(z, train=train)

    def backward(self, dout: np.ndarray,
                 need_input_grad: bool = False) -> np.ndarray | None:
        dz = self.head.backward(dout)
        for layer in reversed(self.fc_layers):
            dz = layer.backward(dz)
        if self.gate is not None:
            feat, g = self._gate_cache
            self.gate.backward(dz * feat)
            dz = dz * g
        dz = self.flatten.backward(dz)
        for li in range(len(self.conv_layers) - 1, -1, -1):
            layer = self.conv_layers[li]
            if li == 0 and not need_input_grad:
                layer.backward(dz, need_input_grad=False)
                return None
            dz = layer.backward(dz)
        return dz


def build_model(cfg: ModelConfig, seed: int, dtype=np.float32) -> Network:
    """Deterministically initialised network for a config and seed."""
    return Network(cfg, seed, dtype)
