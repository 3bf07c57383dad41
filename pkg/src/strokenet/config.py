"""Run configuration: a line-based ``key = value`` text format.

Blank lines and ``#`` comments are ignored; unknown keys are rejected;
missing keys take the documented defaults. The same text round-trips
through checkpoints so a trained model is self-describing.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .discretise import THRESHOLD_MEAN, DiscretiseParams
from .model import ModelConfig, StyleMode, TemporalMode
from .signals import SignalKind


class ConfigError(ValueError):
    """Unknown key, bad value, or missing required key."""


@dataclass
class RunConfig:
    """Everything one training run needs, as plain fields."""

    # model
    temporal_mode: str = "early_fusion"
    style_mode: str = "all_styles"
    window_half_width: int = 2
    frame_skip: int = 2
    input_h: int = 0  # 0 = take from the first clip
    input_w: int = 0
    blocks: tuple[int, ...] = (32, 64, 128)
    fc_widths: tuple[int, ...] = (256,)
    # target signal
    signal_kind: str = "sine"
    turn_threshold: float = 2.5
    fixed_period: float = 40.0
    # training
    seed: int = 0
    batch_size: int = 64
    steps: int = 2000
    val_interval: int = 250
    val_fraction: float = 0.2
    augment: bool = True
    per_style: str = "Freestyle"
    checkpoint_interval: int = 0  # extra resume checkpoints every N steps
    # discretisation
    smooth_window: int = 9
    threshold: str = "mean"
    max_run_length: int = 0
    # evaluation
    tolerance: int = 3
    # paths
    clips_dir: str = ""
    labels: str = ""
    out_dir: str = "runs/default"

    def model_config(self, input_h: int | None = None,
                     input_w: int | None = None) -> ModelConfig:
        h = self.input_h or input_h
        w = self.input_w or input_w
        if not h or not w:
            raise ConfigError("input_h/input_w unset and no clip to infer from")
        window = 0 if self.temporal_mode == "single_frame" else self.window_half_width
        return ModelConfig(
            temporal_mode=TemporalMode(self.temporal_mode),
            style_mode=StyleMode(self.style_mode),
            window_half_width=window,
            frame_skip=self.frame_skip,
            input_h=h, input_w=w,
            blocks=self.blocks, fc_widths=self.fc_widths)

    def discretise_params(self) -> DiscretiseParams:
        thr = self.threshold if self.threshold == THRESHOLD_MEAN else float(self.threshold)
        return DiscretiseParams(smooth_window=self.smooth_window, threshold=thr,
                                max_run_length=self.max_run_length)

    def kind(self) -> SignalKind:
        return SignalKind(self.signal_kind)


def _parse_value(name: str, text: str, current):
    if isinstance(current, bool):
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {text!r}")
    if isinstance(current, int):
        try:
            return int(text)
        except ValueError as exc:
            raise ConfigError(f"{name}: expected an integer, got {text!r}") from exc
    if isinstance(current, float):
        try:
            return float(text)
        except ValueError as exc:
            raise ConfigError(f"{name}: expected a number, got {text!r}") from exc
    if isinstance(current, tuple):
        try:
            return tuple(int(p) for p in text.split(",") if p.strip())
        except ValueError as exc:
            raise ConfigError(f"{name}: expected comma-separated ints") from exc
    return text


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _parse_value(key, value, getattr(cfg, key)))
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    try:
        TemporalMode(cfg.temporal_mode)
        StyleMode(cfg.style_mode)
        SignalKind(cfg.signal_kind)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.threshold != THRESHOLD_MEAN:
        try:
            float(cfg.threshold)
        except ValueError as exc:
            raise ConfigError("threshold must be 'mean' or a number") from exc
    if not 0.0 < cfg.val_fraction < 1.0:
        raise ConfigError("val_fraction must be in (0, 1)")


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def config_to_text(cfg: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
