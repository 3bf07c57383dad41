"""strokenet: discrete event detection in continuous video.

A small CNN regresses each frame window onto a smooth [0, 1] target signal
that peaks at annotated events; the predicted signal is smoothed,
thresholded and reduced to run midpoints to recover exact event frames.
Includes the full training/inference/evaluation pipeline and synthetic
benchmark data so everything runs end-to-end out of the box.
"""

from .data import (DatasetStats, PreparedVideo, VideoClip, WindowSampler,
                   compute_stats, split_videos, standardize)
from .discretise import DiscretiseParams, discretise, midpoints, smooth, threshold_signal
from .gradcheck import grad_check, grad_check_model
from .metrics import (MatchReport, aggregate_reports, avg_frame_distance,
                      cumulative_distance_histogram, delta_smooth, f_score,
                      match_events, stroke_rate_error)
from .model import (ModelConfig, Network, StyleMode, TemporalMode, build_model,
                    infer_style, multiclass_target, style_onehot)
from .optim import Adadelta, adadelta_update
from .signals import (SWIM_STYLES, EventAnnotation, SignalKind, TargetSignal,
                      amplitude_transform, build_target_signal,
                      cosine_intermediate, fixed_cosine_labels, sine_labels,
                      square_labels, truncated_sine_labels)
from .synth import SynthSpec, gen_swim_like, gen_tennis_like
from .tensor import NonFiniteError, ShapeError, Tensor, he_init
from .train import (TrainingDiverged, TrainResult, TrainRun, evaluate_loss,
                    predict_signal, train)

__version__ = "0.1.0"
