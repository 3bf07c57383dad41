"""Dense tensors and parameter initialisation.

Layout convention for the whole library: channels last. Images are
``(H, W, C)``, batched activations are ``(N, ..., C)`` with channels on the
final axis, and 3D (spatio-temporal) activations are ``(N, T, H, W, C)``.
This keeps every convolution a plain GEMM over contiguous memory.

Training runs in float32; gradient checking builds float64 instances.
"""

from __future__ import annotations

import math

import numpy as np


class NonFiniteError(ValueError):
    """A tensor contains NaN or Inf, which violates the data contract."""


class ShapeError(ValueError):
    """Operands have incompatible shapes."""


class Tensor:
    """A dense real array with an optional same-shape gradient buffer.

    Values must be finite; a NaN/Inf at construction raises
    :class:`NonFiniteError`. Instances are value-like: nothing here is
    shared mutable state beyond the arrays themselves.
    """

    __slots__ = ("data", "grad")

    def __init__(self, data, requires_grad: bool = False, validate: bool = True):
        self.data = np.asarray(data)
        if validate and not np.all(np.isfinite(self.data)):
            raise NonFiniteError("tensor contains non-finite values")
        self.grad = np.zeros_like(self.data) if requires_grad else None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def requires_grad(self) -> bool:
        return self.grad is not None

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad.fill(0.0)

    def astype(self, dtype) -> "Tensor":
        out = Tensor(self.data.astype(dtype), requires_grad=self.grad is not None,
                     validate=False)
        if self.grad is not None:
            out.grad = self.grad.astype(dtype)
        return out

    def __repr__(self) -> str:  # pragma: no cover
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, grad={self.grad is not None})"


def he_init(shape, fan_in: int, rng, dtype=np.float32) -> Tensor:
    """Zero-mean normal weights with variance ``2 / fan_in``.

    ``rng`` is either an integer seed or a ``numpy.random.Generator``;
    the same seed always yields bit-identical tensors.
    """
    if fan_in <= 0:
        raise ValueError(f"fan_in must be positive, got {fan_in}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    std = math.sqrt(2.0 / fan_in)
    data = (rng.standard_normal(shape) * std).astype(dtype)
    return Tensor(data, requires_grad=True, validate=False)
