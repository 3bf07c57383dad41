"""Network layers with explicit forward and backward passes.

Each layer caches whatever its backward pass needs during ``forward`` and
accumulates parameter gradients into ``Tensor.grad`` during ``backward``,
which returns the gradient with respect to the layer input. Only the layer
set the base architecture needs is implemented; there is no general graph.

All spatial convolutions are 3x3 (3x3x3 temporally) cross-correlations with
same-padding; max pooling uses a 5x5 spatial window with stride 2 and
symmetric -inf padding so the output extent is ceil(in / 2).
"""

from __future__ import annotations

import numpy as np

from .tensor import ShapeError, Tensor, he_init

# Largest number of window elements materialised at once by pooling argmax.
_POOL_CHUNK_ELEMS = 4_000_000


class Layer:
    """Base class; subclasses define forward/backward and expose params."""

    def params(self) -> list[tuple[str, Tensor]]:
        return []

    def buffers(self) -> list[tuple[str, np.ndarray]]:
        """Non-learned state (e.g. batch-norm running stats)."""
        return []

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _row_windows(padded: np.ndarray, lead: tuple[int, ...], dims: tuple[int, ...]):
    """Strided view of 3-wide overlapping windows along the final spatial axis.

    ``padded`` has channels last and every spatial axis padded by 1. For tap
    offsets ``lead`` over the leading spatial axes this returns a zero-copy
    view of shape ``(N, *dims, 3 * C)`` whose last axis walks the 3
    consecutive positions of the innermost spatial axis, channel-major.
    """
    sl = [slice(None)]
    sl += [slice(o, o + d) for o, d in zip(lead, dims[:-1])]
    base = padded[tuple(sl)]
    shape = base.shape[:-2] + (dims[-1], 3 * padded.shape[-1])
    strides = base.strides[:-2] + (base.strides[-2], base.strides[-1])
    return np.lib.stride_tricks.as_strided(base, shape, strides)


class _ConvNd(Layer):
    """Same-padded 3^d cross-correlation, channels last.

    Each leading tap offset turns into one GEMM over overlapping
    ``3 * C``-wide windows of the innermost spatial axis; the padded input
    is cached so backward reuses it for the weight gradient, and the input
    gradient is the same correlation of the padded output gradient with the
    rotated, channel-swapped kernel.
    """

    spatial_dims = 2

    def __init__(self, in_channels: int, out_channels: int, rng, dtype=np.float32):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.dtype = np.dtype(dtype)
        kshape = (3,) * self.spatial_dims + (in_channels, out_channels)
        self.weight = he_init(kshape, fan_in=in_channels * 3 ** self.spatial_dims,
                              rng=rng, dtype=dtype)
        self.bias = Tensor(np.zeros(out_channels, dtype), requires_grad=True)
        self._cache = None
        self._lead_taps = (
            [(i,) for i in range(3)] if self.spatial_dims == 2
            else [(k, i) for k in range(3) for i in range(3)])

    def params(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def _pad(self, x: np.ndarray) -> np.ndarray:
        n, *dims, c = x.shape
        xp = np.zeros((n, *(d + 2 for d in dims), c), x.dtype)
        xp[(slice(None),) + tuple(slice(1, 1 + d) for d in dims)] = x
        return xp

    def _correlate(self, padded: np.ndarray, kernel: np.ndarray,
                   dims: tuple[int, ...], bias: np.ndarray | None) -> np.ndarray:
        n = padded.shape[0]
        m = kernel.shape[-1]
        rows = n * int(np.prod(dims))
        width = 3 * padded.shape[-1]
        out = np.zeros((rows, m), padded.dtype)
        for tap in self._lead_taps:
            seg = _row_windows(padded, tap, dims).reshape(rows, width)
            block = kernel[tap].reshape(width, m)
            out += seg @ block
        if bias is not None:
            out += bias
        return out.reshape(n, *dims, m)

    def forward(self, x, train=False):
        nd = self.spatial_dims + 2
        if x.ndim != nd or x.shape[-1] != self.in_channels:
            raise ShapeError(f"conv{self.spatial_dims}d expects "
                             f"(N, spatial..., {self.in_channels}), got {x.shape}")
        x = np.asarray(x, dtype=self.dtype)
        dims = x.shape[1:-1]
        xp = self._pad(x)
        self._cache = (xp, dims)
        return self._correlate(xp, self.weight.data, dims, self.bias.data)

    def backward(self, dout, need_input_grad: bool = True):
        xp, dims = self._cache
        c, m = self.in_channels, self.out_channels
        dout = np.asarray(dout, dtype=self.dtype)
        n = dout.shape[0]
        rows = n * int(np.prod(dims))
        dflat = dout.reshape(rows, m)
        width = 3 * c
        for tap in self._lead_taps:
            seg = _row_windows(xp, tap, dims).reshape(rows, width)
            self.weight.grad[tap] += (seg.T @ dflat).reshape(3, c, m)
        self.bias.grad += dflat.sum(axis=0)
        if not need_input_grad:
            return None
        # rotate every spatial axis and swap channel roles: K'[..., m, c]
        flip = (slice(None, None, -1),) * self.spatial_dims
        swap = tuple(range(self.spatial_dims)) + (self.spatial_dims + 1,
                                                  self.spatial_dims)
        rotated = np.ascontiguousarray(self.weight.data[flip].transpose(swap))
        return self._correlate(self._pad(dout), rotated, dims, None)


class Conv2d(_ConvNd):
    """3x3 cross-correlation over ``(N, H, W, C)`` with zero same-padding."""

    spatial_dims = 2


class Conv3d(_ConvNd):
    """3x3x3 cross-correlation over ``(N, T, H, W, C)``, same-padded."""

    spatial_dims = 3


def pooled_extent(size: int) -> int:
    """Spatial output extent of one 5x5/stride-2 pool: ceil(size / 2)."""
    return (size + 1) // 2


class _MaxPoolNd(Layer):
    """Shared gather machinery for the 2D and 3D max pools.

    A flat index grid mapping each (output position, window element) to its
    padded-input position is built once per input shape; forward gathers the
    windows into one contiguous matrix and reduces, backward routes each
    output gradient to its window argmax (ties to the first element in
    row-major window order).
    """

    def __init__(self):
        self._cache = None
        self._index = None  # (input shape) -> (padded shape, out shape, idx grid)

    def _layout(self, shape):
        raise NotImplementedError

    def forward(self, x, train=False):
        nd = getattr(self, "ndim_in", 4)
        if x.ndim != nd:
            raise ShapeError(f"max pool expects a {nd}-d input, got {x.shape}")
        if self._index is None or self._index[0] != x.shape:
            self._index = (x.shape,) + self._layout(x.shape)
        _, pad_shape, inner, out_shape, idx = self._index
        xp = np.full(pad_shape, -np.inf, x.dtype)
        xp[inner] = x
        # np.take keeps the batch axis outermost in memory, unlike fancy indexing
        windows = np.take(xp.reshape(x.shape[0], -1), idx, axis=1)  # (N, R, K)
        out = windows.max(axis=-1)
        self._cache = (windows, out, xp.shape, x.dtype)
        return out.reshape(out_shape)

    def backward(self, dout):
        _, pad_shape, inner, out_shape, idx = self._index
        windows, out, xpshape, dtype = self._cache
        n, r, k = windows.shape
        # first position equal to the max == argmax with first-tie routing
        am = (windows == out[..., None]).argmax(axis=-1)
        flat = idx.reshape(-1, k)[np.arange(r)[None, :], am]  # (N, R) positions
        per = int(np.prod(xpshape[1:]))
        flat = flat + (np.arange(n) * per)[:, None]
        dpad = np.bincount(flat.ravel(), weights=np.asarray(dout, np.float64).ravel(),
                           minlength=n * per)
        return np.ascontiguousarray(dpad.reshape(xpshape)[inner]).astype(dtype)


class MaxPool2d(_MaxPoolNd):
    """5x5 window, stride 2, symmetric -inf padding of 2 on each side."""

    ndim_in = 4

    def _layout(self, shape):
        n, h, w, c = shape
        ho, wo = pooled_extent(h), pooled_extent(w)
        pad_shape = (n, h + 4, w + 4, c)
        inner = (slice(None), slice(2, 2 + h), slice(2, 2 + w), slice(None))
        oy = (np.arange(ho) * 2)[:, None, None, None, None]
        ox = (np.arange(wo) * 2)[None, :, None, None, None]
        ch = np.arange(c)[None, None, :, None, None]
        dy = np.arange(5)[None, None, None, :, None]
        dx = np.arange(5)[None, None, None, None, :]
        idx = (((oy + dy) * (w + 4) + (ox + dx)) * c + ch)
        return pad_shape, inner, (n, ho, wo, c), idx.reshape(ho * wo * c, 25)


class MaxPool3d(_MaxPoolNd):
    """Spatial 5x5/stride-2 pooling with a temporal window of 3, stride 1.

    The temporal axis is unpadded when longer than 3 (output T - 2) and
    -inf padded by 1 on each side otherwise (output T).
    """

    ndim_in = 5

    def _layout(self, shape):
        n, t, h, w, c = shape
        tpad = 0 if t > 3 else 1
        to = t - 2 if t > 3 else t
        ho, wo = pooled_extent(h), pooled_extent(w)
        pad_shape = (n, t + 2 * tpad, h + 4, w + 4, c)
        inner = (slice(None), slice(tpad, tpad + t), slice(2, 2 + h),
                 slice(2, 2 + w), slice(None))
        grid = np.ix_(np.arange(to), np.arange(ho) * 2, np.arange(wo) * 2,
                      np.arange(c), np.arange(3), np.arange(5), np.arange(5))
        ot, oy, ox, ch, dt, dy, dx = np.broadcast_arrays(*grid)
        idx = ((((ot + dt) * (h + 4) + (oy + dy)) * (w + 4) + (ox + dx)) * c + ch)
        return pad_shape, inner, (n, to, ho, wo, c), idx.reshape(to * ho * wo * c, 75)


class BatchNorm(Layer):
    """Per-channel batch normalisation over every axis but the last.

    Train mode normalises with minibatch statistics (population variance)
    and updates the running stats; eval mode uses the running stats and
    raises if none have ever been recorded.
    """

    def __init__(self, channels: int, dtype=np.float32, eps: float = 1e-5,
                 momentum: float = 0.1):
        if not 0.0 < momentum < 1.0:
            raise ValueError("momentum must be in (0, 1)")
        self.channels = channels
        self.eps = eps
        self.momentum = momentum
        self.dtype = np.dtype(dtype)
        self.gamma = Tensor(np.ones(channels, dtype), requires_grad=True)
        self.beta = Tensor(np.zeros(channels, dtype), requires_grad=True)
        self.running_mean = np.zeros(channels, dtype)
        self.running_var = np.ones(channels, dtype)
        self.batches_tracked = 0
        self._cache = None

    def params(self):
        return [("gamma", self.gamma), ("beta", self.beta)]

    def buffers(self):
        return [("running_mean", self.running_mean),
                ("running_var", self.running_var)]

    def forward(self, x, train=False):
        if x.shape[-1] != self.channels:
            raise ShapeError(
                f"batch_norm expects {self.channels} channels, got {x.shape}")
        x = np.asarray(x, dtype=self.dtype)
        axes = tuple(range(x.ndim - 1))
        if train:
            mu = x.mean(axis=axes)
            xc = x - mu
            var = np.mean(xc * xc, axis=axes)
            m = self.momentum
            self.running_mean *= 1.0 - m
            self.running_mean += m * mu
            self.running_var *= 1.0 - m
            self.running_var += m * var
            self.batches_tracked += 1
        else:
            if self.batches_tracked == 0:
                raise RuntimeError(
                    "batch_norm eval mode before any running stats recorded")
            var = self.running_var
            xc = x - self.running_mean
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = xc * inv
        self._cache = (xhat, inv.astype(self.dtype), train, axes)
        return self.gamma.data * xhat + self.beta.data

    def backward(self, dout):
        xhat, inv, train, axes = self._cache
        self.beta.grad += dout.sum(axis=axes)
        self.gamma.grad += (dout * xhat).sum(axis=axes)
        dxhat = dout * self.gamma.data
        if not train:
            return dxhat * inv
        m = xhat.size // xhat.shape[-1]
        return (inv / m) * (m * dxhat - dxhat.sum(axis=axes)
                            - xhat * (dxhat * xhat).sum(axis=axes))


class Elu(Layer):
    """ELU with alpha = 1; the derivative at 0 is taken as 1."""

    def __init__(self):
        self._cache = None

    def forward(self, x, train=False):
        pos = x > 0
        out = x.copy()
        np.expm1(x, out=out, where=~pos)
        self._cache = (pos, out)
        return out

    def backward(self, dout):
        pos, out = self._cache
        return dout * np.where(pos, np.asarray(1.0, out.dtype), out + 1.0)


class Linear(Layer):
    """Affine map ``(N, D) -> (N, K)`` with weight ``(D, K)`` and bias ``(K,)``."""

    def __init__(self, in_features: int, out_features: int, rng, dtype=np.float32):
        self.in_features = in_features
        self.out_features = out_features
        self.dtype = np.dtype(dtype)
        self.weight = he_init((in_features, out_features), fan_in=in_features,
                              rng=rng, dtype=dtype)
        self.bias = Tensor(np.zeros(out_features, dtype), requires_grad=True)
        self._x = None

    def params(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def forward(self, x, train=False):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeError(
                f"linear expects (N, {self.in_features}), got {x.shape}")
        x = np.asarray(x, dtype=self.dtype)
        self._x = x
        return x @ self.weight.data + self.bias.data

    def backward(self, dout):
        dout = np.asarray(dout, dtype=self.dtype)
        self.weight.grad += self._x.T @ dout
        self.bias.grad += dout.sum(axis=0)
        return dout @ self.weight.data.T


class Flatten(Layer):
    """Collapses everything after the batch axis; remembers the shape."""

    def __init__(self):
        self._shape = None

    def forward(self, x, train=False):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape)


class Hadamard:
    """Elementwise product of two same-shape arrays with a joint backward."""

    def __init__(self):
        self._cache = None

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape != b.shape:
            raise ShapeError(f"elementwise mul of {a.shape} and {b.shape}")
        self._cache = (a, b)
        return a * b

    def backward(self, dout: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        a, b = self._cache
        return dout * b, dout * a


class MseLoss:
    """Mean of squared differences over all elements."""

    def __init__(self):
        self._cache = None

    def forward(self, pred: np.ndarray, target: np.ndarray) -> float:
        if pred.shape != target.shape:
            raise ShapeError(f"mse_loss of {pred.shape} vs {target.shape}")
        diff = pred - target
        self._cache = diff
        return float(np.mean(diff * diff))

    def backward(self) -> np.ndarray:
        diff = self._cache
        return (2.0 / diff.size) * diff
