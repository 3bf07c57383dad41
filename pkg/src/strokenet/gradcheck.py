"""Finite-difference verification of analytic gradients.

The scalar probe is ``sum(v * f(x))`` for a fixed random cotangent ``v``, so
one backward pass yields every analytic gradient while central differences
recover the numeric ones. Always run in float64; eps defaults to 1e-4.
"""

from __future__ import annotations

import numpy as np


def numeric_gradient(f, arr: np.ndarray, eps: float = 1e-4) -> np.ndarray:
    """Central differences of the scalar ``f()`` w.r.t. ``arr`` (in place)."""
    grad = np.zeros_like(arr)
    flat, gflat = arr.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f()
        flat[i] = orig - eps
        fm = f()
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * eps)
    return grad


def _max_rel_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    err = np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric))
    return float(err.max()) if err.size else 0.0


def grad_check(layer, x: np.ndarray, eps: float = 1e-4, rng=None,
               train: bool = True) -> float:
    """Max relative error over the input and all parameters of one layer."""
    if rng is None:
        rng = np.random.default_rng(0)
    x = np.asarray(x, dtype=np.float64)
    out = layer.forward(x, train=train)
    v = rng.standard_normal(out.shape)

    for _, p in layer.params():
        p.zero_grad()
    layer.forward(x, train=train)
    dx = layer.backward(v)
    analytic = [dx] + [p.grad.copy() for _, p in layer.params()]

    def loss():
        return float(np.sum(layer.forward(x, train=train) * v))

    worst = _max_rel_error(analytic[0], numeric_gradient(loss, x, eps))
    for (name, p), a in zip(layer.params(), analytic[1:]):
        worst = max(worst, _max_rel_error(a, numeric_gradient(loss, p.data, eps)))
    return worst


def grad_check_model(net, x: np.ndarray, style: np.ndarray | None = None,
                     eps: float = 1e-4, rng=None) -> float:
    """Max relative error over the input and every parameter of a network."""
    if rng is None:
        rng = np.random.default_rng(0)
    x = np.asarray(x, dtype=np.float64)
    out = net.forward(x, style=style, train=True)
    v = rng.standard_normal(out.shape)

    net.zero_grad()
    net.forward(x, style=style, train=True)
    dx = net.backward(v, need_input_grad=True)
    analytic = {name: p.grad.copy() for name, p in net.named_parameters()}

    def loss():
        return float(np.sum(net.forward(x, style=style, train=True) * v))

    worst = _max_rel_error(dx, numeric_gradient(loss, x, eps))
    for name, p in net.named_parameters():
        worst = max(worst, _max_rel_error(analytic[name],
                                          numeric_gradient(loss, p.data, eps)))
    return worst
