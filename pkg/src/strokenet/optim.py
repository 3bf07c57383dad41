"""Adadelta: adaptive per-parameter steps with no learning rate.

Update rule, per parameter x with gradient g:

    E[g^2]  <- rho * E[g^2]  + (1 - rho) * g^2
    dx       = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
    E[dx^2] <- rho * E[dx^2] + (1 - rho) * dx^2
    x       <- x + dx

Defaults rho = 0.95, eps = 1e-6.
"""

from __future__ import annotations

import numpy as np

from .tensor import ShapeError, Tensor


def adadelta_update(value: np.ndarray, grad: np.ndarray, e_g2: np.ndarray,
                    e_dx2: np.ndarray, rho: float = 0.95,
                    eps: float = 1e-6) -> None:
    """One in-place Adadelta step on a single array."""
    if not value.shape == grad.shape == e_g2.shape == e_dx2.shape:
        raise ShapeError("parameter, gradient and accumulators must share a shape")
    e_g2 *= rho
    e_g2 += (1.0 - rho) * grad * grad
    dx = -np.sqrt(e_dx2 + eps) / np.sqrt(e_g2 + eps) * grad
    e_dx2 *= rho
    e_dx2 += (1.0 - rho) * dx * dx
    value += dx


class Adadelta:
    """Optimiser state for a set of named parameters."""

    def __init__(self, named_params: list[tuple[str, Tensor]],
                 rho: float = 0.95, eps: float = 1e-6):
        if not 0.0 < rho < 1.0:
            raise ValueError("rho must be in (0, 1)")
        self.rho = rho
        self.eps = eps
        self.named_params = list(named_params)
        self.e_g2 = {n: np.zeros_like(p.data) for n, p in self.named_params}
        self.e_dx2 = {n: np.zeros_like(p.data) for n, p in self.named_params}

    def step(self) -> None:
        for name, p in self.named_params:
            adadelta_update(p.data, p.grad, self.e_g2[name], self.e_dx2[name],
                            self.rho, self.eps)

    def state_entries(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for name, _ in self.named_params:
            out.append((f"opt.e_g2.{name}", self.e_g2[name]))
            out.append((f"opt.e_dx2.{name}", self.e_dx2[name]))
        return out

    def load_state_entries(self, entries: dict) -> None:
        for name, _ in self.named_params:
            self.e_g2[name][...] = entries[f"opt.e_g2.{name}"]
            self.e_dx2[name][...] = entries[f"opt.e_dx2.{name}"]
