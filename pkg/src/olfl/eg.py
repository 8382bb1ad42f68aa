"""Exponentiated gradient on the probability simplex.

The core no-regret step shared by every learner here: maintain weights w on
the simplex and respond to a gradient g with

    w_i  <-  w_i * exp(-lr * g_i) / Z.

The learning rate is fixed up front from the horizon and the gradient range,
lr = sqrt(ln(n) / horizon) / grad_bound, which gives average regret at most
grad_bound * sqrt(2 ln(n) / horizon) against any fixed simplex point for
convex losses whose gradients stay in [-grad_bound, grad_bound].

This class never evaluates a loss function itself; callers hand it the loss
value at the current weights (echoed back, for bookkeeping) and the gradient.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError, ContractViolationError, NumericError

# relative slack on the gradient-range precondition, for float-dust overshoot
GRAD_RANGE_SLACK = 1e-9


class ExponentiatedGradient:
    def __init__(self, n: int, grad_bound: float, horizon: int):
        if not isinstance(n, int) or n < 1:
            raise ConfigError(f"n must be a positive integer, got {n!r}")
        if not isinstance(horizon, int) or horizon < 1:
            raise ConfigError(f"horizon must be a positive integer, got {horizon!r}")
        if not (grad_bound > 0 and np.isfinite(grad_bound)):
            raise ConfigError(f"grad_bound must be positive and finite, got {grad_bound!r}")
        self.n = n
        self.grad_bound = float(grad_bound)
        self.horizon = horizon
        self.lr = math.sqrt(math.log(n) / horizon) / self.grad_bound
        self.w = np.full(n, 1.0 / n)

    def play(self) -> np.ndarray:
        """Current weights. Do not mutate; update() replaces the array."""
        return self.w

    def update(self, value: float, grad) -> float:
        """Apply one multiplicative step; returns `value` unchanged.

        `value` is the caller's loss at the current (pre-update) weights and
        rides along so wrappers can account for it without recomputing.
        """
        g = np.asarray(grad, dtype=float)
        if g.shape != (self.n,):
            raise ContractViolationError(f"gradient shape {g.shape} != ({self.n},)")
        if not np.all(np.isfinite(g)):
            raise ContractViolationError("gradient must be finite")
        if np.abs(g).max() > self.grad_bound * (1.0 + GRAD_RANGE_SLACK):
            raise ContractViolationError(
                f"gradient magnitude {np.abs(g).max()} exceeds bound {self.grad_bound}"
            )
        expo = -self.lr * g
        expo -= expo.max()  # shift largest exponent to 0; normalization cancels it
        u = self.w * np.exp(expo)
        z = u.sum()
        if not np.isfinite(z) or z <= 0.0:
            raise NumericError(f"weight normalizer degenerate: {z!r}")
        self.w = u / z
        return value

    @property
    def state_nbytes(self) -> int:
        return self.w.nbytes
