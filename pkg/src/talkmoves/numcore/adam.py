"""Adam with bias correction, matching the standard formulation."""

from __future__ import annotations

import numpy as np

from .ops import NonFiniteError, Param


class AdamState:
    """First/second moment buffers plus the shared step counter."""

    def __init__(self, params: list[Param]):
        self.m = [np.zeros_like(p.value) for p in params]
        self.v = [np.zeros_like(p.value) for p in params]
        self.step = 0


def adam_step(
    params: list[Param],
    state: AdamState,
    lr: float = 1e-4,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One update from the accumulated grads. Grads are left untouched;
    the caller zeroes them at the start of the next batch."""
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    if len(params) != len(state.m):
        raise ValueError("optimizer state does not match parameter list")
    state.step += 1
    t = state.step
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for i, p in enumerate(params):
        g = p.grad
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * (g * g)
        m_hat = state.m[i] / bc1
        v_hat = state.v[i] / bc2
        p.value -= lr * m_hat / (np.sqrt(v_hat) + eps)
        if not np.all(np.isfinite(p.value)):
            raise NonFiniteError(f"non-finite values in {p.name} after Adam step {t}")
