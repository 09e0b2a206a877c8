"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .ops import Param


def grad_check(
    loss_and_grad: Callable[[], float],
    params: list[Param],
    eps: float = 1e-5,
    sample_threshold: int = 4096,
    seed: int = 0,
    loss_only: Callable[[], float] | None = None,
) -> float:
    """Compare analytic gradients with central differences; return the max
    relative error over all checked coordinates.

    ``loss_and_grad`` must zero grads, run forward+backward, and return the
    scalar loss; afterwards each param's ``.grad`` holds the analytic
    gradient. ``loss_only`` (defaults to ``loss_and_grad``) is called for
    the perturbed evaluations. Params larger than ``sample_threshold``
    coordinates are spot-checked on a seeded sample instead of exhaustively.

    Relative error per coordinate is |a - n| / max(|a| + |n|, 1e-5); the
    floor keeps finite-difference noise (~1e-10 absolute at float64 with
    eps=1e-5) from registering as error on near-zero gradients.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    f = loss_only if loss_only is not None else loss_and_grad
    loss_and_grad()
    analytic = [p.grad.copy() for p in params]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p, a in zip(params, analytic):
        flat_value = p.value.reshape(-1)
        flat_a = a.reshape(-1)
        n_coords = flat_value.shape[0]
        if n_coords > sample_threshold:
            coords = rng.choice(n_coords, size=sample_threshold, replace=False)
        else:
            coords = range(n_coords)
        for i in coords:
            orig = flat_value[i]
            flat_value[i] = orig + eps
            f_plus = f()
            flat_value[i] = orig - eps
            f_minus = f()
            flat_value[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * eps)
            err = abs(flat_a[i] - numeric) / max(abs(flat_a[i]) + abs(numeric), 1e-5)
            if err > worst:
                worst = err
    # restore analytic grads so callers can inspect them
    loss_and_grad()
    return worst
