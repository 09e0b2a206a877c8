"""Parameter containers and the small dense ops the models share."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NonFiniteError(FloatingPointError):
    """A NaN or Inf surfaced where finite values are required."""


@dataclass
class Param:
    """A trainable tensor with its gradient accumulator."""

    name: str
    value: np.ndarray

    def __post_init__(self):
        self.value = np.ascontiguousarray(self.value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    def zero_grad(self) -> None:
        self.grad.fill(0.0)


def uniform_param(rng: np.random.Generator, name: str, shape, scale: float) -> Param:
    return Param(name, rng.uniform(-scale, scale, size=shape))


def zeros_param(name: str, shape) -> Param:
    return Param(name, np.zeros(shape))


def softmax_xent(
    logits: np.ndarray, label: int, weight: float = 1.0
) -> tuple[float, np.ndarray, np.ndarray]:
    """Weighted cross-entropy over a softmax.

    Returns (loss, grad wrt logits, probs). Stabilized by max-subtraction;
    loss = -weight * log p[label], grad = weight * (p - onehot(label)).
    """
    k = logits.shape[0]
    if k < 2:
        raise ValueError("need at least 2 classes")
    if not 0 <= label < k:
        raise ValueError(f"label {label} out of range for {k} classes")
    if weight <= 0:
        raise ValueError(f"weight must be positive, got {weight}")
    if not np.all(np.isfinite(logits)):
        raise NonFiniteError("non-finite logits")
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    total = exp.sum()
    probs = exp / total
    # log p computed from shifted logits directly for accuracy
    loss = -weight * (shifted[label] - np.log(total))
    grad = weight * probs
    grad[label] -= weight
    return float(loss), grad, probs


def linear_forward(W: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    return W @ x + b


def linear_backward(
    Wp: Param, bp: Param, x: np.ndarray, dy: np.ndarray
) -> np.ndarray:
    """Accumulate dW, db; return dx."""
    Wp.grad += np.outer(dy, x)
    bp.grad += dy
    return Wp.value.T @ dy


def embedding_gather(E: np.ndarray, ids) -> np.ndarray:
    return E[np.asarray(ids, dtype=np.intp)]


def embedding_scatter_add(Ep: Param, ids, dX: np.ndarray) -> None:
    np.add.at(Ep.grad, np.asarray(ids, dtype=np.intp), dX)
