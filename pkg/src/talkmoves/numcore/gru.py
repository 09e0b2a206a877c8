"""GRU parameter bundle and the cell/sequence API built on the kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .ops import NonFiniteError, Param, uniform_param, zeros_param


@dataclass
class GRUParams:
    d_in: int
    d_h: int
    W_z: Param
    W_r: Param
    W_h: Param
    U_z: Param
    U_r: Param
    U_h: Param
    b_z: Param
    b_r: Param
    b_h: Param

    @classmethod
    def init(cls, rng: np.random.Generator, name: str, d_in: int, d_h: int) -> "GRUParams":
        scale = 1.0 / np.sqrt(d_h)
        return cls(
            d_in=d_in,
            d_h=d_h,
            W_z=uniform_param(rng, f"{name}.W_z", (d_h, d_in), scale),
            W_r=uniform_param(rng, f"{name}.W_r", (d_h, d_in), scale),
            W_h=uniform_param(rng, f"{name}.W_h", (d_h, d_in), scale),
            U_z=uniform_param(rng, f"{name}.U_z", (d_h, d_h), scale),
            U_r=uniform_param(rng, f"{name}.U_r", (d_h, d_h), scale),
            U_h=uniform_param(rng, f"{name}.U_h", (d_h, d_h), scale),
            b_z=zeros_param(f"{name}.b_z", d_h),
            b_r=zeros_param(f"{name}.b_r", d_h),
            b_h=zeros_param(f"{name}.b_h", d_h),
        )

    def params(self) -> list[Param]:
        return [
            self.W_z, self.W_r, self.W_h,
            self.U_z, self.U_r, self.U_h,
            self.b_z, self.b_r, self.b_h,
        ]

    def _values(self):
        return (
            self.W_z.value, self.W_r.value, self.W_h.value,
            self.U_z.value, self.U_r.value, self.U_h.value,
            self.b_z.value, self.b_r.value, self.b_h.value,
        )


def gru_cell_forward(
    x: np.ndarray, h_prev: np.ndarray, p: GRUParams
) -> tuple[np.ndarray, tuple]:
    """Single GRU step; the sequence kernel is the batched version of this."""
    if x.shape != (p.d_in,) or h_prev.shape != (p.d_h,):
        raise ValueError(
            f"shape mismatch: x {x.shape}, h_prev {h_prev.shape}, "
            f"expected ({p.d_in},) and ({p.d_h},)"
        )
    X = x.reshape(1, -1)
    H, Z, R, HB = backend.gru_forward(np.ascontiguousarray(X), h_prev, *_w(p))
    h_new = H[1]
    if not np.all(np.isfinite(h_new)):
        raise NonFiniteError("non-finite GRU state")
    return h_new, (X, H, Z, R, HB)


def gru_sequence(
    xs: np.ndarray, p: GRUParams, h0: np.ndarray | None = None
) -> tuple[np.ndarray, tuple]:
    """Fold the cell over xs (m x d_in); returns (last hidden state, cache)."""
    if xs.ndim != 2 or xs.shape[1] != p.d_in:
        raise ValueError(f"expected (m, {p.d_in}) inputs, got {xs.shape}")
    if xs.shape[0] == 0:
        raise ValueError("empty sequence; callers must pad")
    if h0 is None:
        h0 = np.zeros(p.d_h)
    X = np.ascontiguousarray(xs, dtype=np.float64)
    H, Z, R, HB = backend.gru_forward(X, h0, *_w(p))
    h_last = H[-1]
    if not np.all(np.isfinite(h_last)):
        raise NonFiniteError("non-finite GRU state")
    return h_last, (X, H, Z, R, HB)


def gru_backward(
    p: GRUParams, cache: tuple, grad_h_last: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Accumulate parameter gradients; return (dX, dh0)."""
    X, H, Z, R, HB = cache
    if grad_h_last.shape != (p.d_h,):
        raise ValueError(f"grad_h_last shape {grad_h_last.shape} != ({p.d_h},)")
    out = backend.gru_backward(
        X, H, Z, R, HB,
        p.W_z.value, p.W_r.value, p.W_h.value,
        p.U_z.value, p.U_r.value, p.U_h.value,
        np.ascontiguousarray(grad_h_last),
    )
    dX, dWz, dWr, dWh, dUz, dUr, dUh, dbz, dbr, dbh, dh0 = out
    p.W_z.grad += dWz
    p.W_r.grad += dWr
    p.W_h.grad += dWh
    p.U_z.grad += dUz
    p.U_r.grad += dUr
    p.U_h.grad += dUh
    p.b_z.grad += dbz
    p.b_r.grad += dbr
    p.b_h.grad += dbh
    return dX, dh0


def _w(p: GRUParams):
    return (
        p.W_z.value, p.W_r.value, p.W_h.value,
        p.U_z.value, p.U_r.value, p.U_h.value,
        p.b_z.value, p.b_r.value, p.b_h.value,
    )
