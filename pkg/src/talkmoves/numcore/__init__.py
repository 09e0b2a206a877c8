"""Minimal float64 numeric kernel: GRU with exact backprop, embeddings,
linear layers, softmax cross-entropy, Adam, and gradient checking.

Hot GRU loops run under numba when available; set
``TALKMOVES_BACKEND=numpy`` to force the pure-numpy fallback (see
``benchmarks/bench_kernels.py`` for the speed comparison).
"""

from .adam import AdamState, adam_step
from .backend import backend_name, get_kernels
from .gradcheck import grad_check
from .gru import GRUParams, gru_backward, gru_cell_forward, gru_sequence
from .ops import (
    NonFiniteError,
    Param,
    embedding_gather,
    embedding_scatter_add,
    linear_backward,
    linear_forward,
    softmax_xent,
    uniform_param,
    zeros_param,
)

__all__ = [
    "AdamState",
    "adam_step",
    "backend_name",
    "get_kernels",
    "grad_check",
    "GRUParams",
    "gru_backward",
    "gru_cell_forward",
    "gru_sequence",
    "NonFiniteError",
    "Param",
    "embedding_gather",
    "embedding_scatter_add",
    "linear_backward",
    "linear_forward",
    "softmax_xent",
    "uniform_param",
    "zeros_param",
]
