"""Three-encoder next-move classifier.

An utterance GRU turns each context element's tokens into a vector, which
is concatenated with the element's speaker-change bit. A dialogue GRU reads
the w utterance vectors; a third GRU reads the w talk-move embeddings. The
two final hidden states are concatenated and fed through a two-layer
feed-forward network (tanh between the layers) and a softmax over the 8
moves.

Externally computed sentence embeddings can be injected at two seams: per
element, appended to the utterance vector, and per window, appended before
the classifier. The embeddings come from a sidecar file; nothing in this
package computes them.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .labels import NUM_MOVES, TalkMove
from .numcore import (
    GRUParams,
    Param,
    embedding_gather,
    embedding_scatter_add,
    gru_backward,
    gru_sequence,
    linear_backward,
    linear_forward,
    softmax_xent,
    uniform_param,
    zeros_param,
)
from .vocab import PAD_ID
from .windowing import Example

MOVE_EMBED_ROWS = NUM_MOVES + 1  # 8 moves + the padding row


@dataclass(frozen=True)
class TriEncoderConfig:
    vocab_size: int
    w: int = 5
    word_dim: int = 256
    utt_hidden: int = 512
    move_dim: int = 32
    move_hidden: int = 64
    dialogue_hidden: int = 1025
    ff_hidden: int = 32
    ext_utterance_dim: int = 0
    ext_context_dim: int = 0

    @property
    def utt_vec_dim(self) -> int:
        # encoded utterance + speaker bit (+ optional external embedding)
        return self.utt_hidden + 1 + self.ext_utterance_dim

    @property
    def context_dim(self) -> int:
        return self.dialogue_hidden + self.move_hidden + self.ext_context_dim


@dataclass
class ForwardTrace:
    utt_states: np.ndarray  # w x utt_hidden, the per-element encoder outputs
    utt_vecs: np.ndarray  # w x utt_vec_dim, after concatenations
    dialogue_state: np.ndarray
    move_state: np.ndarray
    context_vec: np.ndarray
    logits: np.ndarray
    probs: np.ndarray
    caches: dict = field(default_factory=dict, repr=False)


class TriEncoderModel:
    kind = "tri_encoder"

    def __init__(self, config: TriEncoderConfig, rng: np.random.Generator | None = None):
        self.config = config
        rng = rng if rng is not None else np.random.default_rng(0)
        c = config
        self.word_emb = uniform_param(rng, "word_emb", (c.vocab_size, c.word_dim), 0.1)
        self.utt_gru = GRUParams.init(rng, "utt_gru", c.word_dim, c.utt_hidden)
        self.move_emb = uniform_param(rng, "move_emb", (MOVE_EMBED_ROWS, c.move_dim), 0.1)
        self.move_gru = GRUParams.init(rng, "move_gru", c.move_dim, c.move_hidden)
        self.dialogue_gru = GRUParams.init(
            rng, "dialogue_gru", c.utt_vec_dim, c.dialogue_hidden
        )
        ff_scale = 1.0 / np.sqrt(c.context_dim)
        self.ff1_W = uniform_param(rng, "ff1.W", (c.ff_hidden, c.context_dim), ff_scale)
        self.ff1_b = zeros_param("ff1.b", c.ff_hidden)
        self.ff2_W = uniform_param(
            rng, "ff2.W", (NUM_MOVES, c.ff_hidden), 1.0 / np.sqrt(c.ff_hidden)
        )
        self.ff2_b = zeros_param("ff2.b", NUM_MOVES)

    def params(self) -> list[Param]:
        return (
            [self.word_emb]
            + self.utt_gru.params()
            + [self.move_emb]
            + self.move_gru.params()
            + self.dialogue_gru.params()
            + [self.ff1_W, self.ff1_b, self.ff2_W, self.ff2_b]
        )

    def zero_grads(self) -> None:
        for p in self.params():
            p.zero_grad()

    # -- encoding ---------------------------------------------------------

    def encode_utterance(
        self, tokens: tuple[int, ...], s: int
    ) -> tuple[np.ndarray, tuple]:
        """Utterance vector: last hidden state of the utterance GRU with the
        speaker-change bit appended as one raw scalar dimension. Padding
        elements and empty utterances are encoded as a single PAD token."""
        ids = tokens if tokens else (PAD_ID,)
        if max(ids) >= self.config.vocab_size:
            raise ValueError(f"token id {max(ids)} out of range")
        X = embedding_gather(self.word_emb.value, ids)
        h, cache = gru_sequence(X, self.utt_gru)
        return np.concatenate([h, [float(s)]]), (ids, cache)

    def _window_arrays(
        self, example: Example, ext_u: np.ndarray | None
    ) -> tuple[np.ndarray, np.ndarray, list, list[int]]:
        c = self.config
        if len(example.window) != c.w:
            raise ValueError(f"window length {len(example.window)} != w={c.w}")
        utt_states = np.empty((c.w, c.utt_hidden))
        utt_vecs = np.empty((c.w, c.utt_vec_dim))
        utt_caches = []
        move_ids = []
        for i, el in enumerate(example.window):
            a, cache = self.encode_utterance(el.tokens, el.s)
            utt_states[i] = a[: c.utt_hidden]
            if c.ext_utterance_dim:
                a = np.concatenate([a, ext_u[i]])
            utt_vecs[i] = a
            utt_caches.append(cache)
            move_ids.append(el.move_id)
        return utt_states, utt_vecs, utt_caches, move_ids

    def encode_dialogue(self, utt_vecs: np.ndarray) -> tuple[np.ndarray, tuple]:
        """Last hidden state of the dialogue GRU over the w utterance
        vectors."""
        if utt_vecs.shape != (self.config.w, self.config.utt_vec_dim):
            raise ValueError(
                f"expected {(self.config.w, self.config.utt_vec_dim)} utterance "
                f"vectors, got {utt_vecs.shape}"
            )
        return gru_sequence(utt_vecs, self.dialogue_gru)

    def encode_talkmoves(self, move_ids: list[int]) -> tuple[np.ndarray, tuple]:
        """Last hidden state of the talk-move GRU over the window's move
        ids (PAD rows included)."""
        if len(move_ids) != self.config.w:
            raise ValueError(f"expected {self.config.w} move ids, got {len(move_ids)}")
        if any(not 0 <= m < MOVE_EMBED_ROWS for m in move_ids):
            raise ValueError(f"move id out of range in {move_ids}")
        M = embedding_gather(self.move_emb.value, move_ids)
        return gru_sequence(M, self.move_gru)

    def forward(
        self,
        example: Example,
        ext_u: np.ndarray | None = None,
        ext_c: np.ndarray | None = None,
    ) -> ForwardTrace:
        c = self.config
        _check_ext("ext_u", ext_u, c.ext_utterance_dim, (c.w, c.ext_utterance_dim))
        _check_ext("ext_c", ext_c, c.ext_context_dim, (c.ext_context_dim,))
        utt_states, utt_vecs, utt_caches, move_ids = self._window_arrays(example, ext_u)

        b, dia_cache = self.encode_dialogue(utt_vecs)
        d, move_cache = self.encode_talkmoves(move_ids)

        parts = [b, d]
        if c.ext_context_dim:
            parts.append(ext_c)
        r = np.concatenate(parts)
        z1 = linear_forward(self.ff1_W.value, self.ff1_b.value, r)
        g = np.tanh(z1)
        logits = linear_forward(self.ff2_W.value, self.ff2_b.value, g)
        _, _, probs = softmax_xent(logits, 0, 1.0)
        return ForwardTrace(
            utt_states=utt_states,
            utt_vecs=utt_vecs,
            dialogue_state=b,
            move_state=d,
            context_vec=r,
            logits=logits,
            probs=probs,
            caches={
                "utt": utt_caches,
                "dialogue": dia_cache,
                "move": move_cache,
                "move_ids": move_ids,
                "g": g,
            },
        )

    def backward(self, trace: ForwardTrace, dlogits: np.ndarray) -> None:
        """Accumulate gradients for one example into every param."""
        c = self.config
        g = trace.caches["g"]
        dg = linear_backward(self.ff2_W, self.ff2_b, g, dlogits)
        dz1 = dg * (1.0 - g * g)
        dr = linear_backward(self.ff1_W, self.ff1_b, trace.context_vec, dz1)

        db = dr[: c.dialogue_hidden]
        dd = dr[c.dialogue_hidden : c.dialogue_hidden + c.move_hidden]

        dM, _ = gru_backward(self.move_gru, trace.caches["move"], dd)
        embedding_scatter_add(self.move_emb, trace.caches["move_ids"], dM)

        dA, _ = gru_backward(self.dialogue_gru, trace.caches["dialogue"], db)
        for i, (ids, cache) in enumerate(trace.caches["utt"]):
            dh = dA[i, : c.utt_hidden]
            dX, _ = gru_backward(self.utt_gru, cache, dh)
            embedding_scatter_add(self.word_emb, ids, dX)

    # -- training/inference entry points ----------------------------------

    def loss_and_grad(
        self,
        example: Example,
        weight: float = 1.0,
        ext_u: np.ndarray | None = None,
        ext_c: np.ndarray | None = None,
    ) -> float:
        """Forward + backward for one example; grads accumulate."""
        trace = self.forward(example, ext_u=ext_u, ext_c=ext_c)
        loss, dlogits, _ = softmax_xent(trace.logits, example.label.value, weight)
        self.backward(trace, dlogits)
        return loss

    def loss(self, example: Example, weight: float = 1.0, **ext) -> float:
        trace = self.forward(example, **ext)
        loss, _, _ = softmax_xent(trace.logits, example.label.value, weight)
        return loss

    def predict_probs(self, example: Example, **ext) -> np.ndarray:
        return self.forward(example, **ext).probs

    def predict(self, example: Example, **ext) -> TalkMove:
        """Argmax move; exact ties resolve to the lowest canonical index."""
        return TalkMove(int(np.argmax(self.predict_probs(example, **ext))))

    def config_dict(self) -> dict:
        return asdict(self.config)


def _check_ext(name: str, value, configured_dim: int, want_shape) -> None:
    if configured_dim == 0:
        if value is not None:
            raise ValueError(f"{name} provided but the model is configured without it")
        return
    if value is None:
        raise ValueError(f"model expects {name} of shape {want_shape}")
    if value.shape != want_shape:
        raise ValueError(f"{name} shape {value.shape} != {want_shape}")


# -- external-embedding sidecar -------------------------------------------


def load_sidecar(path: str | Path) -> dict[str, np.ndarray]:
    """Read `{"key": "<transcript_id>:<idx>", "vec": [...]}` JSONL."""
    out: dict[str, np.ndarray] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            out[row["key"]] = np.asarray(row["vec"], dtype=np.float64)
    return out


def save_sidecar(vectors: dict[str, np.ndarray], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for key, vec in vectors.items():
            fh.write(json.dumps({"key": key, "vec": list(map(float, vec))}) + "\n")


def example_ext_inputs(
    example: Example,
    config: TriEncoderConfig,
    utterance_vectors: dict[str, np.ndarray] | None,
    context_vectors: dict[str, np.ndarray] | None,
) -> dict:
    """Assemble forward() external inputs for an example from sidecar maps.

    Window elements are keyed ``transcript:utterance_idx``; missing keys and
    padding elements get zero vectors. The window-level vector is keyed by
    the example's own origin.
    """
    ext: dict = {}
    tid, t = example.origin
    w = config.w
    if config.ext_utterance_dim:
        ext_u = np.zeros((w, config.ext_utterance_dim))
        if utterance_vectors:
            for i in range(w):
                pos = t - (w - 1) + i
                if pos >= 0:
                    vec = utterance_vectors.get(f"{tid}:{pos}")
                    if vec is not None:
                        ext_u[i] = vec
        ext["ext_u"] = ext_u
    if config.ext_context_dim:
        vec = (context_vectors or {}).get(f"{tid}:{t}")
        ext["ext_c"] = (
            np.asarray(vec, dtype=np.float64)
            if vec is not None
            else np.zeros(config.ext_context_dim)
        )
    return ext
