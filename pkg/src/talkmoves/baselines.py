"""Reference predictors: random, majority class, move bigram, move-only GRU.

The bigram model conditions on the full utterance sequence (teacher and
student turns interleaved, a start sentinel per transcript), mirroring what
the windowed models see.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Transcript
from .labels import MOVE_LABELS, NUM_MOVES, TalkMove
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
from .tri_encoder import MOVE_EMBED_ROWS
from .windowing import Example

START_ROW = NUM_MOVES  # bigram row for "no previous utterance"


class RandomPredictor:
    """Uniform over the 8 moves, seeded."""

    def __init__(self, seed: int):
        self._rng = np.random.default_rng(seed)

    def predict(self, example: Example | None = None) -> TalkMove:
        return TalkMove(int(self._rng.integers(NUM_MOVES)))


class MajorityPredictor:
    def __init__(self, labels: Iterable[TalkMove]):
        counts = np.zeros(NUM_MOVES, dtype=np.int64)
        for lbl in labels:
            counts[lbl.value] += 1
        if counts.sum() == 0:
            raise ValueError("no training labels")
        self.counts = counts
        self.majority = TalkMove(int(np.argmax(counts)))  # ties -> lowest index

    def predict(self, example: Example | None = None) -> TalkMove:
        return self.majority


class BigramModel:
    """Argmax of P(next move | previous move), counted from training
    transcripts with a per-transcript start sentinel."""

    def __init__(self, counts: np.ndarray, fallback: TalkMove):
        if counts.shape != (NUM_MOVES + 1, NUM_MOVES):
            raise ValueError(f"counts must be 9x8, got {counts.shape}")
        self.counts = counts.astype(np.int64)
        self.fallback = fallback  # for rows never observed in training
        row_sums = self.counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore"):
            self.probs = np.where(row_sums > 0, self.counts / row_sums, 0.0)
        self.unseen_rows = [i for i in range(NUM_MOVES + 1) if row_sums[i, 0] == 0]

    @classmethod
    def fit(cls, transcripts: Sequence[Transcript]) -> "BigramModel":
        counts = np.zeros((NUM_MOVES + 1, NUM_MOVES), dtype=np.int64)
        target_counts = np.zeros(NUM_MOVES, dtype=np.int64)
        for t in transcripts:
            prev = START_ROW
            for u in t.utterances:
                counts[prev, u.talk_move.value] += 1
                if prev != START_ROW:
                    target_counts[u.talk_move.value] += 1
                prev = u.talk_move.value
        if counts.sum() == 0:
            raise ValueError("no transcripts to fit")
        fallback = TalkMove(int(np.argmax(target_counts))) if target_counts.sum() else TalkMove.NONE
        return cls(counts, fallback)

    def predict_prev(self, prev: TalkMove | None) -> TalkMove:
        row = START_ROW if prev is None else prev.value
        if row in self.unseen_rows:
            return self.fallback
        return TalkMove(int(np.argmax(self.probs[row])))

    def predict(self, example: Example) -> TalkMove:
        last = example.window[-1]
        # the last window element is the current utterance; its move is the
        # bigram condition (never padding, because every example has c_t)
        return self.predict_prev(TalkMove(last.move_id))

    def export_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["prev"] + list(MOVE_LABELS))
            for i in range(NUM_MOVES + 1):
                name = "<start>" if i == START_ROW else MOVE_LABELS[i]
                writer.writerow([name] + [float(p) for p in self.probs[i]])


@dataclass(frozen=True)
class MoveOnlyConfig:
    w: int = 5
    move_dim: int = 32
    move_hidden: int = 64


class MoveOnlyModel:
    """GRU over the window's talk-move ids alone; no access to text."""

    kind = "move_only"

    def __init__(self, config: MoveOnlyConfig, rng: np.random.Generator | None = None):
        self.config = config
        rng = rng if rng is not None else np.random.default_rng(0)
        c = config
        self.move_emb = uniform_param(rng, "move_emb", (MOVE_EMBED_ROWS, c.move_dim), 0.1)
        self.gru = GRUParams.init(rng, "gru", c.move_dim, c.move_hidden)
        self.out_W = uniform_param(
            rng, "out.W", (NUM_MOVES, c.move_hidden), 1.0 / np.sqrt(c.move_hidden)
        )
        self.out_b = zeros_param("out.b", NUM_MOVES)

    def params(self) -> list[Param]:
        return [self.move_emb] + self.gru.params() + [self.out_W, self.out_b]

    def zero_grads(self) -> None:
        for p in self.params():
            p.zero_grad()

    def forward(self, example: Example):
        move_ids = [el.move_id for el in example.window]
        M = embedding_gather(self.move_emb.value, move_ids)
        h, cache = gru_sequence(M, self.gru)
        logits = linear_forward(self.out_W.value, self.out_b.value, h)
        _, _, probs = softmax_xent(logits, 0, 1.0)
        return logits, probs, (move_ids, M, h, cache)

    def loss_and_grad(self, example: Example, weight: float = 1.0) -> float:
        logits, _, (move_ids, _, h, cache) = self.forward(example)
        loss, dlogits, _ = softmax_xent(logits, example.label.value, weight)
        dh = linear_backward(self.out_W, self.out_b, h, dlogits)
        dM, _ = gru_backward(self.gru, cache, dh)
        embedding_scatter_add(self.move_emb, move_ids, dM)
        return loss

    def loss(self, example: Example, weight: float = 1.0) -> float:
        logits, _, _ = self.forward(example)
        loss, _, _ = softmax_xent(logits, example.label.value, weight)
        return loss

    def predict_probs(self, example: Example) -> np.ndarray:
        _, probs, _ = self.forward(example)
        return probs

    def predict(self, example: Example) -> TalkMove:
        return TalkMove(int(np.argmax(self.predict_probs(example))))

    def config_dict(self) -> dict:
        return asdict(self.config)
