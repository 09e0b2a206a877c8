"""Class-weighted mini-batch training and the window/weight tuning grid."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .baselines import MoveOnlyConfig, MoveOnlyModel
from .corpus import Bucket, Corpus
from .evaluation import EvalReport, evaluate_moves
from .labels import NUM_MOVES
from .numcore import AdamState, NonFiniteError, adam_step
from .tri_encoder import TriEncoderConfig, TriEncoderModel
from .vocab import Vocabulary
from .windowing import Example, WindowConfig, extract_examples

log = logging.getLogger(__name__)

WEIGHTING_MODES = ("class_weights", "none", "downsample")


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, batch: int, value: float):
        super().__init__(f"non-finite loss {value} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


@dataclass
class TrainConfig:
    epochs: int = 30
    lr: float = 1e-4
    batch_size: int = 256
    w: int = 5
    weighting: str = "class_weights"
    seed: int = 0
    shuffle: bool = True
    grad_clip: float = 0.0  # global-norm clip; 0 disables
    model: dict = field(default_factory=dict)  # size overrides for the model

    def __post_init__(self):
        if self.epochs < 1 or self.lr <= 0 or self.w < 1 or self.batch_size < 1:
            raise ValueError("epochs >= 1, lr > 0, w >= 1, batch_size >= 1 required")
        if self.weighting not in WEIGHTING_MODES:
            raise ValueError(f"weighting must be one of {WEIGHTING_MODES}")

    @classmethod
    def from_file(cls, path: str | Path) -> "TrainConfig":
        path = Path(path)
        if path.suffix == ".toml":
            try:
                import tomllib
            except ImportError:  # Python 3.10
                import tomli as tomllib

            raw = tomllib.loads(path.read_text(encoding="utf-8"))
        else:
            raw = json.loads(path.read_text(encoding="utf-8"))
        return cls(**raw)


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    dev_macro_f1: list[float] = field(default_factory=list)
    best_epoch: int = 0

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "dev_macro_f1", "best"])
            for i, (loss, f1) in enumerate(zip(self.train_loss, self.dev_macro_f1)):
                writer.writerow([i, f"{loss:.6f}", f"{f1:.6f}", int(i == self.best_epoch)])


def class_weights(counts: Sequence[int]) -> np.ndarray:
    """Inverse-frequency label weights, normalized so uniform counts give
    all-ones: weight_k = N / (K * count_k). Empty classes get weight 0."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("all class counts are zero")
    k = len(counts)
    weights = np.zeros(k)
    for i, c in enumerate(counts):
        if c > 0:
            weights[i] = total / (k * c)
        else:
            log.warning("class %d has no training examples; weight set to 0", i)
    return weights


def downsample(examples: Sequence[Example], seed: int) -> list[Example]:
    """Subsample every class, without replacement, down to the size of the
    smallest class present. Original order is preserved."""
    if not examples:
        raise ValueError("no examples to downsample")
    by_label: dict[int, list[int]] = {}
    for i, ex in enumerate(examples):
        by_label.setdefault(ex.label.value, []).append(i)
    floor = min(len(v) for v in by_label.values())
    rng = np.random.default_rng(seed)
    keep: list[int] = []
    for label in sorted(by_label):
        idx = by_label[label]
        chosen = rng.choice(len(idx), size=floor, replace=False)
        keep.extend(idx[j] for j in chosen)
    keep.sort()
    return [examples[i] for i in keep]


def corpus_examples(corpus: Corpus, vocab: Vocabulary, bucket: Bucket, w: int) -> list[Example]:
    cfg = WindowConfig(w=w)
    out: list[Example] = []
    for t in corpus.bucket(bucket):
        out.extend(extract_examples(t, vocab, cfg))
    return out


def build_model(kind: str, vocab: Vocabulary, cfg: TrainConfig, rng: np.random.Generator):
    if kind == "tri_encoder":
        mc = TriEncoderConfig(vocab_size=vocab.size, w=cfg.w, **cfg.model)
        return TriEncoderModel(mc, rng)
    if kind == "move_only":
        allowed = {k: v for k, v in cfg.model.items() if k in ("move_dim", "move_hidden")}
        return MoveOnlyModel(MoveOnlyConfig(w=cfg.w, **allowed), rng)
    raise ValueError(f"unknown model kind {kind!r}")


def train(
    kind: str,
    corpus: Corpus,
    vocab: Vocabulary,
    cfg: TrainConfig,
) -> tuple[object, TrainHistory]:
    """Mini-batch Adam with optional class weighting; returns the model at
    its best dev-macro-F1 epoch plus the per-epoch history."""
    train_examples = corpus_examples(corpus, vocab, Bucket.TRAIN, cfg.w)
    if not train_examples:
        raise ValueError("train split yields no examples")
    dev_examples = corpus_examples(corpus, vocab, Bucket.DEV, cfg.w)

    if cfg.weighting == "downsample":
        train_examples = downsample(train_examples, cfg.seed)
    if cfg.weighting == "class_weights":
        counts = np.zeros(NUM_MOVES, dtype=np.int64)
        for ex in train_examples:
            counts[ex.label.value] += 1
        weights = class_weights(counts)
    else:
        weights = np.ones(NUM_MOVES)

    model = build_model(kind, vocab, cfg, np.random.default_rng(cfg.seed))
    params = model.params()
    state = AdamState(params)

    history = TrainHistory()
    best_f1 = -1.0
    best_values: list[np.ndarray] | None = None
    order = np.arange(len(train_examples))

    for epoch in range(cfg.epochs):
        if cfg.shuffle:
            np.random.default_rng([cfg.seed, epoch]).shuffle(order)
        epoch_loss = 0.0
        for b_start in range(0, len(order), cfg.batch_size):
            batch = order[b_start : b_start + cfg.batch_size]
            model.zero_grads()
            batch_loss = 0.0
            try:
                for i in batch:
                    ex = train_examples[i]
                    batch_loss += model.loss_and_grad(ex, float(weights[ex.label.value]))
            except NonFiniteError:
                raise TrainingDiverged(epoch, b_start // cfg.batch_size, float("nan"))
            if not np.isfinite(batch_loss):
                raise TrainingDiverged(epoch, b_start // cfg.batch_size, batch_loss)
            scale = 1.0 / len(batch)
            for p in params:
                p.grad *= scale
            if cfg.grad_clip > 0:
                _clip_grads(params, cfg.grad_clip)
            try:
                adam_step(params, state, lr=cfg.lr)
            except NonFiniteError:
                raise TrainingDiverged(epoch, b_start // cfg.batch_size, float("nan"))
            epoch_loss += batch_loss
        history.train_loss.append(epoch_loss / len(order))

        if dev_examples:
            report = evaluate_examples(model, dev_examples)
            f1 = report.macro_f1
        else:
            f1 = float("nan")
        history.dev_macro_f1.append(f1)
        if dev_examples and f1 > best_f1:
            best_f1 = f1
            history.best_epoch = epoch
            best_values = [p.value.copy() for p in params]

    if best_values is not None:
        for p, v in zip(params, best_values):
            p.value[...] = v
    else:
        history.best_epoch = cfg.epochs - 1
    return model, history


def _clip_grads(params, max_norm: float) -> None:
    total = np.sqrt(sum(float(np.sum(p.grad**2)) for p in params))
    if total > max_norm:
        scale = max_norm / total
        for p in params:
            p.grad *= scale


def evaluate_examples(model, examples: Sequence[Example]) -> EvalReport:
    golds = [ex.label for ex in examples]
    preds = [model.predict(ex) for ex in examples]
    return evaluate_moves(golds, preds)


# -- window/weight tuning grid ---------------------------------------------

TUNING_GRID: tuple[tuple[str, int], ...] = (
    ("none", 5),
    ("class_weights", 5),
    ("class_weights", 1),
    ("class_weights", 2),
    ("class_weights", 3),
    ("class_weights", 4),
    ("class_weights", 6),
    ("class_weights", 7),
)


@dataclass(frozen=True)
class TuningRow:
    weighting: str
    w: int
    precision: float
    recall: float
    f1: float
    accuracy: float

    @property
    def label(self) -> str:
        prefix = "Class weighting" if self.weighting == "class_weights" else "No weighting"
        return f"{prefix}, window {self.w}"


def tune_window(
    corpus: Corpus,
    vocab: Vocabulary,
    cfg: TrainConfig,
    kind: str = "tri_encoder",
    grid: Sequence[tuple[str, int]] = TUNING_GRID,
) -> list[TuningRow]:
    """One standalone train+dev-eval per grid row, all with cfg.seed."""
    rows = []
    for weighting, w in grid:
        run_cfg = replace(cfg, weighting=weighting, w=w)
        model, _ = train(kind, corpus, vocab, run_cfg)
        dev_examples = corpus_examples(corpus, vocab, Bucket.DEV, w)
        report = evaluate_examples(model, dev_examples)
        rows.append(
            TuningRow(
                weighting=weighting,
                w=w,
                precision=report.macro_precision,
                recall=report.macro_recall,
                f1=report.macro_f1,
                accuracy=report.accuracy,
            )
        )
    return rows


def tuning_to_csv(rows: Sequence[TuningRow], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Configuration", "Prec.", "Recall", "F1", "Acc."])
        for row in rows:
            writer.writerow(
                [
                    row.label,
                    f"{row.precision * 100:.2f}",
                    f"{row.recall * 100:.2f}",
                    f"{row.f1 * 100:.2f}",
                    f"{row.accuracy * 100:.2f}",
                ]
            )
