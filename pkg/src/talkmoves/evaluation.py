"""Confusion matrices, per-class and macro P/R/F1, facet-level evaluation.

Metrics are stored in [0, 1] and scaled to percentages only at export time.
Macro averages always run over the full label set, including classes absent
from the evaluated slice (0/0 counts as 0).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .labels import FACET_LABELS, MOVE_LABELS, TalkMove, facet_of


@dataclass(frozen=True)
class EvalReport:
    labels: tuple[str, ...]
    matrix: np.ndarray  # rows = gold, cols = predicted
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float

    def row(self, name: str) -> tuple[float, float, float]:
        i = self.labels.index(name)
        return float(self.precision[i]), float(self.recall[i]), float(self.f1[i])


def confusion(golds: Sequence[int], preds: Sequence[int], k: int = len(MOVE_LABELS)) -> np.ndarray:
    """k x k count matrix; golds index rows, predictions index columns."""
    if len(golds) != len(preds):
        raise ValueError(f"length mismatch: {len(golds)} golds vs {len(preds)} preds")
    if len(golds) == 0:
        raise ValueError("nothing to evaluate")
    matrix = np.zeros((k, k), dtype=np.int64)
    for g, p in zip(golds, preds):
        matrix[int(g), int(p)] += 1
    return matrix


def prf1(matrix: np.ndarray, labels: Sequence[str] = MOVE_LABELS) -> EvalReport:
    """Per-class and macro precision/recall/F1 from a confusion matrix.
    Undefined ratios (0/0) are reported as 0."""
    k = matrix.shape[0]
    if matrix.shape != (k, k) or k != len(labels):
        raise ValueError(f"matrix shape {matrix.shape} does not match {len(labels)} labels")
    tp = np.diag(matrix).astype(np.float64)
    pred_totals = matrix.sum(axis=0).astype(np.float64)
    gold_totals = matrix.sum(axis=1).astype(np.float64)
    precision = np.where(pred_totals > 0, tp / np.maximum(pred_totals, 1), 0.0)
    recall = np.where(gold_totals > 0, tp / np.maximum(gold_totals, 1), 0.0)
    pr = precision + recall
    f1 = np.where(pr > 0, 2.0 * precision * recall / np.maximum(pr, 1e-300), 0.0)
    return EvalReport(
        labels=tuple(labels),
        matrix=matrix,
        precision=precision,
        recall=recall,
        f1=f1,
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        accuracy=float(tp.sum() / matrix.sum()),
    )


def evaluate_moves(golds: Sequence[TalkMove], preds: Sequence[TalkMove]) -> EvalReport:
    matrix = confusion([g.value for g in golds], [p.value for p in preds])
    return prf1(matrix, MOVE_LABELS)


def facet_eval(golds: Sequence[TalkMove], preds: Sequence[TalkMove]) -> EvalReport:
    """Bin both sides into the 5 accountability facets, then score."""
    fg = [facet_of(g).value for g in golds]
    fp = [facet_of(p).value for p in preds]
    matrix = confusion(fg, fp, k=len(FACET_LABELS))
    return prf1(matrix, FACET_LABELS)


def report_to_csv(report: EvalReport, path: str | Path) -> None:
    """One row per class plus the macro row; percentages with 2 decimals."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Label", "Prec.", "Recall", "F1"])
        writer.writerow(
            [
                "Macro average",
                f"{report.macro_precision * 100:.2f}",
                f"{report.macro_recall * 100:.2f}",
                f"{report.macro_f1 * 100:.2f}",
            ]
        )
        for i, name in enumerate(report.labels):
            writer.writerow(
                [
                    name,
                    f"{report.precision[i] * 100:.2f}",
                    f"{report.recall[i] * 100:.2f}",
                    f"{report.f1[i] * 100:.2f}",
                ]
            )


def matrix_to_csv(matrix: np.ndarray, labels: Sequence[str], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gold\\pred"] + list(labels))
        for i, name in enumerate(labels):
            writer.writerow([name] + [int(v) for v in matrix[i]])


def matrix_heatmap(matrix: np.ndarray, labels: Sequence[str], path: str | Path, title: str = "") -> None:
    """Render the matrix as a PNG heat map (row-normalized shading)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    norm = matrix / np.maximum(matrix.sum(axis=1, keepdims=True), 1)
    fig, ax = plt.subplots(figsize=(7, 6))
    im = ax.imshow(norm, cmap="Blues", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right", fontsize=8)
    ax.set_yticks(range(len(labels)), labels, fontsize=8)
    ax.set_xlabel("predicted")
    ax.set_ylabel("gold")
    if title:
        ax.set_title(title)
    for i in range(len(labels)):
        for j in range(len(labels)):
            ax.text(j, i, str(int(matrix[i, j])), ha="center", va="center", fontsize=7)
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
