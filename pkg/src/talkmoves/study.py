"""Human-annotation study: balanced diagnostic sampling, annotation
records, and the agreement report.

Annotators see exactly what the model sees: the last w utterances with
speaker info and talk-move tags. Each record carries a single "primary"
next-move choice plus the full set of moves the annotator would accept.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import Bucket, Corpus
from .evaluation import EvalReport, evaluate_moves
from .labels import TalkMove

# Fixed class composition of the 300-example diagnostic set.
REQUIRED_COUNTS: dict[TalkMove, int] = {
    TalkMove.NONE: 37,
    TalkMove.WAIT: 37,
    TalkMove.RESTATING: 37,
    TalkMove.REVOICING: 37,
    TalkMove.PRESS_FOR_ACCURACY: 38,
    TalkMove.KEEPING_EVERYONE_TOGETHER: 38,
    TalkMove.GETTING_STUDENTS_TO_RELATE: 38,
    TalkMove.PRESS_FOR_REASONING: 38,
}
DIAGNOSTIC_SIZE = sum(REQUIRED_COUNTS.values())  # 300


class StudyError(ValueError):
    pass


@dataclass(frozen=True)
class DiagnosticEntry:
    example_id: str  # "<transcript_id>:<position>"
    context: tuple[dict, ...]  # up to w raw utterances, oldest first
    gold: TalkMove

    def to_json(self) -> dict:
        return {
            "example_id": self.example_id,
            "context": list(self.context),
            "gold": self.gold.label,
        }

    @classmethod
    def from_json(cls, row: dict) -> "DiagnosticEntry":
        return cls(
            example_id=row["example_id"],
            context=tuple(row["context"]),
            gold=TalkMove.from_label(row["gold"]),
        )


@dataclass
class DiagnosticSet:
    entries: tuple[DiagnosticEntry, ...]
    source_split: str = "dev"
    seed: int = 0
    w: int = 5

    def __post_init__(self):
        ids = [e.example_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise StudyError("duplicate example origins in diagnostic set")

    def gold_map(self) -> dict[str, TalkMove]:
        return {e.example_id: e.gold for e in self.entries}

    def save(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {
                        "type": "meta",
                        "source_split": self.source_split,
                        "seed": self.seed,
                        "w": self.w,
                        "size": len(self.entries),
                    }
                )
                + "\n"
            )
            for e in self.entries:
                fh.write(json.dumps(e.to_json(), ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "DiagnosticSet":
        entries = []
        meta = {"source_split": "dev", "seed": 0, "w": 5}
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                if row.get("type") == "meta":
                    meta.update({k: row[k] for k in ("source_split", "seed", "w") if k in row})
                    continue
                entries.append(DiagnosticEntry.from_json(row))
        return cls(entries=tuple(entries), **meta)


def sample_diagnostic(corpus: Corpus, seed: int, w: int = 5) -> DiagnosticSet:
    """Draw the fixed per-class histogram uniformly (without replacement)
    from the dev split's example positions."""
    candidates: dict[TalkMove, list[DiagnosticEntry]] = {m: [] for m in TalkMove}
    for t in corpus.bucket(Bucket.DEV):
        utts = t.utterances
        for pos in range(len(utts) - 1):
            label = utts[pos + 1].talk_move
            lo = max(0, pos - w + 1)
            context = tuple(
                {
                    "speaker_id": u.speaker_id,
                    "role": u.role.value,
                    "text": u.text,
                    "talk_move": u.talk_move.label,
                }
                for u in utts[lo : pos + 1]
            )
            candidates[label].append(
                DiagnosticEntry(example_id=f"{t.id}:{pos}", context=context, gold=label)
            )

    shortfalls = [
        f"{move.label}: need {need}, have {len(candidates[move])}"
        for move, need in REQUIRED_COUNTS.items()
        if len(candidates[move]) < need
    ]
    if shortfalls:
        raise StudyError("insufficient dev examples: " + "; ".join(shortfalls))

    rng = np.random.default_rng(seed)
    chosen: list[DiagnosticEntry] = []
    for move in TalkMove:  # canonical order keeps the draw deterministic
        pool = candidates[move]
        idx = rng.choice(len(pool), size=REQUIRED_COUNTS[move], replace=False)
        chosen.extend(pool[i] for i in sorted(idx))
    order = rng.permutation(len(chosen))
    entries = tuple(chosen[i] for i in order)
    return DiagnosticSet(entries=entries, source_split="dev", seed=seed, w=w)


# -- annotation records ------------------------------------------------------


@dataclass(frozen=True)
class AnnotationRecord:
    annotator_id: str
    example_id: str
    primary: TalkMove
    acceptable: frozenset[TalkMove]
    timestamp: str = ""

    def __post_init__(self):
        if not self.acceptable:
            raise StudyError("acceptable set must be nonempty")
        if self.primary not in self.acceptable:
            raise StudyError("primary move must be in the acceptable set")

    def to_json(self) -> dict:
        return {
            "annotator_id": self.annotator_id,
            "example_id": self.example_id,
            "primary": self.primary.label,
            "acceptable": [m.label for m in sorted(self.acceptable)],
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, row: dict) -> "AnnotationRecord":
        return cls(
            annotator_id=str(row["annotator_id"]),
            example_id=str(row["example_id"]),
            primary=TalkMove.from_label(row["primary"]),
            acceptable=frozenset(TalkMove.from_label(x) for x in row["acceptable"]),
            timestamp=str(row.get("timestamp", "")),
        )


def _aligned(
    a: Sequence[AnnotationRecord] | Mapping[str, TalkMove],
    b: Sequence[AnnotationRecord],
) -> tuple[dict[str, TalkMove], dict[str, AnnotationRecord]]:
    """Index both sides by example id; the id sets must match exactly."""
    if isinstance(a, Mapping):
        a_map = dict(a)
    else:
        a_map = {r.example_id: r.primary for r in a}
    b_map = {r.example_id: r for r in b}
    if set(a_map) != set(b_map):
        missing = set(a_map) ^ set(b_map)
        raise StudyError(f"example ids do not align ({len(missing)} mismatched)")
    if not a_map:
        raise StudyError("no overlapping examples")
    return a_map, b_map


def primary_agreement(
    a: Sequence[AnnotationRecord] | Mapping[str, TalkMove],
    b: Sequence[AnnotationRecord] | Mapping[str, TalkMove],
) -> float:
    """Percent of aligned examples whose primary choices match."""
    if isinstance(b, Mapping):
        b = [
            AnnotationRecord("_", eid, move, frozenset([move]))
            for eid, move in b.items()
        ]
    a_map, b_map = _aligned(a, b)
    hits = sum(1 for eid, move in a_map.items() if b_map[eid].primary == move)
    return 100.0 * hits / len(a_map)


def acceptance_rate(
    source: Sequence[AnnotationRecord] | Mapping[str, TalkMove],
    judge: Sequence[AnnotationRecord],
) -> float:
    """Percent of examples where the source's choice lies in the judge's
    acceptable set."""
    src_map, judge_map = _aligned(source, judge)
    hits = sum(1 for eid, move in src_map.items() if move in judge_map[eid].acceptable)
    return 100.0 * hits / len(src_map)


def mean_acceptable_size(records: Sequence[AnnotationRecord]) -> float:
    if not records:
        raise StudyError("no records")
    return float(np.mean([len(r.acceptable) for r in records]))


@dataclass
class AgreementReport:
    inter_annotator: float | None = None
    ann1_vs_truth: float | None = None
    ann2_vs_truth: float | None = None
    both_vs_truth: float | None = None
    model_vs_ann1: float | None = None
    model_vs_ann2: float | None = None
    model_vs_truth: float | None = None
    ann1_accepted_by_ann2: float | None = None
    ann2_accepted_by_ann1: float | None = None
    truth_accepted_by_ann1: float | None = None
    truth_accepted_by_ann2: float | None = None
    model_accepted_by_ann1: float | None = None
    model_accepted_by_ann2: float | None = None
    mean_acceptable_set_size: float | None = None
    eval_reports: dict[str, EvalReport] = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            k: getattr(self, k)
            for k in _REPORT_ROWS
        }
        out["mean_acceptable_set_size"] = self.mean_acceptable_set_size
        out["eval"] = {
            name: {
                "macro_precision": r.macro_precision * 100,
                "macro_recall": r.macro_recall * 100,
                "macro_f1": r.macro_f1 * 100,
                "accuracy": r.accuracy * 100,
                "per_class_f1": {
                    lbl: float(f) * 100 for lbl, f in zip(r.labels, r.f1)
                },
                "confusion": r.matrix.tolist(),
            }
            for name, r in self.eval_reports.items()
        }
        return out

    def to_markdown(self) -> str:
        def fmt(v):
            return "n/a" if v is None else f"{v:.0f}%"

        lines = [
            "| Measure | Agreement |",
            "| --- | --- |",
            "| *Primary option: annotators* | |",
            f"| Inter-annotator agreement | {fmt(self.inter_annotator)} |",
            f"| Annotator 1 vs ground truth | {fmt(self.ann1_vs_truth)} |",
            f"| Annotator 2 vs ground truth | {fmt(self.ann2_vs_truth)} |",
            f"| Both annotators vs ground truth | {fmt(self.both_vs_truth)} |",
            "| *Primary option: model* | |",
            f"| Model vs Annotator 1 | {fmt(self.model_vs_ann1)} |",
            f"| Model vs Annotator 2 | {fmt(self.model_vs_ann2)} |",
            f"| Model vs ground truth | {fmt(self.model_vs_truth)} |",
            "| *Acceptable options* | |",
            f"| Annotator 1's primary accepted by Annotator 2 | {fmt(self.ann1_accepted_by_ann2)} |",
            f"| Annotator 2's primary accepted by Annotator 1 | {fmt(self.ann2_accepted_by_ann1)} |",
            f"| Ground truth accepted by Annotator 1 | {fmt(self.truth_accepted_by_ann1)} |",
            f"| Ground truth accepted by Annotator 2 | {fmt(self.truth_accepted_by_ann2)} |",
            f"| Model predictions accepted by Annotator 1 | {fmt(self.model_accepted_by_ann1)} |",
            f"| Model predictions accepted by Annotator 2 | {fmt(self.model_accepted_by_ann2)} |",
        ]
        if self.mean_acceptable_set_size is not None:
            lines.append(
                f"| Mean acceptable-set size | {self.mean_acceptable_set_size:.2f} |"
            )
        return "\n".join(lines)


_REPORT_ROWS = (
    "inter_annotator",
    "ann1_vs_truth",
    "ann2_vs_truth",
    "both_vs_truth",
    "model_vs_ann1",
    "model_vs_ann2",
    "model_vs_truth",
    "ann1_accepted_by_ann2",
    "ann2_accepted_by_ann1",
    "truth_accepted_by_ann1",
    "truth_accepted_by_ann2",
    "model_accepted_by_ann1",
    "model_accepted_by_ann2",
)


def agreement_report(
    ann1: Sequence[AnnotationRecord] | None,
    ann2: Sequence[AnnotationRecord] | None,
    model_preds: Mapping[str, TalkMove] | None,
    ground_truth: Mapping[str, TalkMove],
) -> AgreementReport:
    """Every pairwise percentage the study tracks, plus per-source
    move-level evaluations against the ground truth."""
    report = AgreementReport()

    def eval_against_truth(name: str, preds: Mapping[str, TalkMove]):
        ids = sorted(ground_truth)
        golds = [ground_truth[i] for i in ids]
        p = [preds[i] for i in ids]
        report.eval_reports[name] = evaluate_moves(golds, p)

    if ann1:
        report.ann1_vs_truth = primary_agreement(ann1, dict(ground_truth))
        eval_against_truth("annotator1", {r.example_id: r.primary for r in ann1})
        report.truth_accepted_by_ann1 = acceptance_rate(dict(ground_truth), ann1)
    if ann2:
        report.ann2_vs_truth = primary_agreement(ann2, dict(ground_truth))
        eval_against_truth("annotator2", {r.example_id: r.primary for r in ann2})
        report.truth_accepted_by_ann2 = acceptance_rate(dict(ground_truth), ann2)
    if ann1 and ann2:
        report.inter_annotator = primary_agreement(ann1, ann2)
        report.ann1_accepted_by_ann2 = acceptance_rate(ann1, ann2)
        report.ann2_accepted_by_ann1 = acceptance_rate(ann2, ann1)
        a1 = {r.example_id: r.primary for r in ann1}
        a2 = {r.example_id: r.primary for r in ann2}
        both = sum(
            1
            for eid, gold in ground_truth.items()
            if a1.get(eid) == gold and a2.get(eid) == gold
        )
        report.both_vs_truth = 100.0 * both / len(ground_truth)
    if model_preds:
        report.model_vs_truth = primary_agreement(dict(model_preds), dict(ground_truth))
        eval_against_truth("model", model_preds)
        if ann1:
            report.model_vs_ann1 = primary_agreement(dict(model_preds), ann1)
            report.model_accepted_by_ann1 = acceptance_rate(dict(model_preds), ann1)
        if ann2:
            report.model_vs_ann2 = primary_agreement(dict(model_preds), ann2)
            report.model_accepted_by_ann2 = acceptance_rate(dict(model_preds), ann2)

    sizes = []
    for records in (ann1 or []), (ann2 or []):
        sizes.extend(len(r.acceptable) for r in records)
    if sizes:
        report.mean_acceptable_set_size = float(np.mean(sizes))
    return report
