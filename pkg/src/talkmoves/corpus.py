"""Transcript ingestion, validation, serialization, and document splits.

Transcripts arrive as UTF-8 JSONL, one utterance per line:

    {"transcript_id": str, "idx": int, "speaker_id": str,
     "role": "teacher"|"student", "text": str, "label": str}

``idx`` must be strictly increasing within a transcript. Labels are
normalized at ingestion: ``Marking`` merges into ``Restating`` and
``Context`` merges into ``Wait``; any other non-canonical label is a hard
error. A student line must carry the ``Wait`` move after normalization.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

from .labels import TalkMove, UnknownLabelError


class Role(str, Enum):
    TEACHER = "teacher"
    STUDENT = "student"


class Bucket(str, Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"


class CorpusError(ValueError):
    """Malformed or invariant-violating corpus input."""


@dataclass(frozen=True)
class Utterance:
    speaker_id: str
    role: Role
    text: str
    talk_move: TalkMove

    def __post_init__(self):
        if self.role is Role.STUDENT and self.talk_move is not TalkMove.WAIT:
            raise CorpusError(
                f"student utterance must carry the Wait move, got {self.talk_move.label!r}"
            )
        if self.role is Role.TEACHER and self.talk_move is TalkMove.WAIT:
            raise CorpusError("teacher utterance may not carry the Wait move")


@dataclass(frozen=True)
class Transcript:
    id: str
    utterances: tuple[Utterance, ...]

    def __post_init__(self):
        if not self.utterances:
            raise CorpusError(f"transcript {self.id!r} has no utterances")


@dataclass
class Corpus:
    transcripts: tuple[Transcript, ...]
    split: dict[str, Bucket] = field(default_factory=dict)

    def __post_init__(self):
        if self.split:
            ids = {t.id for t in self.transcripts}
            if set(self.split) != ids:
                raise CorpusError("split manifest does not cover transcript ids exactly")

    def bucket(self, bucket: Bucket) -> list[Transcript]:
        return [t for t in self.transcripts if self.split.get(t.id) == bucket]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Corpus)
            and self.transcripts == other.transcripts
            and self.split == other.split
        )


def load_corpus(path: str | Path, raw_label_mode: bool = True) -> Corpus:
    """Parse a JSONL transcript file into a validated Corpus (no split yet).

    ``raw_label_mode`` keeps the Marking/Context merges enabled; with it off,
    only the eight canonical labels are accepted.
    """
    path = Path(path)
    by_id: dict[str, list[tuple[int, Utterance]]] = {}
    order: list[str] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({e.msg})") from None
            try:
                utt, tid, idx = _parse_row(row, raw_label_mode)
            except (CorpusError, UnknownLabelError) as e:
                raise CorpusError(f"{path}:{lineno}: {e}") from None
            if tid not in by_id:
                by_id[tid] = []
                order.append(tid)
            rows = by_id[tid]
            if rows and idx <= rows[-1][0]:
                raise CorpusError(
                    f"{path}:{lineno}: idx {idx} not increasing within transcript {tid!r}"
                )
            rows.append((idx, utt))
    if not by_id:
        raise CorpusError(f"{path}: no transcripts")
    transcripts = tuple(
        Transcript(id=tid, utterances=tuple(u for _, u in by_id[tid])) for tid in order
    )
    return Corpus(transcripts=transcripts)


def _parse_row(row: dict, raw_label_mode: bool) -> tuple[Utterance, str, int]:
    for key in ("transcript_id", "idx", "speaker_id", "role", "text", "label"):
        if key not in row:
            raise CorpusError(f"missing field {key!r}")
    try:
        role = Role(row["role"])
    except ValueError:
        raise CorpusError(f"unknown role: {row['role']!r}") from None
    raw = row["label"]
    if raw in ("Marking", "Context") and not raw_label_mode:
        raise CorpusError(f"raw label {raw!r} not accepted with raw_label_mode off")
    move = TalkMove.from_label(raw)
    utt = Utterance(
        speaker_id=str(row["speaker_id"]),
        role=role,
        text=str(row["text"]),
        talk_move=move,
    )
    return utt, str(row["transcript_id"]), int(row["idx"])


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus back out as JSONL (canonical labels only)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for t in corpus.transcripts:
            for i, u in enumerate(t.utterances):
                fh.write(
                    json.dumps(
                        {
                            "transcript_id": t.id,
                            "idx": i,
                            "speaker_id": u.speaker_id,
                            "role": u.role.value,
                            "text": u.text,
                            "label": u.talk_move.label,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )


def save_split(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps({tid: b.value for tid, b in sorted(corpus.split.items())}, indent=2)
        + "\n",
        encoding="utf-8",
    )


def load_split(corpus: Corpus, path: str | Path) -> Corpus:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    split = {tid: Bucket(b) for tid, b in raw.items()}
    return Corpus(transcripts=corpus.transcripts, split=split)


def split_sizes(n: int) -> tuple[int, int, int]:
    """70/15/15 split by document count.

    Floors first, then leftover documents go to buckets in train/dev/test
    order, skipping buckets that sit exactly on their target.
    """
    percents = (70, 15, 15)
    floors = [(p * n) // 100 for p in percents]
    rema = [(p * n) % 100 for p in percents]
    leftover = n - sum(floors)
    for i in range(3):
        if leftover == 0:
            break
        if rema[i] > 0:
            floors[i] += 1
            leftover -= 1
    return floors[0], floors[1], floors[2]


def split_corpus(corpus: Corpus, seed: int) -> Corpus:
    """Assign transcripts to train/dev/test uniformly at random, 70/15/15."""
    n = len(corpus.transcripts)
    if n < 3:
        raise CorpusError(f"need at least 3 transcripts to split, have {n}")
    ids = [t.id for t in corpus.transcripts]
    rng = random.Random(seed)
    rng.shuffle(ids)
    n_train, n_dev, _ = split_sizes(n)
    split: dict[str, Bucket] = {}
    for i, tid in enumerate(ids):
        if i < n_train:
            split[tid] = Bucket.TRAIN
        elif i < n_train + n_dev:
            split[tid] = Bucket.DEV
        else:
            split[tid] = Bucket.TEST
    return Corpus(transcripts=corpus.transcripts, split=split)


def utterances(transcripts: Iterable[Transcript]) -> Iterable[Utterance]:
    for t in transcripts:
        yield from t.utterances
