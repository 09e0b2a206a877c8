"""Train-split vocabulary with reserved PAD/UNK slots."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .corpus import Bucket, Corpus, CorpusError
from .tokenizer import tokenize

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_ID = 0
UNK_ID = 1


@dataclass(frozen=True)
class Vocabulary:
    index: dict[str, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.index)

    def lookup(self, token: str) -> int:
        return self.index.get(token, UNK_ID)

    def encode(self, tokens: list[str]) -> list[int]:
        return [self.index.get(t, UNK_ID) for t in tokens]


def build_vocab(corpus: Corpus, min_freq: int = 1) -> Vocabulary:
    """Index every train-split token with frequency >= min_freq.

    Tokens are assigned dense indices after PAD=0 and UNK=1, ordered by
    descending train frequency with ties broken alphabetically, so the same
    corpus always yields the same index assignment.
    """
    if min_freq < 1:
        raise ValueError(f"min_freq must be >= 1, got {min_freq}")
    train = corpus.bucket(Bucket.TRAIN)
    if not train:
        raise CorpusError("corpus has an empty train split; cannot build vocabulary")
    counts: Counter[str] = Counter()
    for t in train:
        for u in t.utterances:
            counts.update(tokenize(u.text))
    index = {PAD_TOKEN: PAD_ID, UNK_TOKEN: UNK_ID}
    kept = sorted(
        (tok for tok, c in counts.items() if c >= min_freq),
        key=lambda tok: (-counts[tok], tok),
    )
    for tok in kept:
        index[tok] = len(index)
    return Vocabulary(index=index)
