"""Fixed-width context windows over transcripts.

Every position t in a transcript (except the last) yields one example: the
w most recent context elements c_{t-w+1..t} and the move of utterance t+1
as the label. Each element is a (speaker-change bit, token ids, move id)
triple. Positions with fewer than w predecessors are left-padded so tensor
shapes stay static.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Transcript, Utterance
from .labels import PAD_MOVE_ID, TalkMove
from .tokenizer import tokenize
from .vocab import Vocabulary


@dataclass(frozen=True)
class WindowConfig:
    w: int = 5

    def __post_init__(self):
        if self.w < 1:
            raise ValueError(f"window size must be >= 1, got {self.w}")


@dataclass(frozen=True)
class ContextElement:
    s: int  # speaker-change bit
    tokens: tuple[int, ...]  # vocabulary indices; empty only for padding
    move_id: int  # 0..7, or PAD_MOVE_ID=8 in padding positions


PAD_ELEMENT = ContextElement(s=0, tokens=(), move_id=PAD_MOVE_ID)


@dataclass(frozen=True)
class Example:
    window: tuple[ContextElement, ...]
    label: TalkMove
    origin: tuple[str, int]  # (transcript id, position t)

    @property
    def example_id(self) -> str:
        return f"{self.origin[0]}:{self.origin[1]}"


def speaker_change(prev: str | None, cur: str) -> int:
    """1 iff the speaker differs from the previous utterance (or there is
    no previous utterance)."""
    return 1 if prev is None or prev != cur else 0


def elements_from_utterances(
    utts: list[Utterance], vocab: Vocabulary
) -> list[ContextElement]:
    """Encode a run of consecutive utterances into context elements."""
    elements = []
    prev: str | None = None
    for u in utts:
        elements.append(
            ContextElement(
                s=speaker_change(prev, u.speaker_id),
                tokens=tuple(vocab.encode(tokenize(u.text))),
                move_id=u.talk_move.value,
            )
        )
        prev = u.speaker_id
    return elements


def pad_window(elements: list[ContextElement], w: int) -> tuple[ContextElement, ...]:
    """Left-pad (or truncate to the most recent w) a run of elements."""
    if len(elements) >= w:
        return tuple(elements[-w:])
    return tuple([PAD_ELEMENT] * (w - len(elements)) + elements)


def extract_examples(
    transcript: Transcript, vocab: Vocabulary, cfg: WindowConfig
) -> list[Example]:
    """One example per position t in [0, n-2], in transcript order."""
    elements = elements_from_utterances(list(transcript.utterances), vocab)
    examples = []
    for t in range(len(elements) - 1):
        examples.append(
            Example(
                window=pad_window(elements[: t + 1], cfg.w),
                label=transcript.utterances[t + 1].talk_move,
                origin=(transcript.id, t),
            )
        )
    return examples
