"""Talk move taxonomy and its facet binning.

The eight talk move labels and their fixed index order are used everywhere:
confusion matrices, report rows, probability vectors, and the wire format.
Reordering them would silently corrupt every serialized artifact, so the
order is frozen here and nowhere else.
"""

from __future__ import annotations

from enum import IntEnum


class TalkMove(IntEnum):
    """The six teacher talk moves plus None (generic utterance) and Wait
    (a student is speaking, the teacher stays silent)."""

    NONE = 0
    WAIT = 1
    PRESS_FOR_ACCURACY = 2
    KEEPING_EVERYONE_TOGETHER = 3
    REVOICING = 4
    GETTING_STUDENTS_TO_RELATE = 5
    RESTATING = 6
    PRESS_FOR_REASONING = 7

    @property
    def label(self) -> str:
        return _MOVE_TO_LABEL[self]

    @classmethod
    def from_label(cls, raw: str) -> "TalkMove":
        """Map a raw annotation label to a canonical move.

        Accepts the eight canonical labels plus the two sparse categories
        that get merged away at ingestion: ``Marking`` (merged into
        Restating) and ``Context`` (merged into Wait). Anything else raises.
        """
        try:
            return _LABEL_TO_MOVE[raw]
        except KeyError:
            raise UnknownLabelError(raw) from None


class UnknownLabelError(ValueError):
    def __init__(self, raw: str):
        super().__init__(f"unknown talk move label: {raw!r}")
        self.raw = raw


# Display/wire strings, index-aligned with TalkMove.
MOVE_LABELS = (
    "None",
    "Wait",
    "Press for Accuracy",
    "Keeping Everyone Together",
    "Revoicing",
    "Getting Students to Relate",
    "Restating",
    "Press for Reasoning",
)

NUM_MOVES = 8

# Embedding row for left-padding positions; never a valid target class.
PAD_MOVE_ID = 8

_MOVE_TO_LABEL = {m: MOVE_LABELS[m.value] for m in TalkMove}
_LABEL_TO_MOVE = {lbl: TalkMove(i) for i, lbl in enumerate(MOVE_LABELS)}
_LABEL_TO_MOVE["Marking"] = TalkMove.RESTATING
_LABEL_TO_MOVE["Context"] = TalkMove.WAIT


class Facet(IntEnum):
    """Coarse accountability bins: None and Wait keep their own bins, the
    six real moves collapse into the three accountability facets."""

    NONE_BIN = 0
    WAIT_BIN = 1
    LEARNING_COMMUNITY = 2
    CONTENT_KNOWLEDGE = 3
    RIGOROUS_THINKING = 4

    @property
    def label(self) -> str:
        return FACET_LABELS[self.value]


FACET_LABELS = (
    "None",
    "Wait",
    "Learning Community",
    "Content Knowledge",
    "Rigorous Thinking",
)

NUM_FACETS = 5

_FACET_OF = {
    TalkMove.NONE: Facet.NONE_BIN,
    TalkMove.WAIT: Facet.WAIT_BIN,
    TalkMove.PRESS_FOR_ACCURACY: Facet.CONTENT_KNOWLEDGE,
    TalkMove.KEEPING_EVERYONE_TOGETHER: Facet.LEARNING_COMMUNITY,
    TalkMove.REVOICING: Facet.RIGOROUS_THINKING,
    TalkMove.GETTING_STUDENTS_TO_RELATE: Facet.LEARNING_COMMUNITY,
    TalkMove.RESTATING: Facet.LEARNING_COMMUNITY,
    TalkMove.PRESS_FOR_REASONING: Facet.RIGOROUS_THINKING,
}


def facet_of(move: TalkMove) -> Facet:
    """Total map from talk move to accountability facet."""
    return _FACET_OF[TalkMove(move)]
