"""Synthetic classroom-dialogue generator for desk-scale experiments.

Real annotated classroom transcripts are not redistributable, so tests and
demos run on corpora sampled from a Markov chain over talk moves. Utterance
text is drawn from small per-move template pools; optionally each utterance
also embeds a cue token that uniquely identifies the *next* move, planting
a lexical signal that a text-aware model can learn but a move-history model
cannot.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, Role, Transcript, Utterance
from .labels import NUM_MOVES, TalkMove

# One pool per move; wording is arbitrary but stable because vocabularies
# and golden tests are built on top of it.
TEMPLATES: dict[TalkMove, tuple[str, ...]] = {
    TalkMove.NONE: (
        "Good morning everyone.",
        "Let's get started with today's lesson.",
        "Take out your notebooks please.",
        "We'll come back to that after the break.",
    ),
    TalkMove.WAIT: (
        "I think it's four minutes.",
        "Because you'd have to use the toaster twice.",
        "It has six sides.",
        "Maybe it doubles every time?",
    ),
    TalkMove.PRESS_FOR_ACCURACY: (
        "What is this shape called?",
        "What if I had 3 slices of toast?",
        "What number goes in the blank?",
        "Can someone tell me the answer?",
    ),
    TalkMove.KEEPING_EVERYONE_TOGETHER: (
        "Raise your hand if you know the answer.",
        "Everyone look up here please.",
        "Make sure you're listening to your classmates.",
        "Let's all focus on the board.",
    ),
    TalkMove.REVOICING: (
        "So it had two edges, is that right?",
        "So you're saying the answer doubles.",
        "In other words, the sides are equal.",
        "So what I hear is that we multiply first.",
    ),
    TalkMove.GETTING_STUDENTS_TO_RELATE: (
        "Do you agree or disagree with Michael?",
        "Who else got the same answer?",
        "Can you build on what she just said?",
        "Does anyone want to respond to that idea?",
    ),
    TalkMove.RESTATING: (
        "Hexagon!",
        "Four minutes.",
        "Six sides.",
        "It doubles.",
    ),
    TalkMove.PRESS_FOR_REASONING: (
        "Why would it take 4 minutes?",
        "How did you decide that?",
        "Can you explain your thinking?",
        "What makes you say that?",
    ),
}

# Unique next-move markers; one token each so the tokenizer keeps them whole.
CUE_TOKENS: dict[TalkMove, str] = {
    TalkMove.NONE: "nextnone",
    TalkMove.WAIT: "nextwait",
    TalkMove.PRESS_FOR_ACCURACY: "nextaccuracy",
    TalkMove.KEEPING_EVERYONE_TOGETHER: "nexttogether",
    TalkMove.REVOICING: "nextrevoice",
    TalkMove.GETTING_STUDENTS_TO_RELATE: "nextrelate",
    TalkMove.RESTATING: "nextrestate",
    TalkMove.PRESS_FOR_REASONING: "nextreason",
}

_NUM_STUDENTS = 4


class SyntheticConfigError(ValueError):
    pass


@dataclass
class SyntheticConfig:
    num_transcripts: int
    mean_length: int
    transition_matrix: np.ndarray  # 8x8, row-stochastic
    lexical_cue_strength: float
    seed: int
    # Distribution of the first move of each transcript; uniform if omitted.
    start_distribution: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.transition_matrix = np.asarray(self.transition_matrix, dtype=np.float64)
        if self.transition_matrix.shape != (NUM_MOVES, NUM_MOVES):
            raise SyntheticConfigError(
                f"transition matrix must be 8x8, got {self.transition_matrix.shape}"
            )
        if np.any(self.transition_matrix < 0):
            raise SyntheticConfigError("transition matrix has negative entries")
        sums = self.transition_matrix.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > 1e-9)[0]
        if bad.size:
            raise SyntheticConfigError(
                f"transition row {bad[0]} sums to {sums[bad[0]]:.12f}, expected 1"
            )
        if not 0.0 <= self.lexical_cue_strength <= 1.0:
            raise SyntheticConfigError("lexical_cue_strength must lie in [0, 1]")
        if self.num_transcripts < 1 or self.mean_length < 2:
            raise SyntheticConfigError("need num_transcripts >= 1 and mean_length >= 2")
        if self.start_distribution is not None:
            self.start_distribution = np.asarray(self.start_distribution, dtype=np.float64)
            if self.start_distribution.shape != (NUM_MOVES,) or np.any(
                self.start_distribution < 0
            ):
                raise SyntheticConfigError("start_distribution must be 8 nonnegative floats")
            if abs(self.start_distribution.sum() - 1.0) > 1e-9:
                raise SyntheticConfigError("start_distribution must sum to 1")

    @classmethod
    def from_json(cls, path: str | Path) -> "SyntheticConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            num_transcripts=raw["num_transcripts"],
            mean_length=raw["mean_length"],
            transition_matrix=np.asarray(raw["transition_matrix"], dtype=np.float64),
            lexical_cue_strength=raw["lexical_cue_strength"],
            seed=raw["seed"],
            start_distribution=(
                np.asarray(raw["start_distribution"], dtype=np.float64)
                if raw.get("start_distribution") is not None
                else None
            ),
        )


def generate_synthetic(cfg: SyntheticConfig) -> Corpus:
    """Sample a corpus from the Markov policy. Deterministic given cfg.seed."""
    rng = np.random.default_rng(cfg.seed)
    start = (
        cfg.start_distribution
        if cfg.start_distribution is not None
        else np.full(NUM_MOVES, 1.0 / NUM_MOVES)
    )
    transcripts = []
    for k in range(cfg.num_transcripts):
        length = max(2, int(rng.poisson(cfg.mean_length)))
        moves = _sample_moves(rng, cfg.transition_matrix, start, length)
        transcripts.append(_render_transcript(rng, f"synth-{k:04d}", moves, cfg))
    return Corpus(transcripts=tuple(transcripts))


def _sample_moves(rng, matrix, start, length) -> list[TalkMove]:
    moves = [TalkMove(int(rng.choice(NUM_MOVES, p=start)))]
    for _ in range(length - 1):
        row = matrix[moves[-1].value]
        moves.append(TalkMove(int(rng.choice(NUM_MOVES, p=row))))
    return moves


def _render_transcript(rng, tid: str, moves: list[TalkMove], cfg: SyntheticConfig) -> Transcript:
    utterances = []
    student = 0
    prev_move: TalkMove | None = None
    for i, move in enumerate(moves):
        if move is TalkMove.WAIT:
            # A fresh student takes over unless the previous turn was also a
            # student turn (consecutive Wait keeps the same speaker).
            if prev_move is not TalkMove.WAIT:
                student = (student + 1) % _NUM_STUDENTS
            role, speaker = Role.STUDENT, f"s{student + 1}"
        else:
            role, speaker = Role.TEACHER, "t"
        pool = TEMPLATES[move]
        text = pool[int(rng.integers(len(pool)))]
        if i + 1 < len(moves) and cfg.lexical_cue_strength > 0:
            if rng.random() < cfg.lexical_cue_strength:
                text = f"{text} {CUE_TOKENS[moves[i + 1]]}"
        utterances.append(
            Utterance(speaker_id=speaker, role=role, text=text, talk_move=move)
        )
        prev_move = move
    return Transcript(id=tid, utterances=tuple(utterances))
