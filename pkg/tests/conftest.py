import numpy as np
import pytest

from talkmoves.corpus import Bucket, Corpus, Role, Transcript, Utterance
from talkmoves.labels import TalkMove
from talkmoves.synth import SyntheticConfig, generate_synthetic
from talkmoves.corpus import split_corpus


def utt(move: TalkMove, text: str = "hello there", speaker: str | None = None) -> Utterance:
    """Build a valid utterance for a move (role follows from the move)."""
    if move is TalkMove.WAIT:
        return Utterance(speaker_id=speaker or "s1", role=Role.STUDENT, text=text, talk_move=move)
    return Utterance(speaker_id=speaker or "t", role=Role.TEACHER, text=text, talk_move=move)


def transcript_from_moves(tid: str, moves: list[TalkMove], text: str = "hello there") -> Transcript:
    return Transcript(id=tid, utterances=tuple(utt(m, text) for m in moves))


def corpus_with_split(transcripts, train_ids=None, dev_ids=None, test_ids=None) -> Corpus:
    split = {}
    for t in transcripts:
        if dev_ids and t.id in dev_ids:
            split[t.id] = Bucket.DEV
        elif test_ids and t.id in test_ids:
            split[t.id] = Bucket.TEST
        else:
            split[t.id] = Bucket.TRAIN
    return Corpus(transcripts=tuple(transcripts), split=split)


def cycle_matrix() -> np.ndarray:
    """Deterministic cycle: move i is always followed by move (i+1) % 8."""
    m = np.zeros((8, 8))
    for i in range(8):
        m[i, (i + 1) % 8] = 1.0
    return m


@pytest.fixture(scope="session")
def cycle_corpus() -> Corpus:
    cfg = SyntheticConfig(
        num_transcripts=12,
        mean_length=30,
        transition_matrix=cycle_matrix(),
        lexical_cue_strength=0.0,
        seed=11,
    )
    return split_corpus(generate_synthetic(cfg), seed=11)
