import json

import pytest

from talkmoves.corpus import (
    Bucket,
    Corpus,
    CorpusError,
    Role,
    Transcript,
    Utterance,
    load_corpus,
    load_split,
    save_corpus,
    save_split,
    split_corpus,
    split_sizes,
)
from talkmoves.labels import TalkMove

from conftest import transcript_from_moves


def write_jsonl(path, rows):
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")


def row(tid="t1", idx=0, speaker="t", role="teacher", text="hi", label="None"):
    return {
        "transcript_id": tid,
        "idx": idx,
        "speaker_id": speaker,
        "role": role,
        "text": text,
        "label": label,
    }


class TestLoad:
    def test_marking_merges_into_restating(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(p, [row(label="Marking")])
        corpus = load_corpus(p)
        assert corpus.transcripts[0].utterances[0].talk_move is TalkMove.RESTATING

    def test_context_merges_into_wait(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(p, [row(speaker="s1", role="student", label="Context")])
        corpus = load_corpus(p)
        assert corpus.transcripts[0].utterances[0].talk_move is TalkMove.WAIT

    def test_strict_mode_rejects_raw_labels(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(p, [row(label="Marking")])
        with pytest.raises(CorpusError, match="Marking"):
            load_corpus(p, raw_label_mode=False)

    def test_empty_file_is_an_error(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text("", encoding="utf-8")
        with pytest.raises(CorpusError, match="no transcripts"):
            load_corpus(p)

    def test_malformed_line_reports_line_number(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text(json.dumps(row()) + "\n{not json\n", encoding="utf-8")
        with pytest.raises(CorpusError, match=":2"):
            load_corpus(p)

    def test_unknown_label_reports_label(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(p, [row(label="Nudging")])
        with pytest.raises(CorpusError, match="Nudging"):
            load_corpus(p)

    def test_student_with_teacher_move_rejected(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(p, [row(role="student", speaker="s1", label="Revoicing")])
        with pytest.raises(CorpusError, match="Wait"):
            load_corpus(p)

    def test_non_increasing_idx_rejected(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(p, [row(idx=1), row(idx=1, label="Restating")])
        with pytest.raises(CorpusError, match="not increasing"):
            load_corpus(p)

    def test_round_trip(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(
            p,
            [
                row(),
                row(idx=1, label="Press for Accuracy", text="What is it?"),
                row(idx=2, speaker="s1", role="student", label="Wait", text="Four!"),
                row(tid="t2", idx=0, label="Revoicing", text="So it had two"),
            ],
        )
        corpus = load_corpus(p)
        out = tmp_path / "c2.jsonl"
        save_corpus(corpus, out)
        assert load_corpus(out) == corpus

    def test_label_closure(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(p, [row(label="Marking"), row(idx=1, label="Press for Reasoning")])
        corpus = load_corpus(p)
        moves = {u.talk_move for t in corpus.transcripts for u in t.utterances}
        assert moves <= set(TalkMove)


class TestInvariants:
    def test_teacher_cannot_wait(self):
        with pytest.raises(CorpusError):
            Utterance(speaker_id="t", role=Role.TEACHER, text="", talk_move=TalkMove.WAIT)

    def test_empty_transcript_rejected(self):
        with pytest.raises(CorpusError):
            Transcript(id="x", utterances=())

    def test_split_must_cover_ids(self):
        t = transcript_from_moves("a", [TalkMove.NONE])
        with pytest.raises(CorpusError):
            Corpus(transcripts=(t,), split={"b": Bucket.TRAIN})


class TestSplit:
    def test_sizes_216(self):
        assert split_sizes(216) == (152, 32, 32)

    def test_sizes_10(self):
        # train sits exactly on its 7.0 target, so the leftover goes to dev
        assert split_sizes(10) == (7, 2, 1)

    def test_sizes_sum(self):
        for n in range(3, 400):
            assert sum(split_sizes(n)) == n

    def test_sizes_near_rounded_target(self):
        for n in range(3, 400):
            sizes = split_sizes(n)
            targets = (round(0.70 * n), round(0.15 * n), round(0.15 * n))
            for got, want in zip(sizes, targets):
                assert abs(got - want) <= 1

    def test_deterministic(self):
        ts = [transcript_from_moves(f"t{i}", [TalkMove.NONE]) for i in range(20)]
        c = Corpus(transcripts=tuple(ts))
        assert split_corpus(c, 7).split == split_corpus(c, 7).split
        assert split_corpus(c, 7).split != split_corpus(c, 8).split

    def test_too_few_transcripts(self):
        ts = [transcript_from_moves(f"t{i}", [TalkMove.NONE]) for i in range(2)]
        with pytest.raises(CorpusError, match="at least 3"):
            split_corpus(Corpus(transcripts=tuple(ts)), 0)

    def test_manifest_round_trip(self, tmp_path):
        ts = [transcript_from_moves(f"t{i}", [TalkMove.NONE]) for i in range(10)]
        c = split_corpus(Corpus(transcripts=tuple(ts)), 3)
        path = tmp_path / "split.json"
        save_split(c, path)
        reloaded = load_split(Corpus(transcripts=tuple(ts)), path)
        assert reloaded.split == c.split
