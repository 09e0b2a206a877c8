import numpy as np
import pytest

from talkmoves.checkpoint import (
    ChecksumError,
    VersionError,
    load_model,
    save_model,
)
from talkmoves.labels import TalkMove
from talkmoves.tri_encoder import (
    TriEncoderConfig,
    TriEncoderModel,
    example_ext_inputs,
    load_sidecar,
    save_sidecar,
)
from talkmoves.vocab import Vocabulary
from talkmoves.windowing import ContextElement, Example, PAD_ELEMENT, pad_window


def tiny_config(**overrides):
    base = dict(
        vocab_size=12,
        w=3,
        word_dim=4,
        utt_hidden=6,
        move_dim=3,
        move_hidden=5,
        dialogue_hidden=4,
        ff_hidden=4,
    )
    base.update(overrides)
    return TriEncoderConfig(**base)


def tiny_example(w=3):
    elements = [
        ContextElement(s=1, tokens=(2, 3), move_id=0),
        ContextElement(s=1, tokens=(4,), move_id=1),
        ContextElement(s=0, tokens=(5, 6, 7), move_id=2),
    ]
    return Example(window=pad_window(elements, w), label=TalkMove.WAIT, origin=("t", 2))


@pytest.fixture(scope="module")
def full_size_model():
    return TriEncoderModel(TriEncoderConfig(vocab_size=50), np.random.default_rng(0))


class TestPaperDimensions:
    """Shape relations at the full configuration."""

    @pytest.fixture()
    def model(self, full_size_model):
        return full_size_model

    def test_utterance_vector_is_hidden_plus_speaker_bit(self, model):
        a, _ = model.encode_utterance((3, 4, 5), s=1)
        assert a.shape == (513,)

    def test_speaker_bit_is_the_only_difference(self, model):
        a0, _ = model.encode_utterance((3, 4, 5), s=0)
        a1, _ = model.encode_utterance((3, 4, 5), s=1)
        assert np.array_equal(a0[:-1], a1[:-1])
        assert (a0[-1], a1[-1]) == (0.0, 1.0)

    def test_context_vector_dims(self, model):
        ex = tiny_example(w=5)
        trace = model.forward(ex)
        assert trace.dialogue_state.shape == (1025,)
        assert trace.move_state.shape == (64,)
        assert trace.context_vec.shape == (1089,)
        assert trace.probs.shape == (8,)

    def test_encoders_are_addressable(self, model):
        vecs = np.random.default_rng(3).normal(size=(5, 513))
        b, _ = model.encode_dialogue(vecs)
        assert b.shape == (1025,)
        d, _ = model.encode_talkmoves([0, 1, 8, 8, 2])
        assert d.shape == (64,)

    def test_move_order_sensitivity(self, model):
        a, _ = model.encode_talkmoves([1, 1, 1, 1, 2])
        b, _ = model.encode_talkmoves([2, 1, 1, 1, 1])
        assert not np.allclose(a, b)


class TestForward:
    def test_probs_sum_to_one(self):
        model = TriEncoderModel(tiny_config(), np.random.default_rng(1))
        for seed in range(5):
            rng = np.random.default_rng(seed)
            elements = [
                ContextElement(
                    s=int(rng.integers(2)),
                    tokens=tuple(rng.integers(12, size=rng.integers(1, 6)).tolist()),
                    move_id=int(rng.integers(8)),
                )
                for _ in range(3)
            ]
            ex = Example(window=tuple(elements), label=TalkMove.NONE, origin=("t", 0))
            trace = model.forward(ex)
            assert abs(trace.probs.sum() - 1.0) < 1e-9
            assert np.all(trace.probs > 0)

    def test_pad_only_utterance_with_zero_gru_is_zero(self):
        model = TriEncoderModel(tiny_config(), np.random.default_rng(2))
        for p in model.utt_gru.params():
            p.value[...] = 0.0
        a, _ = model.encode_utterance((), s=0)
        assert np.all(a[:-1] == 0.0)

    def test_all_pad_moves_with_zero_gru_give_zero_state(self):
        model = TriEncoderModel(tiny_config(), np.random.default_rng(3))
        for p in model.move_gru.params():
            p.value[...] = 0.0
        ex = Example(
            window=(PAD_ELEMENT, PAD_ELEMENT, PAD_ELEMENT),
            label=TalkMove.NONE,
            origin=("t", 0),
        )
        trace = model.forward(ex)
        assert np.all(trace.move_state == 0.0)

    def test_dialogue_order_sensitivity(self):
        model = TriEncoderModel(tiny_config(), np.random.default_rng(4))
        e1 = ContextElement(s=1, tokens=(2,), move_id=0)
        e2 = ContextElement(s=0, tokens=(9, 10), move_id=4)
        e3 = ContextElement(s=1, tokens=(5,), move_id=7)
        a = model.forward(Example(window=(e1, e2, e3), label=TalkMove.NONE, origin=("t", 0)))
        b = model.forward(Example(window=(e3, e2, e1), label=TalkMove.NONE, origin=("t", 0)))
        assert not np.allclose(a.dialogue_state, b.dialogue_state)
        assert not np.allclose(a.move_state, b.move_state)

    def test_w1_dialogue_equals_single_cell(self):
        from talkmoves.numcore import gru_cell_forward

        model = TriEncoderModel(tiny_config(w=1), np.random.default_rng(5))
        ex = Example(
            window=(ContextElement(s=1, tokens=(2, 3), move_id=0),),
            label=TalkMove.NONE,
            origin=("t", 0),
        )
        trace = model.forward(ex)
        h, _ = gru_cell_forward(
            trace.utt_vecs[0], np.zeros(model.config.dialogue_hidden), model.dialogue_gru
        )
        assert trace.dialogue_state == pytest.approx(h, abs=1e-15)

    def test_deterministic_trace(self):
        model = TriEncoderModel(tiny_config(), np.random.default_rng(6))
        ex = tiny_example()
        t1 = model.forward(ex)
        t2 = model.forward(ex)
        assert np.array_equal(t1.logits, t2.logits)
        assert np.array_equal(t1.probs, t2.probs)

    def test_token_out_of_range(self):
        model = TriEncoderModel(tiny_config(), np.random.default_rng(7))
        with pytest.raises(ValueError, match="out of range"):
            model.encode_utterance((99,), s=0)


class TestPredict:
    def test_unique_max(self):
        model = TriEncoderModel(tiny_config(), np.random.default_rng(8))
        model.ff2_W.value[...] = 0.0
        model.ff2_b.value[...] = 0.0
        model.ff2_b.value[1] = 3.0
        assert model.predict(tiny_example()) is TalkMove.WAIT

    def test_tie_breaks_to_lowest_index(self):
        model = TriEncoderModel(tiny_config(), np.random.default_rng(9))
        model.ff2_W.value[...] = 0.0
        model.ff2_b.value[...] = 0.0
        # exact two-way tie between indices 2 and 6
        model.ff2_b.value[2] = 1.0
        model.ff2_b.value[6] = 1.0
        assert model.predict(tiny_example()) is TalkMove.PRESS_FOR_ACCURACY
        # all-zero logits tie eight ways -> lowest canonical index
        model.ff2_b.value[...] = 0.0
        assert model.predict(tiny_example()) is TalkMove.NONE

    def test_argmax_invariant_under_logit_shift(self):
        model = TriEncoderModel(tiny_config(), np.random.default_rng(10))
        ex = tiny_example()
        before = model.predict(ex)
        model.ff2_b.value += 17.5  # uniform shift of every logit
        assert model.predict(ex) is before


class TestExternalEmbeddings:
    def test_zero_ext_contributes_nothing(self):
        cfg_ext = tiny_config(ext_utterance_dim=2, ext_context_dim=3)
        ext_model = TriEncoderModel(cfg_ext, np.random.default_rng(11))
        plain = TriEncoderModel(tiny_config(), np.random.default_rng(12))
        # share every weight; ext columns of the ext model stay arbitrary
        for p_ext, p_plain in zip(ext_model.params(), plain.params()):
            if p_ext.value.shape == p_plain.value.shape:
                p_ext.value[...] = p_plain.value
        d_in = plain.config.utt_vec_dim
        for name in ("W_z", "W_r", "W_h"):
            getattr(ext_model.dialogue_gru, name).value[:, :d_in] = getattr(
                plain.dialogue_gru, name
            ).value
        for name in ("U_z", "U_r", "U_h", "b_z", "b_r", "b_h"):
            getattr(ext_model.dialogue_gru, name).value[...] = getattr(
                plain.dialogue_gru, name
            ).value
        ctx = plain.config.context_dim
        ext_model.ff1_W.value[:, :ctx] = plain.ff1_W.value
        ext_model.ff1_b.value[...] = plain.ff1_b.value

        ex = tiny_example()
        t_plain = plain.forward(ex)
        t_ext = ext_model.forward(ex, ext_u=np.zeros((3, 2)), ext_c=np.zeros(3))
        assert t_ext.logits == pytest.approx(t_plain.logits, abs=1e-12)

    def test_ext_dim_arithmetic(self):
        model = TriEncoderModel(tiny_config(ext_context_dim=8), np.random.default_rng(13))
        trace = model.forward(tiny_example(), ext_c=np.ones(8))
        assert trace.context_vec.shape == (4 + 5 + 8,)

    def test_ext_validation(self):
        model = TriEncoderModel(tiny_config(), np.random.default_rng(14))
        with pytest.raises(ValueError, match="configured without"):
            model.forward(tiny_example(), ext_c=np.zeros(3))
        ext_model = TriEncoderModel(tiny_config(ext_context_dim=3), np.random.default_rng(15))
        with pytest.raises(ValueError, match="expects ext_c"):
            ext_model.forward(tiny_example())
        with pytest.raises(ValueError, match="shape"):
            ext_model.forward(tiny_example(), ext_c=np.zeros(4))

    def test_sidecar_round_trip(self, tmp_path):
        cfg = tiny_config(ext_utterance_dim=2, ext_context_dim=3)
        model = TriEncoderModel(cfg, np.random.default_rng(16))
        rng = np.random.default_rng(17)
        utt_vecs = {f"t:{i}": rng.normal(size=2) for i in range(3)}
        ctx_vecs = {"t:2": rng.normal(size=3)}
        up, cp = tmp_path / "u.jsonl", tmp_path / "c.jsonl"
        save_sidecar(utt_vecs, up)
        save_sidecar(ctx_vecs, cp)
        ext = example_ext_inputs(tiny_example(), cfg, load_sidecar(up), load_sidecar(cp))
        logits_a = model.forward(tiny_example(), **ext).logits
        ext2 = example_ext_inputs(tiny_example(), cfg, load_sidecar(up), load_sidecar(cp))
        logits_b = model.forward(tiny_example(), **ext2).logits
        assert np.array_equal(logits_a, logits_b)


class TestCheckpoint:
    def test_round_trip_is_bitwise(self, tmp_path):
        model = TriEncoderModel(tiny_config(), np.random.default_rng(18))
        vocab = Vocabulary(index={"<pad>": 0, "<unk>": 1, "hello": 2})
        path = tmp_path / "m.ckpt"
        save_model(model, vocab, path)
        loaded, loaded_vocab, tag = load_model(path)
        assert loaded_vocab.index == vocab.index
        assert tag.startswith("tri_encoder/v1/")
        for p, q in zip(model.params(), loaded.params()):
            assert p.name == q.name
            assert np.array_equal(p.value, q.value)

    def test_truncated_file_fails_checksum(self, tmp_path):
        model = TriEncoderModel(tiny_config(), np.random.default_rng(19))
        vocab = Vocabulary(index={"<pad>": 0, "<unk>": 1})
        path = tmp_path / "m.ckpt"
        save_model(model, vocab, path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 100])
        with pytest.raises(ChecksumError):
            load_model(path)

    def test_unsupported_version_is_explicit(self, tmp_path):
        import struct
        import zlib

        model = TriEncoderModel(tiny_config(), np.random.default_rng(20))
        vocab = Vocabulary(index={"<pad>": 0, "<unk>": 1})
        path = tmp_path / "m.ckpt"
        save_model(model, vocab, path)
        raw = bytearray(path.read_bytes())
        raw[4:8] = struct.pack("<I", 2)  # future format version
        body = bytes(raw[:-4])
        path.write_bytes(body + struct.pack("<I", zlib.crc32(body)))
        with pytest.raises(VersionError, match="version 2"):
            load_model(path)

    def test_not_a_checkpoint(self, tmp_path):
        path = tmp_path / "m.ckpt"
        path.write_bytes(b"definitely not a checkpoint")
        from talkmoves.checkpoint import CheckpointError

        with pytest.raises(CheckpointError):
            load_model(path)
