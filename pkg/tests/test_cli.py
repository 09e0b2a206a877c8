import csv
import json

import numpy as np
import pytest

from talkmoves.cli import main

from conftest import cycle_matrix


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """gen-synthetic -> split -> train a tiny model once; reused across tests."""
    root = tmp_path_factory.mktemp("cli")
    synth_cfg = {
        "num_transcripts": 8,
        "mean_length": 25,
        "transition_matrix": cycle_matrix().tolist(),
        "lexical_cue_strength": 0.0,
        "seed": 13,
    }
    (root / "synth.json").write_text(json.dumps(synth_cfg))
    rc = main([
        "gen-synthetic",
        "--config", str(root / "synth.json"),
        "--out", str(root / "corpus.jsonl"),
        "--split-out", str(root / "split.json"),
    ])
    assert rc == 0
    train_cfg = {
        "epochs": 2,
        "lr": 1e-3,
        "batch_size": 32,
        "w": 3,
        "seed": 7,
        "model": {"move_dim": 3, "move_hidden": 4},
    }
    (root / "train.json").write_text(json.dumps(train_cfg))
    rc = main([
        "train",
        "--corpus", str(root / "corpus.jsonl"),
        "--split", str(root / "split.json"),
        "--config", str(root / "train.json"),
        "--kind", "move_only",
        "--out", str(root / "model.ckpt"),
        "--history", str(root / "history.csv"),
    ])
    assert rc == 0
    return root


def test_gen_outputs_exist(workspace):
    assert (workspace / "corpus.jsonl").exists()
    split = json.loads((workspace / "split.json").read_text())
    assert set(split.values()) <= {"train", "dev", "test"}
    assert len(split) == 8


def test_train_wrote_history(workspace):
    with (workspace / "history.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 3  # header + 2 epochs


def test_evaluate_prints_report_row(workspace, capsys):
    rc = main([
        "evaluate",
        "--model", str(workspace / "model.ckpt"),
        "--corpus", str(workspace / "corpus.jsonl"),
        "--split", str(workspace / "split.json"),
        "--bucket", "dev",
        "--report", str(workspace / "report.csv"),
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert "F1" in out and "Acc" in out
    with (workspace / "report.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[1][0] == "Macro average"


def test_train_is_reproducible_bytewise(workspace):
    out_a = workspace / "a.ckpt"
    out_b = workspace / "b.ckpt"
    for out in (out_a, out_b):
        rc = main([
            "train",
            "--corpus", str(workspace / "corpus.jsonl"),
            "--split", str(workspace / "split.json"),
            "--config", str(workspace / "train.json"),
            "--kind", "move_only",
            "--out", str(out),
        ])
        assert rc == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_confusion_and_heatmap(workspace):
    rc = main([
        "confusion",
        "--model", str(workspace / "model.ckpt"),
        "--corpus", str(workspace / "corpus.jsonl"),
        "--split", str(workspace / "split.json"),
        "--out", str(workspace / "cm.csv"),
        "--heatmap", str(workspace / "cm.png"),
    ])
    assert rc == 0
    assert (workspace / "cm.png").read_bytes()[:4] == b"\x89PNG"
    with (workspace / "cm.csv").open() as fh:
        assert len(list(csv.reader(fh))) == 9


def test_facet_eval(workspace, capsys):
    rc = main([
        "facet-eval",
        "--model", str(workspace / "model.ckpt"),
        "--corpus", str(workspace / "corpus.jsonl"),
        "--split", str(workspace / "split.json"),
        "--report", str(workspace / "facet.csv"),
    ])
    assert rc == 0
    with (workspace / "facet.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 2 + 5  # header + macro + 5 facet bins


def test_dump_examples(workspace):
    rc = main([
        "dump-examples",
        "--corpus", str(workspace / "corpus.jsonl"),
        "--split", str(workspace / "split.json"),
        "--bucket", "train",
        "--w", "4",
        "--out", str(workspace / "examples.jsonl"),
    ])
    assert rc == 0
    lines = (workspace / "examples.jsonl").read_text().splitlines()
    row = json.loads(lines[0])
    assert len(row["window"]) == 4
    assert row["label"] in [
        "None", "Wait", "Press for Accuracy", "Keeping Everyone Together",
        "Revoicing", "Getting Students to Relate", "Restating", "Press for Reasoning",
    ]


def test_predict_command(workspace, capsys):
    ctx = [
        {"speaker_id": "t", "role": "teacher", "text": "what is it", "talk_move": "Press for Accuracy"},
        {"speaker_id": "s1", "role": "student", "text": "four", "talk_move": "Wait"},
    ]
    (workspace / "ctx.json").write_text(json.dumps(ctx))
    rc = main([
        "predict",
        "--model", str(workspace / "model.ckpt"),
        "--context", str(workspace / "ctx.json"),
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert "prediction:" in out
    assert "%" in out


def test_grad_check_exits_zero(capsys):
    assert main(["grad-check", "--tiny"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 2


def test_ingest_rejects_bad_label(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps({
        "transcript_id": "t", "idx": 0, "speaker_id": "t",
        "role": "teacher", "text": "x", "label": "Mystery",
    }) + "\n")
    rc = main(["ingest", "--input", str(bad)])
    assert rc == 1
    assert "Mystery" in capsys.readouterr().err


def test_unknown_bucket_flag_fails_fast(workspace, capsys):
    with pytest.raises(SystemExit):
        main([
            "evaluate",
            "--model", str(workspace / "model.ckpt"),
            "--corpus", str(workspace / "corpus.jsonl"),
            "--split", str(workspace / "split.json"),
            "--bucket", "validation",
        ])


def test_diagnostic_sample_insufficient_is_validation_error(workspace, capsys):
    rc = main([
        "diagnostic-sample",
        "--corpus", str(workspace / "corpus.jsonl"),
        "--split", str(workspace / "split.json"),
        "--out", str(workspace / "diag.jsonl"),
    ])
    assert rc == 1
    assert "need 37" in capsys.readouterr().err


def test_tune_window_grid(tmp_path, capsys):
    synth_cfg = {
        "num_transcripts": 6,
        "mean_length": 20,
        "transition_matrix": cycle_matrix().tolist(),
        "lexical_cue_strength": 0.0,
        "seed": 3,
    }
    (tmp_path / "synth.json").write_text(json.dumps(synth_cfg))
    main([
        "gen-synthetic",
        "--config", str(tmp_path / "synth.json"),
        "--out", str(tmp_path / "c.jsonl"),
        "--split-out", str(tmp_path / "s.json"),
    ])
    (tmp_path / "t.json").write_text(json.dumps({
        "epochs": 1, "lr": 1e-3, "batch_size": 64, "seed": 5,
        "model": {"move_dim": 3, "move_hidden": 4},
    }))
    rc = main([
        "tune-window",
        "--corpus", str(tmp_path / "c.jsonl"),
        "--split", str(tmp_path / "s.json"),
        "--config", str(tmp_path / "t.json"),
        "--kind", "move_only",
        "--out", str(tmp_path / "grid.csv"),
    ])
    assert rc == 0
    with (tmp_path / "grid.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 9
    assert rows[1][0] == "No weighting, window 5"
    assert rows[-1][0] == "Class weighting, window 7"
