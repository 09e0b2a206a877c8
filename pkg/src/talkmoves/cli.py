"""Command-line entry points.

Outputs land in files named by flags; stdout carries human-readable
summaries, stderr carries logs. Every command that draws randomness takes
a seed, and identical flags + seed reproduce identical outputs.

Exit codes: 0 success, 1 validation/usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt
from .baselines import MoveOnlyConfig, MoveOnlyModel
from .corpus import (
    Bucket,
    CorpusError,
    load_corpus,
    load_split,
    save_corpus,
    save_split,
    split_corpus,
)
from .evaluation import (
    facet_eval,
    matrix_heatmap,
    matrix_to_csv,
    report_to_csv,
)
from .labels import MOVE_LABELS, TalkMove
from .numcore import NonFiniteError, backend_name, grad_check
from .service import ApiError, ServiceConfig, TalkMovesService, serve_forever
from .study import StudyError, sample_diagnostic
from .synth import SyntheticConfig, SyntheticConfigError, generate_synthetic
from .training import (
    TrainConfig,
    TrainingDiverged,
    corpus_examples,
    evaluate_examples,
    train,
    tune_window,
    tuning_to_csv,
)
from .tri_encoder import TriEncoderConfig, TriEncoderModel
from .vocab import build_vocab
from .windowing import ContextElement, Example, PAD_ELEMENT

GRAD_CHECK_TOL = 1e-4


class CLIError(ValueError):
    pass


def _read_corpus(corpus_path: str, split_path: str | None):
    corpus = load_corpus(corpus_path)
    if split_path:
        corpus = load_split(corpus, split_path)
    return corpus


def cmd_gen_synthetic(args) -> int:
    cfg = SyntheticConfig.from_json(args.config)
    corpus = generate_synthetic(cfg)
    if args.split_out:
        corpus = split_corpus(corpus, cfg.seed if args.seed is None else args.seed)
        save_split(corpus, args.split_out)
    save_corpus(corpus, args.out)
    n_utts = sum(len(t.utterances) for t in corpus.transcripts)
    print(f"wrote {len(corpus.transcripts)} transcripts / {n_utts} utterances to {args.out}")
    return 0


def cmd_ingest(args) -> int:
    corpus = load_corpus(args.input, raw_label_mode=not args.strict)
    counts = {m.label: 0 for m in TalkMove}
    for t in corpus.transcripts:
        for u in t.utterances:
            counts[u.talk_move.label] += 1
    if args.output:
        save_corpus(corpus, args.output)
    print(f"{len(corpus.transcripts)} transcripts, moves: {json.dumps(counts)}")
    return 0


def cmd_split(args) -> int:
    corpus = load_corpus(args.corpus)
    corpus = split_corpus(corpus, args.seed)
    save_split(corpus, args.out)
    sizes = {b.value: len(corpus.bucket(b)) for b in Bucket}
    print(f"split {json.dumps(sizes)} -> {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = TrainConfig.from_file(args.config) if args.config else TrainConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    corpus = _read_corpus(args.corpus, args.split)
    vocab = build_vocab(corpus, min_freq=args.min_freq)
    model, history = train(args.kind, corpus, vocab, cfg)
    ckpt.save_model(model, vocab, args.out)
    if args.history:
        history.to_csv(args.history)
    best = history.dev_macro_f1[history.best_epoch]
    print(
        f"trained {args.kind} for {cfg.epochs} epochs "
        f"(backend={backend_name()}); best epoch {history.best_epoch} "
        f"dev macro-F1 {best * 100:.2f} -> {args.out}"
    )
    return 0


def _print_report_row(name: str, report) -> None:
    per_class = " ".join(f"{f * 100:.2f}" for f in report.f1)
    print(
        f"{name}: P {report.macro_precision * 100:.2f} "
        f"R {report.macro_recall * 100:.2f} F1 {report.macro_f1 * 100:.2f} "
        f"Acc {report.accuracy * 100:.2f} | class F1 {per_class}"
    )


def cmd_evaluate(args) -> int:
    model, vocab, version = ckpt.load_model(args.model)
    corpus = _read_corpus(args.corpus, args.split)
    examples = corpus_examples(corpus, vocab, Bucket(args.bucket), model.config.w)
    if not examples:
        raise CLIError(f"no examples in bucket {args.bucket!r}")
    report = evaluate_examples(model, examples)
    _print_report_row(version, report)
    if args.report:
        report_to_csv(report, args.report)
    return 0


def cmd_confusion(args) -> int:
    model, vocab, _ = ckpt.load_model(args.model)
    corpus = _read_corpus(args.corpus, args.split)
    examples = corpus_examples(corpus, vocab, Bucket(args.bucket), model.config.w)
    if not examples:
        raise CLIError(f"no examples in bucket {args.bucket!r}")
    report = evaluate_examples(model, examples)
    matrix_to_csv(report.matrix, MOVE_LABELS, args.out)
    if args.heatmap:
        matrix_heatmap(report.matrix, MOVE_LABELS, args.heatmap, title="next-move confusion")
    print(f"confusion matrix ({int(report.matrix.sum())} examples) -> {args.out}")
    return 0


def cmd_facet_eval(args) -> int:
    model, vocab, version = ckpt.load_model(args.model)
    corpus = _read_corpus(args.corpus, args.split)
    examples = corpus_examples(corpus, vocab, Bucket(args.bucket), model.config.w)
    if not examples:
        raise CLIError(f"no examples in bucket {args.bucket!r}")
    golds = [ex.label for ex in examples]
    preds = [model.predict(ex) for ex in examples]
    report = facet_eval(golds, preds)
    _print_report_row(f"{version} (facets)", report)
    if args.report:
        report_to_csv(report, args.report)
    return 0


def cmd_tune_window(args) -> int:
    cfg = TrainConfig.from_file(args.config) if args.config else TrainConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    corpus = _read_corpus(args.corpus, args.split)
    vocab = build_vocab(corpus, min_freq=args.min_freq)
    rows = tune_window(corpus, vocab, cfg, kind=args.kind)
    tuning_to_csv(rows, args.out)
    for row in rows:
        print(
            f"{row.label}: P {row.precision * 100:.2f} R {row.recall * 100:.2f} "
            f"F1 {row.f1 * 100:.2f} Acc {row.accuracy * 100:.2f}"
        )
    print(f"tuning grid -> {args.out}")
    return 0


def cmd_diagnostic_sample(args) -> int:
    corpus = _read_corpus(args.corpus, args.split)
    diag = sample_diagnostic(corpus, seed=args.seed, w=args.w)
    diag.save(args.out)
    print(f"diagnostic set of {len(diag.entries)} examples -> {args.out}")
    return 0


def cmd_agreement_report(args) -> int:
    config = ServiceConfig(
        checkpoint=args.model,
        diagnostic=args.diagnostic,
        annotation_log=args.annotations,
        annotators=tuple(args.annotators.split(",")),
    )
    service = TalkMovesService(config)
    report, annotators = service.build_report()
    payload = report.to_json()
    payload["annotators"] = annotators
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"agreement report ({', '.join(annotators)}) -> {args.out}")
    if args.markdown:
        Path(args.markdown).write_text(report.to_markdown() + "\n", encoding="utf-8")
        print(f"markdown table -> {args.markdown}")
    return 0


def cmd_serve(args) -> int:
    config = ServiceConfig.from_file(args.config)
    serve_forever(config)
    return 0


def cmd_predict(args) -> int:
    config = ServiceConfig(checkpoint=args.model)
    service = TalkMovesService(config)
    context = json.loads(Path(args.context).read_text(encoding="utf-8"))
    response = service.predict({"context": context})
    print(f"prediction: {response['label']}  (model {response['model_version']})")
    for name, p in zip(MOVE_LABELS, response["probs"]):
        print(f"  {name:<28} {p * 100:6.2f}%")
    return 0


def cmd_dump_examples(args) -> int:
    model_w = args.w
    corpus = _read_corpus(args.corpus, args.split)
    vocab = build_vocab(corpus, min_freq=args.min_freq)
    examples = corpus_examples(corpus, vocab, Bucket(args.bucket), model_w)
    with Path(args.out).open("w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(
                json.dumps(
                    {
                        "origin": list(ex.origin),
                        "label": ex.label.label,
                        "window": [
                            {"s": el.s, "tokens": list(el.tokens), "move_id": el.move_id}
                            for el in ex.window
                        ],
                    }
                )
                + "\n"
            )
    print(f"{len(examples)} examples -> {args.out}")
    return 0


def _tiny_examples() -> list[Example]:
    return [
        Example(
            window=(
                PAD_ELEMENT,
                ContextElement(s=1, tokens=(2, 3, 4), move_id=0),
                ContextElement(s=1, tokens=(5, 1, 7, 2), move_id=1),
            ),
            label=TalkMove.PRESS_FOR_ACCURACY,
            origin=("tiny", 1),
        ),
        Example(
            window=(
                ContextElement(s=1, tokens=(3,), move_id=2),
                ContextElement(s=0, tokens=(9, 10), move_id=1),
                ContextElement(s=1, tokens=(11, 4, 6), move_id=5),
            ),
            label=TalkMove.WAIT,
            origin=("tiny", 2),
        ),
        Example(
            window=(PAD_ELEMENT, PAD_ELEMENT, ContextElement(s=1, tokens=(8,), move_id=7)),
            label=TalkMove.REVOICING,
            origin=("tiny", 0),
        ),
    ]


def run_tiny_grad_check(seed: int = 0) -> dict[str, float]:
    """Finite-difference check of every parameter of both trainable models
    at a tiny configuration. Returns per-model max relative error."""
    examples = _tiny_examples()
    results: dict[str, float] = {}

    tri = TriEncoderModel(
        TriEncoderConfig(
            vocab_size=12,
            w=3,
            word_dim=4,
            utt_hidden=6,
            move_dim=3,
            move_hidden=5,
            dialogue_hidden=4,
            ff_hidden=4,
        ),
        np.random.default_rng(seed),
    )
    move_only = MoveOnlyModel(
        MoveOnlyConfig(w=3, move_dim=3, move_hidden=5), np.random.default_rng(seed + 1)
    )

    for name, model in (("tri_encoder", tri), ("move_only", move_only)):
        weights = [1.0, 2.5, 0.7]

        def loss_and_grad():
            model.zero_grads()
            total = sum(
                model.loss_and_grad(ex, w) for ex, w in zip(examples, weights)
            )
            for p in model.params():
                p.grad /= len(examples)
            return total / len(examples)

        def loss_only():
            return (
                sum(model.loss(ex, w) for ex, w in zip(examples, weights))
                / len(examples)
            )

        results[name] = grad_check(loss_and_grad, model.params(), loss_only=loss_only)
    return results


def cmd_grad_check(args) -> int:
    if not args.tiny:
        raise CLIError("only --tiny is supported; full-size finite differences are impractical")
    results = run_tiny_grad_check(seed=args.seed)
    ok = True
    for name, err in results.items():
        passed = err < GRAD_CHECK_TOL
        ok = ok and passed
        print(f"{name}: max relative error {err:.3e} "
              f"({'PASS' if passed else 'FAIL'} at {GRAD_CHECK_TOL:g})")
    if not ok:
        raise NonFiniteError("gradient check failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="talkmoves",
        description="Next teacher talk move prediction toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="sample a synthetic corpus")
    p.add_argument("--config", required=True, help="SyntheticConfig JSON file")
    p.add_argument("--out", required=True, help="output corpus JSONL")
    p.add_argument("--split-out", help="also write a 70/15/15 split manifest")
    p.add_argument("--seed", type=int, help="split seed (defaults to the config seed)")
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("ingest", help="validate + normalize a transcript file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="write the normalized corpus here")
    p.add_argument("--strict", action="store_true", help="reject Marking/Context labels")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="assign transcripts to train/dev/test")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--config", help="TrainConfig JSON/TOML")
    p.add_argument("--kind", default="tri_encoder", choices=["tri_encoder", "move_only"])
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--history", help="per-epoch CSV")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--min-freq", type=int, default=1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a checkpoint on a split")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--bucket", default="dev", choices=["train", "dev", "test"])
    p.add_argument("--report", help="CSV output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("confusion", help="export a confusion matrix")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--bucket", default="dev", choices=["train", "dev", "test"])
    p.add_argument("--out", required=True, help="CSV output")
    p.add_argument("--heatmap", help="PNG output")
    p.set_defaults(func=cmd_confusion)

    p = sub.add_parser("facet-eval", help="score a checkpoint at the facet level")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--bucket", default="dev", choices=["train", "dev", "test"])
    p.add_argument("--report", help="CSV output")
    p.set_defaults(func=cmd_facet_eval)

    p = sub.add_parser("tune-window", help="run the window/weighting grid")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--config", help="TrainConfig JSON/TOML")
    p.add_argument("--kind", default="tri_encoder", choices=["tri_encoder", "move_only"])
    p.add_argument("--out", required=True, help="CSV output")
    p.add_argument("--seed", type=int)
    p.add_argument("--min-freq", type=int, default=1)
    p.set_defaults(func=cmd_tune_window)

    p = sub.add_parser("diagnostic-sample", help="draw the balanced diagnostic set")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--w", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diagnostic_sample)

    p = sub.add_parser("agreement-report", help="compute the annotation study report")
    p.add_argument("--diagnostic", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--annotators", default="annotator1,annotator2")
    p.add_argument("--out", required=True, help="JSON output")
    p.add_argument("--markdown", help="markdown table output")
    p.set_defaults(func=cmd_agreement_report)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--config", required=True, help="ServiceConfig JSON")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("predict", help="one-shot prediction from a context file")
    p.add_argument("--model", required=True)
    p.add_argument("--context", required=True, help="JSON list of context items")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("dump-examples", help="write windowed examples as JSONL")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--bucket", default="train", choices=["train", "dev", "test"])
    p.add_argument("--w", type=int, default=5)
    p.add_argument("--min-freq", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dump_examples)

    p = sub.add_parser("grad-check", help="finite-difference gradient verification")
    p.add_argument("--tiny", action="store_true", help="tiny model configuration")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_grad_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        CLIError,
        CorpusError,
        StudyError,
        SyntheticConfigError,
        ckpt.CheckpointError,
        ApiError,
        FileNotFoundError,
        json.JSONDecodeError,
        ValueError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (TrainingDiverged, NonFiniteError, RuntimeError) as e:
        print(f"runtime failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
