"""HTTP facade: live prediction, annotation collection, agreement report.

Plain stdlib HTTP/1.1 + JSON. Annotation records are acked only after an
fsync'd append to a JSONL log, so an acked record survives any crash. The
model snapshot is immutable after load; to swap checkpoints, restart.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from .checkpoint import load_model
from .corpus import CorpusError, Role, Utterance
from .labels import MOVE_LABELS, TalkMove, UnknownLabelError
from .study import (
    AnnotationRecord,
    DiagnosticSet,
    StudyError,
    agreement_report,
)
from .windowing import Example, elements_from_utterances, pad_window

log = logging.getLogger("talkmoves.service")


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8077"
    checkpoint: str | None = None
    diagnostic: str | None = None
    annotation_log: str = "annotations.jsonl"
    annotators: tuple[str, ...] = ("annotator1", "annotator2")
    static_dir: str | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if "annotators" in raw:
            raw["annotators"] = tuple(raw["annotators"])
        return cls(**raw)


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


class AnnotationLog:
    """Append-only JSONL store with fsync-on-append.

    A torn trailing line (no newline, interrupted write) is tolerated at
    load and dropped: it was never acked. Torn lines elsewhere are errors.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.records: list[AnnotationRecord] = []
        self._seen: set[tuple[str, str]] = set()
        if self.path.exists():
            self._replay()
        self._fh = self.path.open("a", encoding="utf-8")

    def _replay(self) -> None:
        raw = self.path.read_text(encoding="utf-8")
        lines = raw.split("\n")
        incomplete = lines[-1] != ""  # file does not end with newline
        body = lines[:-1]
        for i, line in enumerate(body):
            if not line.strip():
                continue
            try:
                record = AnnotationRecord.from_json(json.loads(line))
            except (json.JSONDecodeError, KeyError, ValueError) as e:
                raise CorpusError(f"{self.path}:{i + 1}: corrupt annotation line: {e}")
            self._index(record)
        if incomplete:
            log.warning("%s: dropping torn trailing line (crash before ack)", self.path)

    def _index(self, record: AnnotationRecord) -> None:
        self.records.append(record)
        self._seen.add((record.annotator_id, record.example_id))

    def has(self, annotator_id: str, example_id: str) -> bool:
        return (annotator_id, example_id) in self._seen

    def append(self, record: AnnotationRecord) -> None:
        with self._lock:
            if self.has(record.annotator_id, record.example_id):
                raise ApiError(
                    409,
                    f"annotation for {record.example_id!r} by "
                    f"{record.annotator_id!r} already recorded",
                )
            line = json.dumps(record.to_json(), ensure_ascii=False) + "\n"
            self._fh.write(line)
            self._fh.flush()
            os.fsync(self._fh.fileno())
            self._index(record)

    def for_annotator(self, annotator_id: str) -> list[AnnotationRecord]:
        return [r for r in self.records if r.annotator_id == annotator_id]

    def close(self) -> None:
        self._fh.close()


class TalkMovesService:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.model = None
        self.vocab = None
        self.version = "none"
        if config.checkpoint:
            self.model, self.vocab, self.version = load_model(config.checkpoint)
            self._warmup()
        self.diagnostic: DiagnosticSet | None = None
        self.annotations: AnnotationLog | None = None
        if config.diagnostic:
            self.diagnostic = DiagnosticSet.load(config.diagnostic)
            self.annotations = AnnotationLog(config.annotation_log)
        self._model_preds: dict[str, TalkMove] | None = None
        self._preds_lock = threading.Lock()

    @property
    def w(self) -> int | None:
        return self.model.config.w if self.model is not None else None

    def _warmup(self) -> None:
        # trigger kernel compilation so the first request is fast
        example = Example(
            window=pad_window([], self.model.config.w), label=TalkMove.NONE, origin=("warmup", 0)
        )
        self.model.forward(example)

    # -- endpoint logic ----------------------------------------------------

    def predict(self, body: dict) -> dict:
        if self.model is None:
            raise ApiError(503, "no model loaded")
        items = body.get("context")
        if not isinstance(items, list):
            raise ApiError(400, "body must contain a 'context' list")
        truncated = False
        if len(items) > self.w:
            items = items[-self.w :]
            truncated = True
        utts = [self._parse_item(i, item) for i, item in enumerate(items)]
        elements = elements_from_utterances(utts, self.vocab)
        window = pad_window(elements, self.w)
        example = Example(window=window, label=TalkMove.NONE, origin=("live", len(items)))
        probs = self.model.predict_probs(example)
        pred = TalkMove(int(np.argmax(probs)))
        return {
            "probs": [float(p) for p in probs],
            "label": pred.label,
            "model_version": self.version,
            "truncated": truncated,
            "echo": [
                {
                    "s": el.s,
                    "talk_move": MOVE_LABELS[el.move_id] if el.move_id < len(MOVE_LABELS) else "<pad>",
                    "n_tokens": len(el.tokens),
                }
                for el in window
            ],
        }

    def _parse_item(self, i: int, item: dict) -> Utterance:
        if not isinstance(item, dict):
            raise ApiError(400, f"context[{i}] must be an object")
        for key in ("speaker_id", "role", "text"):
            if key not in item:
                raise ApiError(400, f"context[{i}] missing field {key!r}")
        try:
            role = Role(item["role"])
        except ValueError:
            raise ApiError(400, f"context[{i}]: unknown role {item['role']!r}")
        raw_move = item.get("talk_move")
        if raw_move is None:
            if role is Role.STUDENT:
                move = TalkMove.WAIT
            else:
                raise ApiError(400, f"context[{i}]: teacher items require talk_move")
        else:
            try:
                move = TalkMove.from_label(raw_move)
            except UnknownLabelError as e:
                raise ApiError(422, f"context[{i}]: {e}")
        try:
            return Utterance(
                speaker_id=str(item["speaker_id"]),
                role=role,
                text=str(item["text"]),
                talk_move=move,
            )
        except CorpusError as e:
            raise ApiError(422, f"context[{i}]: {e}")

    def diagnostic_next(self, annotator: str | None) -> dict:
        if self.diagnostic is None:
            raise ApiError(503, "no diagnostic set loaded")
        if not annotator:
            raise ApiError(400, "missing 'annotator' query parameter")
        if annotator not in self.config.annotators:
            raise ApiError(404, f"unknown annotator {annotator!r}")
        done = 0
        pending = None
        for entry in self.diagnostic.entries:
            if self.annotations.has(annotator, entry.example_id):
                done += 1
            elif pending is None:
                pending = entry
        total = len(self.diagnostic.entries)
        if pending is None:
            return {"done": True, "progress": {"done": done, "total": total}}
        return {
            "done": False,
            "example": pending.to_json(),
            "progress": {"done": done, "total": total},
        }

    def submit_annotation(self, body: dict) -> dict:
        if self.diagnostic is None:
            raise ApiError(503, "no diagnostic set loaded")
        try:
            record = AnnotationRecord.from_json(body)
        except KeyError as e:
            raise ApiError(400, f"missing field {e}")
        except (StudyError, UnknownLabelError) as e:
            raise ApiError(422, str(e))
        if record.annotator_id not in self.config.annotators:
            raise ApiError(404, f"unknown annotator {record.annotator_id!r}")
        known = {e.example_id for e in self.diagnostic.entries}
        if record.example_id not in known:
            raise ApiError(422, f"unknown example id {record.example_id!r}")
        if not record.timestamp:
            record = AnnotationRecord(
                annotator_id=record.annotator_id,
                example_id=record.example_id,
                primary=record.primary,
                acceptable=record.acceptable,
                timestamp=datetime.now(timezone.utc).isoformat(),
            )
        self.annotations.append(record)  # raises 409 on duplicate
        done = len(self.annotations.for_annotator(record.annotator_id))
        return {"ok": True, "progress": {"done": done, "total": len(self.diagnostic.entries)}}

    def build_report(self):
        """Agreement report over completed annotators; raises ApiError when
        the study is not far enough along."""
        if self.diagnostic is None:
            raise ApiError(503, "no diagnostic set loaded")
        entry_ids = {e.example_id for e in self.diagnostic.entries}
        completed = [
            a
            for a in self.config.annotators
            if entry_ids <= {r.example_id for r in self.annotations.for_annotator(a)}
        ]
        if not completed:
            raise ApiError(409, "no annotator has completed the diagnostic set")
        preds = self._model_predictions()
        if preds is None:
            raise ApiError(409, "no model loaded; model predictions unavailable")
        ann1 = [
            r
            for r in self.annotations.for_annotator(completed[0])
            if r.example_id in entry_ids
        ]
        ann2 = None
        if len(completed) > 1:
            ann2 = [
                r
                for r in self.annotations.for_annotator(completed[1])
                if r.example_id in entry_ids
            ]
        report = agreement_report(ann1, ann2, preds, self.diagnostic.gold_map())
        return report, completed[:2]

    def report(self) -> dict:
        report, annotators = self.build_report()
        out = report.to_json()
        out["annotators"] = annotators
        return out

    def _model_predictions(self) -> dict[str, TalkMove] | None:
        if self.model is None or self.vocab is None:
            return None
        with self._preds_lock:
            if self._model_preds is None:
                preds = {}
                for entry in self.diagnostic.entries:
                    utts = [
                        Utterance(
                            speaker_id=item["speaker_id"],
                            role=Role(item["role"]),
                            text=item["text"],
                            talk_move=TalkMove.from_label(item["talk_move"]),
                        )
                        for item in entry.context
                    ]
                    elements = elements_from_utterances(utts, self.vocab)
                    window = pad_window(elements, self.w)
                    example = Example(window=window, label=entry.gold, origin=("diag", 0))
                    preds[entry.example_id] = self.model.predict(example)
                self._model_preds = preds
            return self._model_preds

    def meta(self) -> dict:
        return {
            "labels": list(MOVE_LABELS),
            "w": self.w,
            "model_version": self.version,
            "annotators": list(self.config.annotators),
            "diagnostic_size": len(self.diagnostic.entries) if self.diagnostic else None,
        }


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
}


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "talkmoves"

    @property
    def app(self) -> TalkMovesService:
        return self.server.app  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):  # route to logging instead of stderr writes
        log.info("%s %s", self.address_string(), fmt % args)

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise ApiError(400, "empty request body")
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ApiError(400, f"malformed JSON: {e.msg}")
        if not isinstance(body, dict):
            raise ApiError(400, "request body must be a JSON object")
        return body

    def _dispatch(self, method: str) -> None:
        started = time.monotonic()
        parsed = urlparse(self.path)
        route = (method, parsed.path)
        try:
            if route == ("POST", "/predict"):
                self._send_json(200, self.app.predict(self._read_json()))
            elif route == ("GET", "/diagnostic/next"):
                params = parse_qs(parsed.query)
                annotator = params.get("annotator", [None])[0]
                self._send_json(200, self.app.diagnostic_next(annotator))
            elif route == ("POST", "/annotations"):
                self._send_json(200, self.app.submit_annotation(self._read_json()))
            elif route == ("GET", "/report"):
                self._send_json(200, self.app.report())
            elif route == ("GET", "/meta"):
                self._send_json(200, self.app.meta())
            elif method == "GET":
                self._serve_static(parsed.path)
            else:
                raise ApiError(404, f"no route {method} {parsed.path}")
        except ApiError as e:
            self._send_json(e.status, {"error": e.message})
        except Exception:
            log.exception("internal error on %s %s", method, parsed.path)
            self._send_json(500, {"error": "internal error"})
        finally:
            log.info(
                "%s %s -> %.1f ms", method, parsed.path, (time.monotonic() - started) * 1e3
            )

    def _serve_static(self, path: str) -> None:
        root = self.app.config.static_dir
        if root is None:
            raise ApiError(404, f"no route GET {path}")
        root = Path(root).resolve()
        rel = path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not str(target).startswith(str(root)) or not target.is_file():
            raise ApiError(404, f"no such file {path}")
        body = target.read_bytes()
        self.send_response(200)
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()


def make_server(config: ServiceConfig) -> ThreadingHTTPServer:
    host, _, port = config.listen.rpartition(":")
    server = ThreadingHTTPServer((host or "127.0.0.1", int(port)), _Handler)
    server.app = TalkMovesService(config)  # type: ignore[attr-defined]
    return server


def serve_forever(config: ServiceConfig) -> None:
    server = make_server(config)
    host, port = server.server_address[:2]
    log.info("listening on %s:%s (model=%s)", host, port, server.app.version)
    print(f"talkmoves service on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
