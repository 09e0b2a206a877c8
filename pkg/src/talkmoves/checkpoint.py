"""Versioned model checkpoints.

Layout: magic ``TMCK``, format version (u32 LE), header length (u32 LE),
JSON header (model kind, config, vocabulary, canonical label order, param
manifest), the flat parameter blocks as little-endian float64 in manifest
order, and a trailing CRC32 (u32 LE) over all preceding bytes.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .baselines import MoveOnlyConfig, MoveOnlyModel
from .labels import MOVE_LABELS
from .tri_encoder import TriEncoderConfig, TriEncoderModel
from .vocab import Vocabulary

MAGIC = b"TMCK"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


class ChecksumError(CheckpointError):
    pass


class VersionError(CheckpointError):
    pass


def save_model(model, vocab: Vocabulary, path: str | Path) -> None:
    params = model.params()
    header = {
        "kind": model.kind,
        "config": model.config_dict(),
        "vocab": vocab.index,
        "labels": list(MOVE_LABELS),
        "params": [{"name": p.name, "shape": list(p.value.shape)} for p in params],
    }
    header_bytes = json.dumps(header, ensure_ascii=False).encode("utf-8")
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", FORMAT_VERSION)
    blob += struct.pack("<I", len(header_bytes))
    blob += header_bytes
    for p in params:
        blob += np.ascontiguousarray(p.value, dtype="<f8").tobytes()
    blob += struct.pack("<I", zlib.crc32(bytes(blob)))
    Path(path).write_bytes(bytes(blob))


def load_model(path: str | Path):
    """Returns (model, vocab, version_tag). Bitwise round-trips save_model."""
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a talkmoves checkpoint")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != FORMAT_VERSION:
        raise VersionError(
            f"{path}: format version {version} not supported (reader handles {FORMAT_VERSION})"
        )
    (stored_crc,) = struct.unpack_from("<I", raw, len(raw) - 4)
    if zlib.crc32(raw[:-4]) != stored_crc:
        raise ChecksumError(f"{path}: checksum mismatch (truncated or corrupt)")
    (header_len,) = struct.unpack_from("<I", raw, 8)
    header = json.loads(raw[12 : 12 + header_len].decode("utf-8"))
    if header["labels"] != list(MOVE_LABELS):
        raise CheckpointError(f"{path}: label order does not match this build")

    vocab = Vocabulary(index={tok: int(i) for tok, i in header["vocab"].items()})
    kind = header["kind"]
    if kind == "tri_encoder":
        model = TriEncoderModel(TriEncoderConfig(**header["config"]))
    elif kind == "move_only":
        model = MoveOnlyModel(MoveOnlyConfig(**header["config"]))
    else:
        raise CheckpointError(f"{path}: unknown model kind {kind!r}")

    params = model.params()
    manifest = header["params"]
    if len(manifest) != len(params):
        raise CheckpointError(f"{path}: parameter manifest does not match model")
    offset = 12 + header_len
    for p, meta in zip(params, manifest):
        shape = tuple(meta["shape"])
        if p.name != meta["name"] or p.value.shape != shape:
            raise CheckpointError(
                f"{path}: param mismatch: file has {meta['name']}{shape}, "
                f"model expects {p.name}{p.value.shape}"
            )
        count = int(np.prod(shape)) if shape else 1
        block = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        p.value[...] = block.reshape(shape)
        offset += count * 8
    if offset != len(raw) - 4:
        raise CheckpointError(f"{path}: trailing bytes after parameter blocks")
    version_tag = f"{kind}/v{version}/{stored_crc:08x}"
    return model, vocab, version_tag
