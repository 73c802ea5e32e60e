"""AGCK binary checkpoints for every model kind.

Layout (little-endian)::

    b"AGCK"                magic
    u32                    format version (1)
    u8                     kind tag
    u32                    layer count L
    L x (u32 out, u32 in)  layer shapes
    L x (W, b)             float64 weights (row-major) then bias

The file must end exactly after the last bias.
"""

from __future__ import annotations

import json
import logging
import struct
from pathlib import Path
from typing import Any

import numpy as np

from ..output.writers import atomic_write_bytes, atomic_write_text
from .errors import CheckpointError
from .model import ModelFunction, ModelKind, build_model

log = logging.getLogger(__name__)

MAGIC = b"AGCK"
VERSION = 1

KIND_TAGS: dict[ModelKind, int] = {
    ModelKind.MLP: 0,
    ModelKind.LINEAR: 1,
    ModelKind.QUADRATIC: 2,
    ModelKind.SINUSOID1D: 3,
}
_TAG_KINDS = {tag: kind for kind, tag in KIND_TAGS.items()}

_HEAD = struct.Struct("<4sIBI")
_SHAPE = struct.Struct("<II")


def encode_checkpoint(model: ModelFunction) -> bytes:
    parts = [_HEAD.pack(MAGIC, VERSION, KIND_TAGS[model.kind], len(model.layers))]
    for layer in model.layers:
        parts.append(_SHAPE.pack(layer.out_dim, layer.in_dim))
    for layer in model.layers:
        parts.append(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
    return b"".join(parts)


def decode_checkpoint(data: bytes, source: str = "<bytes>") -> ModelFunction:
    """Parse AGCK bytes.

    Raises
    ------
    CheckpointError:
        Bad magic, unsupported version, unknown kind tag, truncated or
        trailing data, or layer shapes the model kind rejects.
    """
    if len(data) < _HEAD.size:
        raise CheckpointError(f"{source}: truncated header")
    magic, version, tag, n_layers = _HEAD.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointError(f"{source}: not an AGCK checkpoint (magic {magic!r})")
    if version != VERSION:
        raise CheckpointError(f"{source}: unsupported checkpoint version {version}")
    if tag not in _TAG_KINDS:
        raise CheckpointError(f"{source}: unknown model kind tag {tag}")
    if n_layers < 1:
        raise CheckpointError(f"{source}: checkpoint holds no layers")

    offset = _HEAD.size
    if len(data) < offset + n_layers * _SHAPE.size:
        raise CheckpointError(f"{source}: truncated layer table")
    shapes = []
    for _ in range(n_layers):
        shapes.append(_SHAPE.unpack_from(data, offset))
        offset += _SHAPE.size

    expected = offset + 8 * sum(out * (inp + 1) for out, inp in shapes)
    if len(data) != expected:
        raise CheckpointError(
            f"{source}: expected {expected} bytes, found {len(data)}"
        )

    layers = []
    for out, inp in shapes:
        w = np.frombuffer(data, dtype="<f8", count=out * inp, offset=offset).reshape(out, inp)
        offset += 8 * out * inp
        b = np.frombuffer(data, dtype="<f8", count=out, offset=offset)
        offset += 8 * out
        layers.append((w.astype(np.float64), b.astype(np.float64)))

    try:
        return build_model(_TAG_KINDS[tag], layers)
    except ValueError as exc:
        raise CheckpointError(f"{source}: {exc}") from exc


def save_checkpoint(model: ModelFunction, path: Path) -> Path:
    """Write *model* to *path* atomically."""
    path = Path(path)
    atomic_write_bytes(path, encode_checkpoint(model))
    log.info("Saved %s checkpoint to %s", model.model_id, path)
    return path


def load_checkpoint(path: Path) -> ModelFunction:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    model = decode_checkpoint(path.read_bytes(), source=path.name)
    log.info("Loaded %s from %s", model.model_id, path)
    return model


def sidecar_path(path: Path) -> Path:
    """``model.agck`` -> ``model.agck.json``."""
    path = Path(path)
    return path.with_name(path.name + ".json")


def save_sidecar(path: Path, metadata: dict[str, Any]) -> Path:
    """Training metadata stored next to the checkpoint."""
    target = sidecar_path(path)
    atomic_write_text(target, json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    return target


def load_sidecar(path: Path) -> dict[str, Any]:
    target = sidecar_path(path)
    if not target.exists():
        return {}
    return json.loads(target.read_text())
