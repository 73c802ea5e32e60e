"""Artifact writers: CSV, JSON and saliency tables.

Every artifact is written atomically (temporary file in the target
directory, then ``os.replace``) and carries the experiment config.
Floats are printed with 17 significant digits so values round-trip
exactly.  Nothing time- or host-dependent goes into an artifact.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from ..core.errors import DataError, FormatError

log = logging.getLogger(__name__)


def fmt_float(value: float) -> str:
    """Format a float with 17 significant digits."""
    return f"{float(value):.17g}"


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    return str(value)


def atomic_write_bytes(path: Path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    log.debug("wrote %d bytes to %s", len(data), path)
    return path


def atomic_write_text(path: Path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def config_comment(config: dict[str, Any]) -> str:
    return "# " + json.dumps(config, sort_keys=True, separators=(",", ":"))


def render_csv(
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    config: dict[str, Any] | None = None,
) -> str:
    """CSV text with an optional leading ``# {config}`` line."""
    buf = io.StringIO()
    if config is not None:
        buf.write(config_comment(config) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    config: dict[str, Any] | None = None,
) -> Path:
    path = atomic_write_text(path, render_csv(header, rows, config))
    log.info("Wrote %s", path)
    return path


def write_json(path: Path, document: dict[str, Any]) -> Path:
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    path = atomic_write_text(path, text)
    log.info("Wrote %s", path)
    return path


# ----------------------------------------------------------------------
# Saliency maps
# ----------------------------------------------------------------------

SALIENCY_HEADER = ("index", "value")


def write_saliency_csv(path: Path, values: np.ndarray, config: dict[str, Any]) -> Path:
    """One ``index,value`` row per input dimension."""
    rows = ((i, float(v)) for i, v in enumerate(np.asarray(values).reshape(-1)))
    return write_csv(path, SALIENCY_HEADER, rows, config)


def read_saliency_csv(path: Path) -> tuple[np.ndarray, dict[str, Any]]:
    """Inverse of :func:`write_saliency_csv`: ``(values, config)``."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"saliency file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    config: dict[str, Any] = {}
    if lines and lines[0].startswith("# "):
        try:
            config = json.loads(lines[0][2:])
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path.name}: bad config line ({exc.msg})", exc.pos + 2) from exc
        lines = lines[1:]
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or tuple(header) != SALIENCY_HEADER:
        raise FormatError(f"{path.name}: expected header {','.join(SALIENCY_HEADER)}", 0)
    values = []
    for expected, row in enumerate(reader):
        try:
            index, value = int(row[0]), float(row[1])
        except (IndexError, ValueError):
            index, value = -1, 0.0
        if len(row) != 2 or index != expected:
            raise FormatError(f"{path.name}: malformed row {expected}", 0)
        values.append(value)
    if not values:
        raise DataError(f"{path.name}: saliency file holds no values")
    return np.array(values, dtype=np.float64), config
