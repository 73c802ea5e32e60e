"""Grayscale rendering of saliency maps to binary PGM (P5)."""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ..attribution.base import SaliencyMap
from ..config.experiment import RenderOptions
from ..core.errors import DataError, FormatError, RenderError
from .writers import atomic_write_bytes

log = logging.getLogger(__name__)


def reduce_channels(values: np.ndarray, width: int, height: int, how: str = "abs_sum") -> np.ndarray:
    """Collapse a channel-first ``(C, H, W)`` map to ``(H, W)`` magnitudes."""
    pixels = int(width) * int(height)
    if width < 1 or height < 1 or values.size % pixels != 0:
        raise RenderError(
            f"a {width}x{height} image cannot hold a map of {values.size} values"
        )
    channels = values.size // pixels
    if how != "abs_sum":
        raise RenderError(f"unknown channel reduction {how!r}")
    return np.abs(values.reshape(channels, int(height), int(width))).sum(axis=0)


def render_saliency(
    saliency: SaliencyMap,
    opts: Optional[RenderOptions] = None,
    width: Optional[int] = None,
    height: Optional[int] = None,
) -> np.ndarray:
    """Scale ``|v|`` into 0..255 relative to its ``percentile_clip`` percentile.

    ``v′ = min(|v|, P) / P``.  When the percentile is zero the maximum is
    used instead; a map whose magnitudes are all equal renders black.

    Returns
    -------
    np.ndarray:
        ``(height, width)`` uint8 image.  Without explicit dimensions the
        map renders as a single row.

    Raises
    ------
    RenderError:
        If ``width * height`` neither equals nor divides the map length.
    """
    opts = opts or RenderOptions()
    values = saliency.values
    if width is None and height is None:
        width, height = values.size, 1
    elif width is None or height is None:
        raise RenderError("width and height must be given together")
    mag = reduce_channels(values, width, height, opts.channel_reduce)

    if mag.size == 0 or np.all(mag == mag.flat[0]):
        return np.zeros(mag.shape, dtype=np.uint8)
    p = float(np.percentile(mag, opts.percentile_clip))
    if p <= 0.0:
        p = float(mag.max())
    scaled = np.minimum(mag, p) / p
    return np.floor(scaled * 255.0 + 0.5).astype(np.uint8)


def encode_pgm(image: np.ndarray, config: Optional[dict[str, Any]] = None) -> bytes:
    """P5 bytes, maxval 255, with the config as a header comment."""
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 2:
        raise RenderError("PGM images are two-dimensional")
    height, width = image.shape
    header = "P5\n"
    if config is not None:
        header += "# " + json.dumps(config, sort_keys=True, separators=(",", ":")) + "\n"
    header += f"{width} {height}\n255\n"
    return header.encode("utf-8") + image.tobytes()


def write_pgm(path: Path, image: np.ndarray, config: Optional[dict[str, Any]] = None) -> Path:
    path = atomic_write_bytes(Path(path), encode_pgm(image, config))
    log.info("Wrote %s", path)
    return path


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\d+)")


def read_pgm(path: Path) -> tuple[np.ndarray, dict[str, Any]]:
    """Read a P5 file written by :func:`write_pgm`: ``(image, config)``."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"image not found: {path}")
    data = path.read_bytes()
    if not data.startswith(b"P5"):
        raise FormatError(f"{path.name}: not a binary PGM", 0)

    config: dict[str, Any] = {}
    pos = 2
    numbers = []
    for _ in range(3):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise FormatError(f"{path.name}: malformed PGM header", pos)
        comment = re.search(rb"#\s?([^\n]*)\n", data[pos:m.start(1)])
        if comment and not config:
            try:
                config = json.loads(comment.group(1))
            except json.JSONDecodeError:
                config = {}
        numbers.append(int(m.group(1)))
        pos = m.end()
    width, height, maxval = numbers
    if maxval != 255:
        raise FormatError(f"{path.name}: only maxval 255 is supported", pos)
    pos += 1
    if len(data) - pos < width * height:
        raise FormatError(f"{path.name}: truncated pixel data", len(data))
    image = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return image.reshape(height, width).copy(), config
