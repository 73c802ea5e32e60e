"""Labelled image datasets and IDX (MNIST) ingestion."""

from __future__ import annotations

import gzip
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .domain import DataRange
from .errors import ConfigError, DataError, FormatError

log = logging.getLogger(__name__)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

UNIT_RANGE = DataRange(0.0, 1.0)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Images flattened to rows of ``images`` with integer ``labels``.

    Parameters
    ----------
    images:
        ``(n, D)`` float64 array, every value inside ``range``.
    labels:
        ``(n,)`` class indices below ``n_classes``.
    range:
        Valid pixel domain.
    image_shape:
        ``(rows, cols)`` for rendering; defaults to ``(1, D)``.
    """

    images: np.ndarray
    labels: np.ndarray
    range: DataRange = UNIT_RANGE
    n_classes: int = 10
    image_shape: Optional[tuple[int, int]] = field(default=None)

    def __post_init__(self) -> None:
        images = np.array(self.images, dtype=np.float64, ndmin=2)
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if images.ndim > 2:
            images = images.reshape(images.shape[0], int(np.prod(images.shape[1:])))
        if images.shape[0] != labels.shape[0]:
            raise DataError(
                f"{images.shape[0]} images but {labels.shape[0]} labels"
            )
        if images.size and not self.range.contains(images):
            raise DataError(
                f"pixel values outside [{self.range.x_min}, {self.range.x_max}]"
            )
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise DataError(f"labels must lie in [0, {self.n_classes})")
        shape = self.image_shape or (1, images.shape[1])
        if shape[0] * shape[1] != images.shape[1]:
            raise ConfigError(f"image shape {shape} does not hold {images.shape[1]} values")
        images.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "image_shape", (int(shape[0]), int(shape[1])))

    def __len__(self) -> int:
        return int(self.images.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.images.shape[1])

    def head(self, n: int) -> "Dataset":
        """First *n* samples (all of them if fewer)."""
        return Dataset(
            self.images[:n], self.labels[:n], self.range, self.n_classes, self.image_shape
        )

    def shifted(self, shift: float) -> "Dataset":
        """Every pixel and both range bounds translated by *shift*."""
        return Dataset(
            self.images + shift,
            self.labels,
            self.range.shifted(shift),
            self.n_classes,
            self.image_shape,
        )


# ----------------------------------------------------------------------
# IDX parsing
# ----------------------------------------------------------------------


def _read_bytes(path: Path) -> bytes:
    path = Path(path)
    if not path.exists():
        raise DataError(f"IDX file not found: {path}")
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as fh:
            return fh.read()
    return path.read_bytes()


def _header(data: bytes, fmt: str, magic: int, path: Path) -> tuple[int, ...]:
    size = struct.calcsize(fmt)
    if len(data) < size:
        raise FormatError(f"{path.name}: truncated header", len(data))
    fields = struct.unpack_from(fmt, data, 0)
    if fields[0] != magic:
        raise FormatError(
            f"{path.name}: bad magic 0x{fields[0]:08x}, expected 0x{magic:08x}", 0
        )
    return fields


def load_idx(
    images_path: Path,
    labels_path: Path,
    n_classes: int = 10,
) -> Dataset:
    """Load an IDX image/label pair (optionally gzipped).

    Raw bytes are scaled by 1/255 into ``[0, 1]``.

    Raises
    ------
    FormatError:
        Bad magic number, truncated payload, count mismatch or a label
        byte ``>= n_classes``; the byte offset is attached.
    """
    images_path, labels_path = Path(images_path), Path(labels_path)
    log.info("Loading IDX images %s", images_path)
    raw = _read_bytes(images_path)
    _, count, rows, cols = _header(raw, ">IIII", IDX_IMAGES_MAGIC, images_path)
    expected = 16 + count * rows * cols
    if len(raw) < expected:
        raise FormatError(
            f"{images_path.name}: truncated pixel data, expected {expected} bytes",
            len(raw),
        )
    pixels = np.frombuffer(raw, dtype=np.uint8, count=count * rows * cols, offset=16)

    raw_labels = _read_bytes(labels_path)
    _, n_labels = _header(raw_labels, ">II", IDX_LABELS_MAGIC, labels_path)
    if n_labels != count:
        raise FormatError(
            f"{labels_path.name}: {n_labels} labels for {count} images", 4
        )
    if len(raw_labels) < 8 + n_labels:
        raise FormatError(f"{labels_path.name}: truncated label data", len(raw_labels))
    labels = np.frombuffer(raw_labels, dtype=np.uint8, count=n_labels, offset=8)
    bad = np.flatnonzero(labels >= n_classes)
    if bad.size:
        raise FormatError(
            f"{labels_path.name}: label {labels[bad[0]]} exceeds {n_classes - 1}",
            8 + int(bad[0]),
        )

    images = pixels.reshape(count, rows * cols).astype(np.float64) / 255.0
    log.info("Loaded %d images of %dx%d", count, rows, cols)
    return Dataset(
        images=images,
        labels=labels.astype(np.int64),
        range=UNIT_RANGE,
        n_classes=n_classes,
        image_shape=(rows, cols),
    )
