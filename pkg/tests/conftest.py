"""Shared fixtures: small models, synthetic datasets and IDX files."""

import gzip
import os
import struct
from pathlib import Path

import numpy as np
import pytest

from gradlab.core.dataset import IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC, Dataset, load_idx
from gradlab.core.domain import DataRange
from gradlab.core.model import MLP, LinearModel, QuadraticModel, Sinusoid1D
from gradlab.core.train import TrainConfig, train_mlp
from gradlab.numerics.sampling import RngState

MNIST_DIR_ENV = "GRADLAB_MNIST_DIR"


def write_idx(
    directory: Path,
    images: np.ndarray,
    labels: np.ndarray,
    prefix: str = "data",
    gz: bool = False,
) -> tuple[Path, Path]:
    """Write uint8 ``(n, rows, cols)`` images and labels as an IDX pair."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    img_bytes = struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols) + images.tobytes()
    lbl_bytes = struct.pack(">II", IDX_LABELS_MAGIC, n) + labels.tobytes()
    suffix = ".gz" if gz else ""
    img_path = directory / f"{prefix}-images.idx{suffix}"
    lbl_path = directory / f"{prefix}-labels.idx{suffix}"
    opener = gzip.compress if gz else (lambda b: b)
    img_path.write_bytes(opener(img_bytes))
    lbl_path.write_bytes(opener(lbl_bytes))
    return img_path, lbl_path


def blob_pixels(n: int = 40, side: int = 4, seed: int = 7) -> tuple[np.ndarray, np.ndarray]:
    """Two separable classes: bright left half (0) or bright right half (1)."""
    gen = RngState(seed).generator()
    labels = np.arange(n) % 2
    images = gen.integers(0, 60, size=(n, side, side))
    half = side // 2
    for i, y in enumerate(labels):
        if y == 0:
            images[i, :, :half] += 180
        else:
            images[i, :, half:] += 180
    return images.astype(np.uint8), labels.astype(np.uint8)


@pytest.fixture
def unit_range() -> DataRange:
    return DataRange(0.0, 1.0)


@pytest.fixture
def imagenet_range() -> DataRange:
    return DataRange(-2.12, 2.64)


@pytest.fixture
def linear_model() -> LinearModel:
    """Two classes over three inputs."""
    return LinearModel.from_weights([[1.0, -2.0, 0.5], [0.0, 3.0, -1.0]], [0.1, -0.2])


@pytest.fixture
def quadratic_model() -> QuadraticModel:
    return QuadraticModel.half_norm(4)


@pytest.fixture
def sinusoid() -> Sinusoid1D:
    return Sinusoid1D.from_frequency(3.0)


@pytest.fixture
def small_mlp() -> MLP:
    """4 → 6 → 3 ReLU network with fixed random weights."""
    return MLP.initialize([4, 6, 3], RngState(11).generator())


@pytest.fixture
def blob_dataset() -> Dataset:
    images, labels = blob_pixels()
    return Dataset(
        images.reshape(len(images), -1) / 255.0,
        labels,
        n_classes=2,
        image_shape=(4, 4),
    )


@pytest.fixture
def blob_idx(tmp_path) -> tuple[Path, Path]:
    images, labels = blob_pixels()
    return write_idx(tmp_path, images, labels)


@pytest.fixture
def single_thread(monkeypatch):
    monkeypatch.setenv("GRADLAB_THREADS", "1")


def mnist_files() -> tuple[Path, Path, Path, Path]:
    root = Path(os.environ.get(MNIST_DIR_ENV, ""))
    return (
        root / "train-images-idx3-ubyte.gz",
        root / "train-labels-idx1-ubyte.gz",
        root / "t10k-images-idx3-ubyte.gz",
        root / "t10k-labels-idx1-ubyte.gz",
    )


requires_mnist = pytest.mark.skipif(
    not os.environ.get(MNIST_DIR_ENV) or not all(p.exists() for p in mnist_files()),
    reason=f"set {MNIST_DIR_ENV} to a directory holding the MNIST IDX files",
)


@pytest.fixture(scope="session")
def mnist_test_set() -> Dataset:
    _, _, test_img, test_lbl = mnist_files()
    return load_idx(test_img, test_lbl)


@pytest.fixture(scope="session")
def mnist_mlp() -> MLP:
    """784 → 200 → 10 network trained with the default SGD setup."""
    train_img, train_lbl, _, _ = mnist_files()
    model, _ = train_mlp(load_idx(train_img, train_lbl), TrainConfig())
    return model
