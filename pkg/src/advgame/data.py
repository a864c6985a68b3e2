"""Desk-scale datasets: seeded Gaussian blobs and the big-endian IDX format.

Inputs live in [0, 1]^d and are flattened to vectors on load; image
row/column counts are kept as metadata only.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DatasetError, IdxFormatError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class Dataset:
    inputs: np.ndarray  # [n, d] float64 in [0, 1]
    labels: np.ndarray  # [n] int64, each < num_classes
    num_classes: int
    name: str = "dataset"
    image_shape: tuple[int, int] | None = None  # (rows, cols) when loaded from IDX

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.inputs.ndim != 2 or len(self.inputs) == 0:
            raise DatasetError("inputs must be a nonempty [n, d] array")
        if self.labels.shape != (len(self.inputs),):
            raise DatasetError(
                f"{len(self.inputs)} inputs but {len(self.labels)} labels"
            )
        if np.any(self.inputs < 0.0) or np.any(self.inputs > 1.0):
            raise DatasetError("input values must lie in [0, 1]")
        if np.any(self.labels < 0) or np.any(self.labels >= self.num_classes):
            raise DatasetError(f"labels must lie in [0, {self.num_classes})")

    def __len__(self) -> int:
        return len(self.inputs)

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]


def generate_blobs(
    num_classes: int,
    dim: int,
    samples_per_class: int,
    center_spread: float = 0.3,
    noise_std: float = 0.05,
    seed: int = 0,
) -> Dataset:
    """Isotropic Gaussian blobs, one per class, clamped to the unit box.

    Class centers are drawn uniformly from [0.5 - center_spread,
    0.5 + center_spread]^dim intersected with [0.2, 0.8]^dim, so that small
    perturbation balls around samples rarely clip at the box.
    """
    if min(num_classes, dim, samples_per_class) < 1 or center_spread <= 0 or noise_std < 0:
        raise ValueError("blob parameters must be positive (noise_std may be 0)")
    rng = np.random.default_rng(seed)
    lo = max(0.2, 0.5 - center_spread)
    hi = min(0.8, 0.5 + center_spread)
    centers = rng.uniform(lo, hi, size=(num_classes, dim))
    inputs = np.empty((num_classes * samples_per_class, dim))
    labels = np.empty(num_classes * samples_per_class, dtype=np.int64)
    for c in range(num_classes):
        block = slice(c * samples_per_class, (c + 1) * samples_per_class)
        inputs[block] = centers[c] + rng.normal(0.0, noise_std, size=(samples_per_class, dim))
        labels[block] = c
    np.clip(inputs, 0.0, 1.0, out=inputs)
    name = f"blobs-k{num_classes}-d{dim}-s{seed}"
    return Dataset(inputs, labels, num_classes, name)


def _read_exact(f, count: int, offset: int, what: str) -> bytes:
    data = f.read(count)
    if len(data) != count:
        raise IdxFormatError(f"truncated while reading {what}", offset + len(data))
    return data


def _read_u32(f, offset: int, what: str) -> int:
    return struct.unpack(">I", _read_exact(f, 4, offset, what))[0]


def load_idx_pair(images_path, labels_path) -> Dataset:
    """Load a big-endian IDX image/label file pair, pixels normalized to [0, 1].

    Images use magic 0x00000803 (count, rows, cols; unsigned bytes), labels
    magic 0x00000801. Image and label counts must match.
    """
    with open(images_path, "rb") as f:
        magic = _read_u32(f, 0, "image magic")
        if magic != IDX_IMAGES_MAGIC:
            raise IdxFormatError(
                f"bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}", 0
            )
        count = _read_u32(f, 4, "image count")
        rows = _read_u32(f, 8, "image rows")
        cols = _read_u32(f, 12, "image cols")
        payload = _read_exact(f, count * rows * cols, 16, "image pixels")
    pixels = np.frombuffer(payload, dtype=np.uint8).astype(np.float64) / 255.0
    inputs = pixels.reshape(count, rows * cols)

    with open(labels_path, "rb") as f:
        magic = _read_u32(f, 0, "label magic")
        if magic != IDX_LABELS_MAGIC:
            raise IdxFormatError(
                f"bad label magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}", 0
            )
        label_count = _read_u32(f, 4, "label count")
        raw = _read_exact(f, label_count, 8, "label bytes")
    labels = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)

    if label_count != count:
        raise DatasetError(f"{count} images but {label_count} labels")
    num_classes = int(labels.max()) + 1 if len(labels) else 0
    return Dataset(inputs, labels, num_classes, name="idx", image_shape=(rows, cols))


def write_idx_pair(dataset: Dataset, images_path, labels_path) -> None:
    """Write a dataset back out as an IDX pair (test-fixture helper).

    Pixel values are quantized to round(v * 255); datasets that came from
    IDX files round-trip exactly.
    """
    if dataset.image_shape is not None:
        rows, cols = dataset.image_shape
    else:
        rows, cols = 1, dataset.input_dim
    if rows * cols != dataset.input_dim:
        raise DatasetError("image_shape does not match the flattened input dim")
    pixels = np.rint(dataset.inputs * 255.0).astype(np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, len(dataset), rows, cols))
        f.write(pixels.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, len(dataset)))
        f.write(dataset.labels.astype(np.uint8).tobytes())


def split(dataset: Dataset, train_fraction: float, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded shuffle, then split into (train, test). Disjoint and exhaustive."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n = len(dataset)
    n_train = int(n * train_fraction)
    if n_train == 0 or n_train == n:
        raise ValueError(f"fraction {train_fraction} leaves an empty side for n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    train_idx, test_idx = perm[:n_train], perm[n_train:]
    make = lambda idx, tag: Dataset(
        dataset.inputs[idx],
        dataset.labels[idx],
        dataset.num_classes,
        name=f"{dataset.name}/{tag}",
        image_shape=dataset.image_shape,
    )
    return make(train_idx, "train"), make(test_idx, "test")
