"""Benchmark dataset loading: IDX digit files and class-per-folder images.

Loaded images are float arrays in [0, 1] with a uniform shape across the
dataset. Splitting is a seeded permutation with the first ceil(k * f)
samples going to the training side.
"""

from __future__ import annotations

import gzip
import hashlib
import os
import struct
from dataclasses import dataclass

import numpy as np

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801

# Canonical MNIST training/evaluation files with their widely mirrored
# md5 pins. Override via a key-value sources file if a mirror differs.
DEFAULT_MNIST_SOURCES = {
    "train-images-idx3-ubyte.gz": (
        "https://ossci-datasets.s3.amazonaws.com/mnist/train-images-idx3-ubyte.gz",
        "md5:f68b3c2dcbeaaa9fbdd348bbdeb94873",
    ),
    "train-labels-idx1-ubyte.gz": (
        "https://ossci-datasets.s3.amazonaws.com/mnist/train-labels-idx1-ubyte.gz",
        "md5:d53e105ee54ea40749a09fcbcd1e9432",
    ),
    "t10k-images-idx3-ubyte.gz": (
        "https://ossci-datasets.s3.amazonaws.com/mnist/t10k-images-idx3-ubyte.gz",
        "md5:9fb629c4189551a2d022fa330f9573f3",
    ),
    "t10k-labels-idx1-ubyte.gz": (
        "https://ossci-datasets.s3.amazonaws.com/mnist/t10k-labels-idx1-ubyte.gz",
        "md5:ec29112dd5afa0611ce80d1b7f02629c",
    ),
}


class IdxFormatError(ValueError):
    """Base error for malformed IDX files."""


class IdxMagicError(IdxFormatError):
    """Magic number does not match the expected IDX record type."""


class IdxTruncatedError(IdxFormatError):
    """File ends before the declared payload."""


class IdxCountMismatchError(IdxFormatError):
    """Image and label files declare different sample counts."""


@dataclass
class LabeledDataset:
    """Images (k, h, w) in [0, 1], integer labels (k,), and class names."""

    images: np.ndarray
    labels: np.ndarray
    class_names: list[str]

    def __post_init__(self) -> None:
        self.images = np.asarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.images.ndim != 3:
            raise ValueError(f"images must be (k, h, w), got shape {self.images.shape}")
        if self.labels.shape != (self.images.shape[0],):
            raise ValueError("labels must be 1-D with one entry per image")
        if len(self.labels) and self.labels.max() >= len(self.class_names):
            raise ValueError("label index exceeds class count")
        if len(self.labels) and self.labels.min() < 0:
            raise ValueError("labels must be non-negative")

    def __len__(self) -> int:
        return self.images.shape[0]

    def subset(self, indices) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.images[idx], self.labels[idx], list(self.class_names))


@dataclass(frozen=True)
class SplitSpec:
    """Train fraction strictly inside (0, 1) and the shuffle seed."""

    train_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


def _read_bytes(path) -> bytes:
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as f:
        return f.read()


def _idx_header(raw: bytes, expected_magic: int, n_dims: int, path) -> tuple:
    header_len = 4 * (1 + n_dims)
    if len(raw) < header_len:
        raise IdxTruncatedError(f"{path}: file shorter than its {header_len}-byte header")
    fields = struct.unpack(f">{1 + n_dims}i", raw[:header_len])
    if fields[0] != expected_magic:
        raise IdxMagicError(
            f"{path}: magic 0x{fields[0]:08x} does not match expected 0x{expected_magic:08x}"
        )
    return fields[1:]


def load_mnist_idx(images_path, labels_path) -> LabeledDataset:
    """Load an IDX image/label file pair (big-endian, .gz accepted).

    Pixel bytes are scaled to [0, 1] as value/255. Bad magic numbers,
    truncated payloads, and image/label count disagreements raise
    distinct IdxFormatError subclasses.
    """
    img_raw = _read_bytes(images_path)
    count, rows, cols = _idx_header(img_raw, IDX_IMAGE_MAGIC, 3, images_path)
    expected = 16 + count * rows * cols
    if len(img_raw) < expected:
        raise IdxTruncatedError(
            f"{images_path}: expected {expected} bytes for {count} images, got {len(img_raw)}"
        )
    pixels = np.frombuffer(img_raw, dtype=np.uint8, count=count * rows * cols, offset=16)

    lab_raw = _read_bytes(labels_path)
    (lab_count,) = _idx_header(lab_raw, IDX_LABEL_MAGIC, 1, labels_path)
    if lab_count != count:
        raise IdxCountMismatchError(
            f"{labels_path}: {lab_count} labels for {count} images in {images_path}"
        )
    if len(lab_raw) < 8 + lab_count:
        raise IdxTruncatedError(
            f"{labels_path}: expected {8 + lab_count} bytes for {lab_count} labels, got {len(lab_raw)}"
        )
    labels = np.frombuffer(lab_raw, dtype=np.uint8, count=lab_count, offset=8)

    images = pixels.reshape(count, rows, cols).astype(np.float64) / 255.0
    num_classes = int(labels.max()) + 1 if lab_count else 0
    return LabeledDataset(images, labels.astype(np.int64),
                          [str(i) for i in range(num_classes)])


def load_image_folder(root_dir, target_size: tuple[int, int] = (28, 28),
                      skip_bad: bool = False) -> LabeledDataset:
    """Load a class-per-subdirectory image tree as grayscale images.

    Class indices follow the lexicographic order of the subdirectory
    names. Images are converted with the Rec. 601 luma weights, resized
    bilinearly to target_size, and scaled to [0, 1]. An undecodable file
    raises (with its path) unless skip_bad is set; an empty class folder
    always raises.
    """
    from PIL import Image, UnidentifiedImageError

    root = str(root_dir)
    if not os.path.isdir(root):
        raise FileNotFoundError(f"dataset root {root} is not a directory")
    class_names = sorted(
        d for d in os.listdir(root) if os.path.isdir(os.path.join(root, d))
    )
    if not class_names:
        raise ValueError(f"dataset root {root} contains no class subdirectories")
    height, width = int(target_size[0]), int(target_size[1])
    images, labels = [], []
    for index, name in enumerate(class_names):
        folder = os.path.join(root, name)
        files = sorted(
            f for f in os.listdir(folder)
            if f.lower().endswith((".png", ".jpg", ".jpeg"))
        )
        if not files:
            raise ValueError(f"class folder {folder} contains no decodable images")
        for fname in files:
            path = os.path.join(folder, fname)
            try:
                with Image.open(path) as img:
                    # Pillow's "L" mode applies the Rec. 601 luma weights.
                    gray = img.convert("L").resize((width, height), Image.BILINEAR)
            except (UnidentifiedImageError, OSError) as exc:
                if skip_bad:
                    continue
                raise ValueError(f"could not decode image {path}: {exc}") from exc
            images.append(np.asarray(gray, dtype=np.float64) / 255.0)
            labels.append(index)
    return LabeledDataset(np.stack(images), np.asarray(labels), class_names)


def shuffle_split(dataset: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Deterministic shuffled partition into (train, test)."""
    k = len(dataset)
    if k == 0:
        raise ValueError("cannot split an empty dataset")
    perm = np.random.default_rng(spec.seed).permutation(k)
    n_train = int(np.ceil(k * spec.train_fraction))
    return dataset.subset(perm[:n_train]), dataset.subset(perm[n_train:])


def _checksum(path, spec: str) -> bool:
    algo, _, digest = spec.partition(":")
    if not digest:
        algo, digest = "sha256", spec
    h = hashlib.new(algo)
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest() == digest.lower()


def fetch(sources: dict[str, tuple[str, str]], dest_dir, skip_checksum: bool = False) -> list[str]:
    """Download name -> (url, checksum) entries into dest_dir.

    Checksums are "algo:hexdigest" (sha256 assumed when the prefix is
    omitted). Existing files that already verify are kept. Returns the
    list of file paths.
    """
    import requests

    os.makedirs(dest_dir, exist_ok=True)
    paths = []
    for name, (url, checksum) in sources.items():
        path = os.path.join(dest_dir, name)
        if os.path.exists(path) and (skip_checksum or _checksum(path, checksum)):
            paths.append(path)
            continue
        resp = requests.get(url, stream=True, timeout=60)
        resp.raise_for_status()
        tmp = path + ".part"
        with open(tmp, "wb") as f:
            for chunk in resp.iter_content(1 << 20):
                f.write(chunk)
        if not skip_checksum and not _checksum(tmp, checksum):
            os.remove(tmp)
            raise ValueError(f"checksum mismatch for {url} (expected {checksum})")
        os.replace(tmp, path)
        paths.append(path)
    return paths
