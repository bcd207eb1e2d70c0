"""Image-to-voltage encoding and one-hot label targets.

A grayscale image is a 2-D float array with intensities in [0, 1]
(height n rows, width m columns). Row i of the resulting voltage frame
is the pulse train driving diode i, so an n x m image maps onto n diodes
with m pulses each.
"""

from __future__ import annotations

import numpy as np

ENCODING_MODES = ("binary_bipolar", "linear_bipolar")


def _check_image(image) -> np.ndarray:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"image must be a non-empty 2-D array, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("image intensities must lie in [0, 1]")
    return img


def binarize(image, threshold: float = 0.5) -> np.ndarray:
    """Threshold an image to {0, 1}; values at the threshold map to 1."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    img = _check_image(image)
    return (img >= threshold).astype(np.float64)


def to_voltages(image, v_max: float, mode: str = "binary_bipolar") -> np.ndarray:
    """Map pixel intensities onto drive voltages in [-v_max, +v_max].

    binary_bipolar: requires a binary image; 0 -> -v_max, 1 -> +v_max.
    linear_bipolar: intensity p -> (2p - 1) * v_max, so 0.5 -> 0 V.
    """
    if not v_max > 0:
        raise ValueError(f"v_max must be positive, got {v_max}")
    if mode not in ENCODING_MODES:
        raise ValueError(f"unknown encoding mode {mode!r}; expected one of {ENCODING_MODES}")
    img = _check_image(image)
    if mode == "binary_bipolar" and not np.isin(img, (0.0, 1.0)).all():
        raise ValueError("binary_bipolar requires a binarized image (run binarize first)")
    return (2.0 * img - 1.0) * v_max


def one_hot(label: int, num_classes: int) -> np.ndarray:
    """Length-num_classes vector with a single 1 at position label."""
    label = int(label)
    if num_classes < 1:
        raise ValueError(f"num_classes must be >= 1, got {num_classes}")
    if not 0 <= label < num_classes:
        raise ValueError(f"label {label} out of range for {num_classes} classes")
    vec = np.zeros(num_classes, dtype=np.float64)
    vec[label] = 1.0
    return vec


def one_hot_matrix(labels, num_classes: int) -> np.ndarray:
    """Stack one_hot rows for a label sequence into a k x num_classes matrix."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise ValueError("labels must be a 1-D sequence")
    out = np.zeros((labels.size, num_classes), dtype=np.float64)
    for i, lab in enumerate(labels):
        out[i] = one_hot(int(lab), num_classes)
    return out
