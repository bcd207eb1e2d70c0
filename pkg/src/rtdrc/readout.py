"""Linear readout: closed-form ridge regression and an iterative trainer.

The reference fit solves the normal equations

    (x^T x + lambda*I) w = x^T y

through a symmetric positive-definite factorization (never an explicit
inverse). The iterative trainer runs seeded mini-batch gradient descent
on the same mean-squared-error objective and records per-epoch training
accuracy and loss, which is what the accuracy/loss-vs-epoch curves and
the drive-amplitude sweep are built from.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

# Relative residual bound every ridge fit must satisfy.
RIDGE_RESIDUAL_BOUND = 1e-8

DEFAULT_RIDGE_LAMBDA = 1e-3
DEFAULT_EPOCHS = 30
DEFAULT_LEARNING_RATE = 0.25
DEFAULT_BATCH_SIZE = 32


class SingularSystemError(ValueError):
    """Normal equations not solvable to tolerance (singular or near-singular)."""


class TrainingDivergedError(RuntimeError):
    """Iterative training produced a non-finite loss."""


@dataclass
class ReadoutModel:
    """Trained output weights (j x s) with the lambda used to fit them."""

    weights: np.ndarray
    lam: float
    class_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 2:
            raise ValueError("weights must be a 2-D matrix")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if not self.class_names:
            self.class_names = [str(i) for i in range(self.weights.shape[1])]
        if len(self.class_names) != self.weights.shape[1]:
            raise ValueError("class_names length must match the class count")


@dataclass
class TrainHistory:
    """Per-epoch training metrics; epoch indices start at 1."""

    epoch: np.ndarray
    accuracy: np.ndarray
    loss: np.ndarray

    def __post_init__(self) -> None:
        self.epoch = np.asarray(self.epoch, dtype=np.int64)
        self.accuracy = np.asarray(self.accuracy, dtype=np.float64)
        self.loss = np.asarray(self.loss, dtype=np.float64)
        if not (len(self.epoch) == len(self.accuracy) == len(self.loss)):
            raise ValueError("history arrays must have equal length")
        if len(self.epoch) and not np.array_equal(self.epoch, np.arange(1, len(self.epoch) + 1)):
            raise ValueError("epoch indices must run 1..n")


def _check_xy(states, targets):
    x = np.asarray(states, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"state matrix must be 2-D with k >= 1, got shape {x.shape}")
    if y.ndim != 2 or y.shape[0] != x.shape[0]:
        raise ValueError(f"target matrix shape {y.shape} does not match {x.shape[0]} samples")
    return x, y


def fit_ridge(states, targets, lam: float = DEFAULT_RIDGE_LAMBDA,
              class_names: list[str] | None = None) -> ReadoutModel:
    """Closed-form ridge fit of the readout weights.

    Solves (x^T x + lam*I) w = x^T y by Cholesky factorization and checks
    the relative normal-equation residual against 1e-8. A singular or
    near-singular system (possible at lam = 0) raises SingularSystemError
    carrying a condition-number estimate.
    """
    x, y = _check_xy(states, targets)
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    j = x.shape[1]
    gram = x.T @ x
    gram[np.diag_indices(j)] += lam
    rhs = x.T @ y
    try:
        cho = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
        weights = scipy.linalg.cho_solve(cho, rhs, check_finite=False)
    except np.linalg.LinAlgError as exc:
        cond = float(np.linalg.cond(gram))
        raise SingularSystemError(
            f"normal equations singular at lambda={lam:g} "
            f"(condition estimate {cond:.3e}); increase lambda"
        ) from exc
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm > 0:
        residual = np.linalg.norm(gram @ weights - rhs) / rhs_norm
        if not residual < RIDGE_RESIDUAL_BOUND:
            cond = float(np.linalg.cond(gram))
            raise SingularSystemError(
                f"normal-equation residual {residual:.3e} exceeds {RIDGE_RESIDUAL_BOUND:g} "
                f"at lambda={lam:g} (condition estimate {cond:.3e})"
            )
    return ReadoutModel(weights=weights, lam=float(lam), class_names=class_names or [])


def predict(model: ReadoutModel, states) -> np.ndarray:
    """Score matrix x @ w for a state matrix (k x j -> k x s)."""
    x = np.asarray(states, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("state matrix must be 2-D")
    if x.shape[1] != model.weights.shape[0]:
        raise ValueError(
            f"state dimension {x.shape[1]} does not match model dimension {model.weights.shape[0]}"
        )
    return x @ model.weights


def classify(scores) -> np.ndarray:
    """Argmax class index per row; ties break toward the lowest index."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 2 or s.shape[1] < 1:
        raise ValueError("scores must be a k x s matrix with s >= 1")
    return np.argmax(s, axis=1)


def training_loss(states, targets, weights, lam: float = 0.0) -> float:
    """Element-mean MSE plus lam * ||w||_F^2; the iterative objective."""
    x, y = _check_xy(states, targets)
    w = np.asarray(weights, dtype=np.float64)
    resid = x @ w - y
    return float(np.mean(resid ** 2) + lam * np.sum(w ** 2))


def training_gradient(states, targets, weights, lam: float = 0.0) -> np.ndarray:
    """Analytic gradient of training_loss with respect to the weights."""
    x, y = _check_xy(states, targets)
    w = np.asarray(weights, dtype=np.float64)
    return (2.0 / y.size) * (x.T @ (x @ w - y)) + 2.0 * lam * w


def fit_iterative(states, targets, epochs: int = DEFAULT_EPOCHS,
                  learning_rate: float = DEFAULT_LEARNING_RATE, lam: float = 0.0,
                  batch_size: int = DEFAULT_BATCH_SIZE, seed: int = 0,
                  class_names: list[str] | None = None) -> tuple[ReadoutModel, TrainHistory]:
    """Mini-batch gradient descent on the MSE objective from zero weights.

    Each batch update uses the batch-mean gradient, so batch_size >= k
    reproduces exact full-batch descent. The shuffle order is fixed by
    the seed, making results reproducible. Raises TrainingDivergedError
    naming the epoch if the loss stops being finite.
    """
    x, y = _check_xy(states, targets)
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    if not learning_rate > 0:
        raise ValueError(f"learning_rate must be positive, got {learning_rate}")
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    k, j = x.shape
    s = y.shape[1]
    w = np.zeros((j, s), dtype=np.float64)
    rng = np.random.default_rng(seed)
    labels = np.argmax(y, axis=1)
    acc_hist = np.empty(epochs)
    loss_hist = np.empty(epochs)
    for ep in range(1, epochs + 1):
        order = rng.permutation(k)
        for lo in range(0, k, batch_size):
            idx = order[lo:lo + batch_size]
            xb = x[idx]
            grad = (2.0 / (xb.shape[0] * s)) * (xb.T @ (xb @ w - y[idx])) + 2.0 * lam * w
            w -= learning_rate * grad
        scores = x @ w
        loss = np.mean((scores - y) ** 2) + lam * np.sum(w ** 2)
        if not np.isfinite(loss):
            raise TrainingDivergedError(
                f"training loss became non-finite at epoch {ep}; reduce learning_rate"
            )
        loss_hist[ep - 1] = loss
        acc_hist[ep - 1] = np.mean(np.argmax(scores, axis=1) == labels)
    model = ReadoutModel(weights=w, lam=float(lam), class_names=class_names or [])
    history = TrainHistory(epoch=np.arange(1, epochs + 1), accuracy=acc_hist, loss=loss_hist)
    return model, history


def confusion_matrix(true_labels, predicted_labels, num_classes: int) -> np.ndarray:
    """s x s count matrix, rows = true class, columns = predicted class."""
    t = np.asarray(true_labels, dtype=np.int64)
    p = np.asarray(predicted_labels, dtype=np.int64)
    if t.shape != p.shape or t.ndim != 1:
        raise ValueError("label arrays must be 1-D and of equal length")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (t, p), 1)
    return cm


def evaluate(model: ReadoutModel, states, labels) -> tuple[float, float, np.ndarray]:
    """Accuracy, element-mean MSE against one-hot targets, confusion matrix."""
    x = np.asarray(states, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("evaluation set must be non-empty")
    if labels.shape != (x.shape[0],):
        raise ValueError("labels must be 1-D with one entry per sample")
    scores = predict(model, x)
    s = scores.shape[1]
    predicted = classify(scores)
    accuracy = float(np.mean(predicted == labels))
    onehot = np.zeros_like(scores)
    onehot[np.arange(labels.size), labels] = 1.0
    mse = float(np.mean((scores - onehot) ** 2))
    return accuracy, mse, confusion_matrix(labels, predicted, s)


def save_model(model: ReadoutModel, stem) -> None:
    """Write weights to <stem>.npy and a JSON sidecar to <stem>.json."""
    stem = str(stem)
    np.save(stem + ".npy", model.weights)
    sidecar = {
        "dims": list(model.weights.shape),
        "lambda": model.lam,
        "class_names": model.class_names,
    }
    with open(stem + ".json", "w") as f:
        json.dump(sidecar, f, indent=1)
        f.write("\n")


def load_model(stem) -> ReadoutModel:
    """Read back a model written by save_model."""
    stem = str(stem)
    weights = np.load(stem + ".npy")
    with open(stem + ".json") as f:
        sidecar = json.load(f)
    if list(weights.shape) != sidecar["dims"]:
        raise ValueError(f"weight file shape {weights.shape} disagrees with sidecar {sidecar['dims']}")
    return ReadoutModel(weights=weights, lam=float(sidecar["lambda"]),
                        class_names=list(sidecar["class_names"]))


def history_to_csv(history: TrainHistory, path) -> None:
    """Write history rows as CSV (epoch, accuracy, loss)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "accuracy", "loss"])
        for e, a, l in zip(history.epoch, history.accuracy, history.loss):
            writer.writerow([int(e), repr(float(a)), repr(float(l))])


def history_from_csv(path) -> TrainHistory:
    """Read back a history written by history_to_csv."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != ["epoch", "accuracy", "loss"]:
            raise ValueError(f"unexpected history header in {path}")
        rows = [(int(e), float(a), float(l)) for e, a, l in reader]
    if rows:
        e, a, l = zip(*rows)
    else:
        e, a, l = (), (), ()
    return TrainHistory(epoch=np.array(e, dtype=np.int64),
                        accuracy=np.array(a), loss=np.array(l))


def confusion_to_csv(cm, class_names, path) -> None:
    """Write a confusion matrix as CSV with class-name headers."""
    cm = np.asarray(cm, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] != len(class_names):
        raise ValueError("confusion matrix must be square and match class_names")
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["true_class"] + list(class_names))
        for name, row in zip(class_names, cm):
            writer.writerow([name] + [int(v) for v in row])


def confusion_from_csv(path) -> tuple[np.ndarray, list[str]]:
    """Read back (matrix, class_names) written by confusion_to_csv."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if not header or header[0] != "true_class":
            raise ValueError(f"unexpected confusion header in {path}")
        names = header[1:]
        rows = []
        for row in reader:
            if row[0] != names[len(rows)]:
                raise ValueError(f"row order mismatch in {path}")
            rows.append([int(v) for v in row[1:]])
    return np.asarray(rows, dtype=np.int64), names
