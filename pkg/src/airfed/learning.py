"""Local models, losses, gradients, and datasets.

Models are flat float64 vectors. Two deployable kinds exist: multinomial
logistic regression and a one-hidden-layer tanh MLP, both trained with
softmax cross-entropy. A third kind, ``quadratic`` (1-D f(w) = w^2/2), is a
test hook for exercising the optimizer in closed form and is rejected by
config validation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, IngestionError, NumericalError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class LocalDataset:
    """One device's supervised samples: features (n, d) and integer labels (n,)."""

    x: np.ndarray
    y: np.ndarray

    @property
    def size(self) -> int:
        return self.x.shape[0]

    def subset(self, indices: np.ndarray) -> "LocalDataset":
        return LocalDataset(self.x[indices], self.y[indices])


@dataclass(frozen=True)
class ModelSpec:
    kind: str               # "logistic", "mlp", or "quadratic" (test hook)
    input_dim: int = 1
    num_classes: int = 2
    hidden_units: int = 0


def model_dim(spec: ModelSpec) -> int:
    """Length of the flat parameter vector."""
    d, c, h = spec.input_dim, spec.num_classes, spec.hidden_units
    if spec.kind == "logistic":
        return (d + 1) * c
    if spec.kind == "mlp":
        return (d + 1) * h + (h + 1) * c
    if spec.kind == "quadratic":
        return 1
    raise ConfigError(f"unknown model kind {spec.kind!r}")


def init_model(spec: ModelSpec, stream: np.random.Generator | None = None) -> np.ndarray:
    """Zeros for logistic/quadratic; scaled Gaussian layers for the MLP.

    The MLP cannot start at zero (the hidden layer would never receive a
    gradient), so it needs a stream for symmetry breaking.
    """
    if spec.kind in ("logistic", "quadratic"):
        return np.zeros(model_dim(spec))
    if spec.kind == "mlp":
        if stream is None:
            raise ConfigError("init_model: the mlp initializer needs a stream")
        d, c, h = spec.input_dim, spec.num_classes, spec.hidden_units
        w1 = stream.standard_normal((d, h)) / np.sqrt(d)
        w2 = stream.standard_normal((h, c)) / np.sqrt(h)
        return np.concatenate([w1.ravel(), np.zeros(h), w2.ravel(), np.zeros(c)])
    raise ConfigError(f"unknown model kind {spec.kind!r}")


def _unpack_logistic(w: np.ndarray, spec: ModelSpec):
    d, c = spec.input_dim, spec.num_classes
    return w[: d * c].reshape(d, c), w[d * c:]


def _unpack_mlp(w: np.ndarray, spec: ModelSpec):
    d, c, h = spec.input_dim, spec.num_classes, spec.hidden_units
    ofs = 0
    w1 = w[ofs: ofs + d * h].reshape(d, h); ofs += d * h
    b1 = w[ofs: ofs + h]; ofs += h
    w2 = w[ofs: ofs + h * c].reshape(h, c); ofs += h * c
    b2 = w[ofs: ofs + c]
    return w1, b1, w2, b2


def predict_logits(w: np.ndarray, x: np.ndarray, spec: ModelSpec) -> np.ndarray:
    if spec.kind == "logistic":
        weights, bias = _unpack_logistic(w, spec)
        return x @ weights + bias
    if spec.kind == "mlp":
        w1, b1, w2, b2 = _unpack_mlp(w, spec)
        return np.tanh(x @ w1 + b1) @ w2 + b2
    raise ConfigError(f"predict_logits: no class scores for model kind {spec.kind!r}")


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def loss_and_gradient(w: np.ndarray, data: LocalDataset, spec: ModelSpec):
    """Mean cross-entropy over the dataset and its gradient in flat layout."""
    if data.size == 0:
        raise DomainError("loss_and_gradient: empty dataset")
    n = data.size
    if spec.kind == "quadratic":
        # f(w) = w^2/2 per sample, data ignored; gradient is w itself.
        # Squared in float64 so divergence overflows to inf instead of raising.
        return float(0.5 * w[0] * w[0]), w.copy()
    if spec.kind == "logistic":
        logits = predict_logits(w, data.x, spec)
        logp = _log_softmax(logits)
        loss = -float(np.mean(logp[np.arange(n), data.y]))
        dz = np.exp(logp)
        dz[np.arange(n), data.y] -= 1.0
        dz /= n
        grad = np.concatenate([(data.x.T @ dz).ravel(), dz.sum(axis=0)])
        return loss, grad
    if spec.kind == "mlp":
        w1, b1, w2, b2 = _unpack_mlp(w, spec)
        hidden = np.tanh(data.x @ w1 + b1)
        logp = _log_softmax(hidden @ w2 + b2)
        loss = -float(np.mean(logp[np.arange(n), data.y]))
        dz = np.exp(logp)
        dz[np.arange(n), data.y] -= 1.0
        dz /= n
        dhidden = (dz @ w2.T) * (1.0 - hidden ** 2)
        grad = np.concatenate([
            (data.x.T @ dhidden).ravel(), dhidden.sum(axis=0),
            (hidden.T @ dz).ravel(), dz.sum(axis=0),
        ])
        return loss, grad
    raise ConfigError(f"unknown model kind {spec.kind!r}")


def local_loss(w: np.ndarray, data: LocalDataset, spec: ModelSpec) -> float:
    loss, _ = loss_and_gradient(w, data, spec)
    return loss


def global_loss(w: np.ndarray, datasets, spec: ModelSpec) -> float:
    """Sample-weighted mean of the local losses."""
    total = sum(d.size for d in datasets)
    if total == 0:
        raise DomainError("global_loss: no samples")
    return sum(d.size * local_loss(w, d, spec) for d in datasets) / total


def evaluate_accuracy(w: np.ndarray, data: LocalDataset, spec: ModelSpec) -> float:
    """Fraction of argmax predictions that match (ties resolve to the lowest class)."""
    logits = predict_logits(w, data.x, spec)
    return float(np.mean(np.argmax(logits, axis=1) == data.y))


@dataclass
class TrainResult:
    model: np.ndarray
    max_grad_sq: float   # largest ||gradient||^2 seen at any local step
    grad_sum: np.ndarray  # sum of per-step gradients (update identity: w0 - w = eta * grad_sum)


def train_epochs(w0: np.ndarray, data: LocalDataset, eta: float, tau: int,
                 spec: ModelSpec, stream: np.random.Generator | None = None,
                 batch_size: int = 0) -> TrainResult:
    """Run ``tau`` local epochs of gradient descent from ``w0``.

    batch_size == 0 takes one full-batch step per epoch (the deterministic
    default); otherwise each epoch reshuffles via ``stream`` and steps once
    per mini-batch.
    """
    if tau < 0:
        raise DomainError("train_epochs: tau must be >= 0")
    if eta < 0.0:
        raise DomainError("train_epochs: eta must be >= 0")
    if batch_size and stream is None:
        raise ConfigError("train_epochs: mini-batch mode needs a stream")
    w = w0.copy()
    max_grad_sq = 0.0
    grad_sum = np.zeros_like(w0)
    for _ in range(tau):
        if batch_size:
            order = stream.permutation(data.size)
            batches = [order[i: i + batch_size] for i in range(0, data.size, batch_size)]
        else:
            batches = [None]
        for batch in batches:
            part = data if batch is None else data.subset(batch)
            _, grad = loss_and_gradient(w, part, spec)
            max_grad_sq = max(max_grad_sq, float(np.dot(grad, grad)))
            grad_sum += grad
            w -= eta * grad
        if not np.all(np.isfinite(w)):
            raise NumericalError("train_epochs: model vector became non-finite")
    return TrainResult(model=w, max_grad_sq=max_grad_sq, grad_sum=grad_sum)


def local_sgd(w0: np.ndarray, data: LocalDataset, eta: float, tau: int,
              spec: ModelSpec, stream: np.random.Generator | None = None,
              batch_size: int = 0) -> np.ndarray:
    """The trained model after ``tau`` local epochs."""
    return train_epochs(w0, data, eta, tau, spec, stream=stream, batch_size=batch_size).model


def model_difference(w_before: np.ndarray, w_after: np.ndarray) -> np.ndarray:
    """What a device transmits: w_before - w_after (eta times the summed gradients)."""
    return w_before - w_after


def class_means(num_classes: int, input_dim: int, separation: float) -> np.ndarray:
    """Deterministic cluster centers shared by every device.

    Class k sits at +/- separation along axis k mod input_dim, so identically
    seeded devices draw IID samples from the same mixture. Supports up to
    2 * input_dim classes.
    """
    if num_classes > 2 * input_dim:
        raise ConfigError("class_means: need num_classes <= 2*input_dim")
    means = np.zeros((num_classes, input_dim))
    for k in range(num_classes):
        means[k, k % input_dim] = separation if k < input_dim else -separation
    return means


def make_synthetic_dataset(num_classes: int, n: int, input_dim: int, separation: float,
                           stream: np.random.Generator) -> LocalDataset:
    """Unit-variance Gaussian clusters around the shared class means."""
    if n < 1:
        raise DomainError("make_synthetic_dataset: n must be >= 1")
    means = class_means(num_classes, input_dim, separation)
    labels = stream.integers(0, num_classes, size=n)
    x = means[labels] + stream.standard_normal((n, input_dim))
    return LocalDataset(x=x, y=labels.astype(np.int64))


def _read_exact(path: Path, header_fmt: str):
    data = path.read_bytes()
    header_len = struct.calcsize(header_fmt)
    if len(data) < header_len:
        raise IngestionError(f"{path}: truncated header at byte {len(data)}, need {header_len}")
    return data, struct.unpack(header_fmt, data[:header_len]), header_len


def _read_idx_images(path: Path) -> np.ndarray:
    data, (magic, count, rows, cols), ofs = _read_exact(path, ">IIII")
    if magic != IDX_IMAGES_MAGIC:
        raise IngestionError(
            f"{path}: bad magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x} for an image file")
    need = ofs + count * rows * cols
    if len(data) < need:
        raise IngestionError(f"{path}: truncated at byte {len(data)}, expected {need}")
    pixels = np.frombuffer(data, dtype=np.uint8, count=count * rows * cols, offset=ofs)
    return pixels.reshape(count, rows * cols).astype(np.float64) / 255.0


def _read_idx_labels(path: Path) -> np.ndarray:
    data, (magic, count), ofs = _read_exact(path, ">II")
    if magic != IDX_LABELS_MAGIC:
        raise IngestionError(
            f"{path}: bad magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x} for a label file")
    need = ofs + count
    if len(data) < need:
        raise IngestionError(f"{path}: truncated at byte {len(data)}, expected {need}")
    labels = np.frombuffer(data, dtype=np.uint8, count=count, offset=ofs)
    if labels.size and labels.max() > 9:
        raise IngestionError(f"{path}: label {int(labels.max())} outside 0-9")
    return labels.astype(np.int64)


def load_idx(images_path, labels_path) -> LocalDataset:
    """Load a big-endian IDX image/label pair; pixels scaled to [0, 1]."""
    x = _read_idx_images(Path(images_path))
    y = _read_idx_labels(Path(labels_path))
    if x.shape[0] != y.shape[0]:
        raise IngestionError(
            f"{images_path} has {x.shape[0]} images but {labels_path} has {y.shape[0]} labels")
    return LocalDataset(x=x, y=y)
