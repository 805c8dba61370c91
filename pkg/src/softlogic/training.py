"""Minibatch SGD training for logic networks and a dense tanh baseline.

The loss is the mean squared error between unit-interval scores and 0/1
targets.  The logic network adds an L1 penalty on selector weights, which
pulls the routing sparse so extracted expressions stay small; the dense
baseline uses an L2 penalty at the same coefficient.  Early stopping
tracks validation misclassification and the best snapshot wins.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset, split_dataset
from .network import LogicNetwork, fit_normalization

__all__ = [
    "TrainingDivergedError",
    "TrainConfig",
    "Metrics",
    "TrainResult",
    "train",
    "evaluate",
    "BaselineConfig",
    "DenseTanhNet",
    "build_baseline",
    "train_baseline",
    "CrossValResult",
    "cross_validate",
    "write_training_log",
]


class TrainingDivergedError(RuntimeError):
    """Raised when the loss stops being finite."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    l1_regularization: float = 0.0001
    max_epochs: int = 200
    patience: int = 20
    batch_size: int = 16
    validation_fraction: float = 0.15
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.l1_regularization < 0:
            raise ValueError("l1_regularization must be nonnegative")
        if self.max_epochs < 1 or self.patience < 1:
            raise ValueError("max_epochs and patience must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if not (0.0 < self.validation_fraction < 1.0):
            raise ValueError("validation_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class Metrics:
    misclassification_rate: float
    confusion: tuple[tuple[int, ...], ...]
    count: int

    def to_dict(self) -> dict:
        return {
            "misclassification_rate": self.misclassification_rate,
            "confusion": [list(row) for row in self.confusion],
            "count": self.count,
        }


@dataclass
class TrainResult:
    network: object
    log: list[tuple[int, float, float]]
    best_epoch: int
    best_val_rate: float
    epochs_run: int


def _targets(labels: np.ndarray, class_count: int) -> np.ndarray:
    if class_count == 2:
        return labels.astype(float)[:, None]
    out = np.zeros((labels.shape[0], class_count))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def evaluate(model, dataset: Dataset) -> Metrics:
    """Misclassification rate and confusion matrix (rows = true class)."""
    classes, _ = model.classify(dataset.features)
    c = model.class_count
    confusion = np.zeros((c, c), dtype=np.intp)
    np.add.at(confusion, (dataset.labels, classes), 1)
    n = dataset.labels.shape[0]
    rate = 1.0 - float(np.trace(confusion)) / n if n else 0.0
    return Metrics(
        misclassification_rate=rate,
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
        count=n,
    )


def _fit(model, dataset: Dataset, config: TrainConfig, penalty_term,
         apply_updates) -> TrainResult:
    """Shared minibatch loop; ``penalty_term(model)`` is the regularizer
    added to the loss and ``apply_updates(model, grads, config)`` owns the
    parameter step."""
    if dataset.class_count != model.class_count:
        raise ValueError(
            f"dataset has {dataset.class_count} classes,"
            f" model expects {model.class_count}"
        )
    model.norm_low, model.norm_high = fit_normalization(dataset.features)
    model.bump_version()
    train_part, val_part = split_dataset(
        dataset, config.validation_fraction, seed=config.seed, stratified=True
    )
    if val_part.features.shape[0] == 0:
        raise ValueError("validation split is empty; provide more data")
    targets = _targets(train_part.labels, model.class_count)
    rng = np.random.default_rng(config.seed)
    n = train_part.features.shape[0]
    best_rate = math.inf
    best_epoch = 0
    best_params = model.copy_parameters()
    stall = 0
    log: list[tuple[int, float, float]] = []
    epochs_run = 0
    for epoch in range(1, config.max_epochs + 1):
        epochs_run = epoch
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            outputs, cache = model.forward(train_part.features[idx])
            err = model.scores(outputs) - targets[idx]
            loss = (float(np.mean(err ** 2))
                    + config.l1_regularization * penalty_term(model))
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch},"
                    f" batch {start // config.batch_size}"
                )
            losses.append(loss)
            # d(mse)/d(signed output) = 2 err / size * d(score)/d(output).
            grads = model.backward(cache, err / err.size)
            apply_updates(model, grads, config)
        val_rate = evaluate(model, val_part).misclassification_rate
        log.append((epoch, float(np.mean(losses)), val_rate))
        if val_rate < best_rate:
            best_rate = val_rate
            best_epoch = epoch
            best_params = model.copy_parameters()
            stall = 0
        else:
            # Ties keep the later snapshot: same validation rate, more
            # training, but no patience reset.
            if val_rate == best_rate:
                best_epoch = epoch
                best_params = model.copy_parameters()
            stall += 1
            if stall >= config.patience:
                break
    model.restore_parameters(best_params)
    return TrainResult(
        network=model,
        log=log,
        best_epoch=best_epoch,
        best_val_rate=best_rate,
        epochs_run=epochs_run,
    )


def _logic_penalty(net: LogicNetwork) -> float:
    """L1 mass of the selector weights; compensation levels are exempt."""
    return float(sum(np.sum(np.abs(w)) for w in net.selectors))


def _apply_logic_updates(net: LogicNetwork, grads, config: TrainConfig) -> None:
    lr = config.learning_rate
    for p in range(len(net.selectors)):
        w = net.selectors[p]
        w -= lr * (grads.selectors[p] + config.l1_regularization * np.sign(w))
        a = net.alphas[p]
        a -= lr * grads.alphas[p]
        # Compensation levels only mean anything inside [0, 1].
        np.clip(a, 0.0, 1.0, out=a)
    net.bump_version()


def train(net: LogicNetwork, dataset: Dataset, config: TrainConfig = TrainConfig()) -> TrainResult:
    """Fit a logic network: normalization bounds from the data, SGD on
    compensation levels and selector weights, L1 pull on the selectors,
    early stopping on a held-out validation slice."""
    return _fit(net, dataset, config, _logic_penalty, _apply_logic_updates)


# ---------------------------------------------------------------------------
# Dense tanh baseline


@dataclass(frozen=True)
class BaselineConfig:
    """Widths of the dense tanh comparison network, input and output
    included."""

    widths: tuple[int, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.widths) < 2 or any(w < 1 for w in self.widths):
            raise ValueError("widths must list input, hidden and output sizes")

    @staticmethod
    def mirroring(feature_count: int, class_count: int,
                  hidden_width: int = 8) -> "BaselineConfig":
        """Widths that shadow the logic network's layer chain, so parameter
        counts stay in the same regime."""
        m1 = feature_count * (feature_count - 1) // 2 + 2 * feature_count
        m2 = hidden_width * (hidden_width - 1) // 2 + 2 * hidden_width
        out = 1 if class_count == 2 else class_count
        return BaselineConfig(widths=(feature_count, m1, hidden_width, m2, out))


class DenseTanhNet:
    """Fully connected network with tanh after every layer."""

    def __init__(self, config: BaselineConfig, class_count: int):
        self.config = config
        self.class_count = class_count
        rng = np.random.default_rng(config.seed)
        self.weights = []
        self.biases = []
        for w_in, w_out in zip(config.widths, config.widths[1:]):
            scale = 1.0 / math.sqrt(w_in)
            self.weights.append(rng.uniform(-scale, scale, size=(w_out, w_in)))
            self.biases.append(np.zeros(w_out))
        self.norm_low = -np.ones(config.widths[0])
        self.norm_high = np.ones(config.widths[0])
        self._version = 0

    @property
    def feature_count(self) -> int:
        return self.config.widths[0]

    def bump_version(self) -> None:
        self._version += 1

    def normalize(self, features: np.ndarray) -> np.ndarray:
        span = self.norm_high - self.norm_low
        safe = np.where(span > 0, span, 1.0)
        z = 2.0 * (features - self.norm_low) / safe - 1.0
        z = np.where(span > 0, z, 0.0)
        return np.clip(z, -1.0, 1.0)

    def forward(self, features: np.ndarray):
        arr = np.asarray(features, dtype=float)
        if arr.ndim == 1:
            arr = arr[None, :]
        h = self.normalize(arr)
        activations = [h]
        for w, b in zip(self.weights, self.biases):
            h = np.tanh(h @ w.T + b)
            activations.append(h)
        return h, activations

    def backward(self, activations, grad_outputs):
        g = np.asarray(grad_outputs, dtype=float)
        grad_w = [None] * len(self.weights)
        grad_b = [None] * len(self.biases)
        for layer in reversed(range(len(self.weights))):
            out = activations[layer + 1]
            g = g * (1.0 - out ** 2)
            grad_w[layer] = g.T @ activations[layer]
            grad_b[layer] = g.sum(axis=0)
            if layer > 0:
                g = g @ self.weights[layer]
        return grad_w, grad_b

    def scores(self, outputs: np.ndarray) -> np.ndarray:
        return (outputs + 1.0) / 2.0

    def decide(self, outputs: np.ndarray) -> np.ndarray:
        if self.class_count == 2:
            return (self.scores(outputs)[:, 0] >= 0.5).astype(np.intp)
        return np.argmax(outputs, axis=1)

    def classify(self, features: np.ndarray):
        outputs, _ = self.forward(features)
        return self.decide(outputs), self.scores(outputs)

    def copy_parameters(self):
        return ([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def restore_parameters(self, params) -> None:
        weights, biases = params
        self.weights = [w.copy() for w in weights]
        self.biases = [b.copy() for b in biases]
        self.bump_version()


def _dense_penalty(net: DenseTanhNet) -> float:
    return float(sum(np.sum(w ** 2) for w in net.weights))


def _apply_dense_updates(net: DenseTanhNet, grads, config: TrainConfig) -> None:
    grad_w, grad_b = grads
    lr = config.learning_rate
    for layer in range(len(net.weights)):
        w = net.weights[layer]
        w -= lr * (grad_w[layer] + 2.0 * config.l1_regularization * w)
        net.biases[layer] -= lr * grad_b[layer]
    net.bump_version()


def build_baseline(config: BaselineConfig, class_count: int) -> DenseTanhNet:
    return DenseTanhNet(config, class_count)


def train_baseline(net: DenseTanhNet, dataset: Dataset,
                   config: TrainConfig = TrainConfig()) -> TrainResult:
    """Fit the dense tanh baseline with the same loop, loss and early
    stopping as :func:`train`, but an L2 weight penalty."""
    return _fit(net, dataset, config, _dense_penalty, _apply_dense_updates)


# ---------------------------------------------------------------------------
# Cross-validation


@dataclass(frozen=True)
class CrossValResult:
    mean_rate: float
    std_rate: float
    fold_metrics: tuple[Metrics, ...]


def cross_validate(dataset: Dataset, folds: int, build_model, config: TrainConfig,
                   train_fn=None) -> CrossValResult:
    """Stratified k-fold evaluation.

    ``build_model()`` constructs a fresh model per fold and ``train_fn``
    (default :func:`train`) fits it.  Every class must have at least
    ``folds`` members, otherwise stratification is impossible.
    """
    if folds < 2:
        raise ValueError("folds must be at least 2")
    labels = dataset.labels
    counts = np.bincount(labels, minlength=dataset.class_count)
    if np.any(counts[counts > 0] < folds):
        raise ValueError(
            f"every class needs at least {folds} members for {folds}-fold"
            " stratification"
        )
    train_fn = train_fn or train
    rng = np.random.default_rng(config.seed)
    assignment = np.zeros(labels.shape[0], dtype=np.intp)
    for cls in np.nonzero(counts)[0]:
        members = np.nonzero(labels == cls)[0]
        members = members[rng.permutation(members.shape[0])]
        for f in range(folds):
            assignment[members[f::folds]] = f
    fold_metrics = []
    for f in range(folds):
        test_mask = assignment == f
        train_set = dataset.take(np.nonzero(~test_mask)[0])
        test_set = dataset.take(np.nonzero(test_mask)[0])
        model = build_model()
        result = train_fn(model, train_set, config)
        fold_metrics.append(evaluate(result.network, test_set))
    rates = np.array([m.misclassification_rate for m in fold_metrics])
    return CrossValResult(
        mean_rate=float(rates.mean()),
        std_rate=float(rates.std()),
        fold_metrics=tuple(fold_metrics),
    )


def write_training_log(log: list[tuple[int, float, float]], path: str | Path) -> None:
    """Training log CSV: epoch, train_loss, val_misclassification."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["epoch", "train_loss", "val_misclassification"])
        for epoch, loss, val in log:
            writer.writerow([epoch, f"{loss:.10g}", f"{val:.10g}"])
