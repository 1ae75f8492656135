"""Desk-scale training harness: toy datasets, Adam, loop, decision grids.

Training is single-threaded and bit-deterministic given the config seed:
shuffling uses one seeded generator, batch gradients are accumulated in a
fixed order, and the optimizer touches parameters in a fixed order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .networks import (
    PatchConfig,
    ScoreNetwork,
    network_gradients_batch,
    patch_sequences,
)

__all__ = [
    "AdamState",
    "Dataset",
    "DEFAULT_LR_SWEEP",
    "EpochStats",
    "TrainConfig",
    "accuracy",
    "adam_step",
    "cross_entropy",
    "cross_entropy_batch",
    "decision_grid",
    "make_circles",
    "make_moons",
    "predict",
    "sequence_dataset",
    "train",
    "train_lr_sweep",
    "write_grid_csv",
    "write_history_csv",
]

# Default learning-rate sweep for "pick the best run by train loss".
DEFAULT_LR_SWEEP = (4e-3, 2e-3, 1e-3, 5e-4)


@dataclass
class Dataset:
    """Input sequences (N, d, n) with integer labels in 0..num_classes-1."""

    inputs: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.inputs.ndim != 3:
            raise ValueError(f"inputs must be (N, d, n), got shape {self.inputs.shape}")
        if self.labels.shape != (self.inputs.shape[0],):
            raise ValueError("one label per sample required")
        if self.num_classes < 1:
            raise ValueError("num_classes must be positive")
        if self.labels.size and not (0 <= self.labels.min() and self.labels.max() < self.num_classes):
            raise ValueError("labels out of range")

    def __len__(self) -> int:
        return self.inputs.shape[0]


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


# ---------------------------------------------------------------------------
# toy datasets (each 2-D point is fed as two one-dimensional patches)


def make_moons(num_points: int, noise_sd: float, seed: int = 0) -> Dataset:
    """Two interleaving arcs: class 0 on (cos t, sin t), class 1 on
    (1 - cos t, 1/2 - sin t), t evenly spaced on [0, pi] inclusive."""
    if num_points < 2:
        raise ValueError("need at least two points")
    n0 = num_points - num_points // 2
    n1 = num_points // 2
    t0 = np.linspace(0.0, np.pi, n0)
    t1 = np.linspace(0.0, np.pi, n1)
    points = np.concatenate([
        np.stack([np.cos(t0), np.sin(t0)], axis=1),
        np.stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)], axis=1),
    ])
    labels = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    if noise_sd > 0:
        points = points + np.random.default_rng(seed).normal(scale=noise_sd, size=points.shape)
    return Dataset(points[:, :, None], labels, 2)


def make_circles(num_points: int, noise_sd: float, factor: float = 0.5,
                 seed: int = 0) -> Dataset:
    """Concentric rings: class 0 at radius 1, class 1 at radius ``factor``,
    angles evenly spaced on [0, 2*pi)."""
    if num_points < 2:
        raise ValueError("need at least two points")
    if not 0.0 < factor < 1.0:
        raise ValueError(f"factor must lie in (0, 1), got {factor}")
    n0 = num_points - num_points // 2
    n1 = num_points // 2
    a0 = np.linspace(0.0, 2.0 * np.pi, n0, endpoint=False)
    a1 = np.linspace(0.0, 2.0 * np.pi, n1, endpoint=False)
    points = np.concatenate([
        np.stack([np.cos(a0), np.sin(a0)], axis=1),
        factor * np.stack([np.cos(a1), np.sin(a1)], axis=1),
    ])
    labels = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    if noise_sd > 0:
        points = points + np.random.default_rng(seed).normal(scale=noise_sd, size=points.shape)
    return Dataset(points[:, :, None], labels, 2)


def sequence_dataset(images: np.ndarray, labels: np.ndarray, cfg: PatchConfig,
                     num_classes: int) -> Dataset:
    """Patch-sequence dataset from a batch of images."""
    return Dataset(patch_sequences(images, cfg), labels, num_classes)


# ---------------------------------------------------------------------------
# loss


def cross_entropy_batch(scores: np.ndarray, labels: np.ndarray):
    """Mean softmax cross-entropy and its gradient w.r.t. the scores.

    Stabilized by max subtraction; the gradient rows are
    (softmax - onehot) / batch and sum to zero.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    batch, num_classes = scores.shape
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= num_classes:
        raise ValueError("label out of range")
    shifted = scores - scores.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(batch), labels]
    loss = float(np.mean(log_norm - picked))
    grad = np.exp(shifted - log_norm[:, None])
    grad[np.arange(batch), labels] -= 1.0
    return loss, grad / batch


def cross_entropy(scores: np.ndarray, label: int):
    """Single-sample loss and gradient (gradient not divided by a batch)."""
    loss, grad = cross_entropy_batch(np.asarray(scores, dtype=np.float64)[None],
                                     np.asarray([label]))
    return loss, grad[0]


# ---------------------------------------------------------------------------
# optimizer


@dataclass
class AdamState:
    """First/second moment accumulators, one pair per parameter array."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0

    @classmethod
    def for_params(cls, params) -> "AdamState":
        return cls([np.zeros_like(p) for p in params],
                   [np.zeros_like(p) for p in params])


def adam_step(params, grads, state: AdamState, cfg: TrainConfig):
    """One bias-corrected moment update, applied to params in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads and state must have matching lengths")
    state.step += 1
    t = state.step
    c1 = 1.0 - cfg.beta1 ** t
    c2 = 1.0 - cfg.beta2 ** t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        g = np.asarray(g)
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * g * g
        p -= cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + cfg.eps)
    return params, state


# ---------------------------------------------------------------------------
# training loop


@dataclass
class EpochStats:
    epoch: int
    loss: float
    accuracy: float


def predict(net: ScoreNetwork, inputs: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Argmax class per sample; ties resolve to the lowest class index."""
    inputs = np.asarray(inputs, dtype=np.float64)
    out = np.empty(inputs.shape[0], dtype=np.int64)
    for start in range(0, inputs.shape[0], chunk):
        stop = start + chunk
        out[start:stop] = np.argmax(net.scores_batch(inputs[start:stop]), axis=1)
    return out


def accuracy(net: ScoreNetwork, data: Dataset) -> float:
    return float(np.mean(predict(net, data.inputs) == data.labels))


def train(net: ScoreNetwork, data: Dataset, cfg: TrainConfig) -> list[EpochStats]:
    """Mini-batch Adam on the network's cores/factors and feature map.

    Returns per-epoch training loss (mean over batches) and training
    accuracy (full pass at epoch end).  Zero epochs returns an empty
    history and leaves parameters untouched.
    """
    params = net.weights.parameters() + [net.feature_map.A, net.feature_map.b]
    state = AdamState.for_params(params)
    rng = np.random.default_rng(cfg.seed)
    history: list[EpochStats] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(data))
        batch_losses = []
        for start in range(0, len(data), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb = data.inputs[idx]
            scores = net.scores_batch(xb)
            loss, dscores = cross_entropy_batch(scores, data.labels[idx])
            grads = network_gradients_batch(net, xb, dscores)
            adam_step(params, grads.weight_grads + [grads.dA, grads.db], state, cfg)
            batch_losses.append(loss)
        history.append(EpochStats(epoch + 1, float(np.mean(batch_losses)),
                                  accuracy(net, data)))
    return history


@dataclass
class SweepOutcome:
    best_lr: float
    net: ScoreNetwork
    history: list[EpochStats]
    final_losses: dict = field(default_factory=dict)


def train_lr_sweep(build_net, data: Dataset, cfg: TrainConfig,
                   learning_rates=DEFAULT_LR_SWEEP) -> SweepOutcome:
    """Train one independently initialized run per learning rate and keep
    the best final train loss.

    ``build_net(seed)`` must return a fresh network deterministically from
    the given seed; run k is built from a seed derived from (cfg.seed, k),
    so the whole sweep is reproducible.  Ties resolve to the earlier rate
    in the list.
    """
    best = None
    finals = {}
    for k, lr in enumerate(learning_rates):
        run_seed = np.random.SeedSequence((cfg.seed, k)).generate_state(1)[0]
        net = build_net(int(run_seed))
        history = train(net, data, replace(cfg, learning_rate=lr))
        final = history[-1].loss if history else math.inf
        finals[lr] = final
        if best is None or final < best[0]:
            best = (final, lr, net, history)
    if best is None:
        raise ValueError("learning_rates must be non-empty")
    return SweepOutcome(best_lr=best[1], net=best[2], history=best[3],
                        final_losses=finals)


# ---------------------------------------------------------------------------
# decision grids


def decision_grid(net: ScoreNetwork, bounds, resolution: int):
    """Predicted labels on a lattice over ``bounds = (xmin, xmax, ymin, ymax)``.

    Only for networks consuming a 2-D point as two one-dimensional
    patches.  Returns (labels[iy, ix], xs, ys).
    """
    if net.num_patches != 2 or net.input_size != 1:
        raise ValueError("decision grids need a network over 2-D inputs "
                         "(two patches of one feature)")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    xmin, xmax, ymin, ymax = (float(v) for v in bounds)
    xs = np.linspace(xmin, xmax, resolution)
    ys = np.linspace(ymin, ymax, resolution)
    gx, gy = np.meshgrid(xs, ys)
    batch = np.stack([gx.ravel(), gy.ravel()], axis=1)[:, :, None]
    labels = predict(net, batch).reshape(resolution, resolution)
    return labels, xs, ys


# ---------------------------------------------------------------------------
# CSV artifacts


def write_history_csv(path, history) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "accuracy"])
        for row in history:
            writer.writerow([row.epoch, f"{row.loss:.17g}", f"{row.accuracy:.17g}"])


def write_grid_csv(path, labels, xs, ys) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "label"])
        for iy, y in enumerate(ys):
            for ix, x in enumerate(xs):
                writer.writerow([f"{x:.17g}", f"{y:.17g}", int(labels[iy, ix])])
