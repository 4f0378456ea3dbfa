"""Mini-batch ADAM training with LR decay, gradient clipping and dropout.

Targets are standardized per channel during optimization (statistics from
the training split) and the affine map is folded back into the linear head
afterwards, so the returned model predicts raw stresses.  All costs in the
history are the raw-unit data term of the sequence cost (the L2 penalty
steers optimization but is excluded from reported metrics).
"""
import copy
import time
from dataclasses import dataclass, field

import numpy as np

from .network import backward, forward, loss
from .scaling import Normalizer


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-4
    lr_decay: float = 0.9
    lr_decay_every: int = 10
    batch_size: int = 32
    l2: float = 1e-4
    clip_norm: float = 1.0
    epochs: int = 50
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    split: tuple = (0.80, 0.1975, 0.0025)
    standardize_targets: bool = True

    def __post_init__(self):
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")
        if min(self.learning_rate, self.batch_size, self.epochs) < 0:
            raise ValueError("training parameters must be non-negative")


def lr_at_epoch(config, epoch):
    """Piecewise-constant schedule; ``epoch`` is 1-based."""
    return config.learning_rate * config.lr_decay ** ((epoch - 1)
                                                      // config.lr_decay_every)


def clip_gradients(grads, clip_norm):
    """Scale gradients so the global norm is at most ``clip_norm``.

    Returns the pre-clip global norm; direction is preserved.
    """
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if clip_norm > 0.0 and total > clip_norm:
        scale = clip_norm / total
        for g in grads:
            g *= scale
    return total


class AdamState:
    def __init__(self, params, beta1, beta2, eps):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0

    def update(self, params, grads, lr):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        corr1 = 1.0 - b1 ** self.t
        corr2 = 1.0 - b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= lr * (m / corr1) / (np.sqrt(v / corr2) + self.eps)


def evaluate_cost(model, inputs, targets, batch_size=64):
    """Mean per-sequence data cost (Eq.-style, no L2) over a set."""
    n = inputs.shape[0]
    total = 0.0
    for start in range(0, n, batch_size):
        stop = min(start + batch_size, n)
        pred = forward(model, inputs[start:stop], training=False)
        total += loss(pred, targets[start:stop]) * (stop - start)
    return total / n


def _fold_target_scaling(model, t_mean, t_std):
    model.head_w *= t_std[None, :]
    model.head_b *= t_std
    model.head_b += t_mean


def train(model, train_inputs, train_targets, val_inputs, val_targets,
          config):
    """Train in place; returns (model, history).

    The model keeps the parameters of the epoch with the best validation
    cost.  History rows: dicts with epoch, lr, train_cost, val_cost,
    wall_time (costs are raw-unit data terms).
    """
    train_inputs = np.asarray(train_inputs, dtype=float)
    train_targets = np.asarray(train_targets, dtype=float)
    val_inputs = np.asarray(val_inputs, dtype=float)
    val_targets = np.asarray(val_targets, dtype=float)

    if model.normalizer is None:
        model.normalizer = Normalizer.fit(train_inputs)
    if config.standardize_targets:
        t_norm = Normalizer.fit(train_targets)
        t_mean, t_std = t_norm.mean, t_norm.std
    else:
        t_mean = np.zeros(train_targets.shape[-1])
        t_std = np.ones(train_targets.shape[-1])
    work_targets = (train_targets - t_mean) / t_std

    rng = np.random.default_rng(config.seed)
    params = model.parameters()
    adam = AdamState(params, config.beta1, config.beta2, config.adam_eps)
    n_train = train_inputs.shape[0]
    batch = max(1, min(config.batch_size, n_train))

    def val_cost_raw():
        if val_inputs.shape[0] == 0:
            return float("nan")
        total = 0.0
        for start in range(0, val_inputs.shape[0], 64):
            stop = min(start + 64, val_inputs.shape[0])
            pred = forward(model, val_inputs[start:stop], training=False)
            pred = pred * t_std + t_mean
            total += loss(pred, val_targets[start:stop]) * (stop - start)
        return total / val_inputs.shape[0]

    history = []
    best_val = np.inf
    best_params = [p.copy() for p in params]
    for epoch in range(1, config.epochs + 1):
        tic = time.perf_counter()
        lr = lr_at_epoch(config, epoch)
        order = rng.permutation(n_train)
        epoch_cost = 0.0
        n_batches = 0
        channel_sq = np.empty(train_targets.shape[-1])
        for start in range(0, n_train, batch):
            idx = order[start:start + batch]
            cost, grads = backward(
                model, train_inputs[idx], work_targets[idx], l2=config.l2,
                training=model.dropout > 0.0, rng=rng,
                channel_sq_out=channel_sq)
            if not np.isfinite(cost):
                raise RuntimeError(
                    f"training diverged (non-finite cost) at epoch {epoch}, "
                    f"batch {n_batches}, lr {lr:g}")
            clip_gradients(grads, config.clip_norm)
            if lr > 0.0:
                adam.update(params, grads, lr)
            # raw-unit data term recovered from the per-channel error sums
            n_t = train_inputs.shape[1]
            epoch_cost += float(channel_sq @ (t_std ** 2)) / (2.0 * n_t * len(idx))
            n_batches += 1
        val_cost = val_cost_raw()
        history.append({
            "epoch": epoch,
            "lr": lr,
            "train_cost": epoch_cost / max(n_batches, 1),
            "val_cost": val_cost,
            "wall_time": time.perf_counter() - tic,
        })
        if np.isnan(val_cost) or val_cost < best_val:
            best_val = val_cost if not np.isnan(val_cost) else best_val
            best_params = [p.copy() for p in params]
    model.set_parameters(best_params)
    _fold_target_scaling(model, t_mean, t_std)
    return model, history


def write_history_csv(path, history):
    import csv
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["epoch", "lr", "train_cost", "val_cost",
                            "wall_time"])
        writer.writeheader()
        writer.writerows(history)
    return path
