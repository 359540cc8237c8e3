"""Adam optimizer and the minibatch training loop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericsError
from .network import Network, build_network, loss_l2, loss_l2_grad

_INIT_STREAM, _BATCH_STREAM = 1, 2


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 128
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    dropout: float = 0.2
    seed: int = 0
    dtype: str = "float32"  # training precision; gradient checks run float64

    def validate(self):
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("epochs/batch_size must be >= 1 and lr > 0")


class AdamState:
    """First/second moment accumulators matching a parameter list."""

    def __init__(self, params):
        self.m = [np.zeros_like(p) for _, p in params]
        self.v = [np.zeros_like(p) for _, p in params]


def adam_step(params, grads, state: AdamState, t: int, cfg: TrainConfig):
    """One bias-corrected Adam update, in place on the parameter arrays."""
    if t < 1:
        raise ValueError("Adam step index starts at 1")
    b1, b2 = cfg.beta1, cfg.beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    for (_, p), (_, g), m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= cfg.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)


def _epoch_batches(n: int, batch_size: int, rng):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        batch = order[start:start + batch_size]
        # batch statistics need at least two samples
        if len(batch) >= 2 or n == 1:
            yield batch


def train_network(spec: dict, x_train, y_train, x_val, y_val,
                  cfg: TrainConfig) -> tuple[Network, list]:
    """Minibatch Adam on the L2 loss; returns the net and the loss history.

    History rows are (epoch, mean train batch loss, validation loss), one per
    epoch.  Training aborts with NumericsError on a non-finite loss.
    """
    cfg.validate()
    spec = dict(spec, dropout=cfg.dropout)
    dtype = np.dtype(cfg.dtype)
    x_train = np.ascontiguousarray(x_train, dtype=dtype)
    y_train = np.ascontiguousarray(y_train, dtype=dtype)
    x_val = np.ascontiguousarray(x_val, dtype=dtype)
    y_val = np.ascontiguousarray(y_val, dtype=dtype)

    init_rng = np.random.default_rng([cfg.seed, _INIT_STREAM])
    batch_rng = np.random.default_rng([cfg.seed, _BATCH_STREAM])
    net = build_network(spec, init_rng, dtype=cfg.dtype)
    params = net.parameters()
    state = AdamState(params)

    history = []
    t = 0
    for epoch in range(1, cfg.epochs + 1):
        total, seen = 0.0, 0
        for batch in _epoch_batches(len(x_train), cfg.batch_size, batch_rng):
            xb, yb = x_train[batch], y_train[batch]
            pred = net.forward(xb, train=True, rng=batch_rng)
            batch_loss = loss_l2(pred, yb)
            if not np.isfinite(batch_loss):
                raise NumericsError(f"training diverged at epoch {epoch} "
                                    f"(loss {batch_loss})")
            net.zero_grads()
            net.backward(loss_l2_grad(pred, yb).astype(dtype))
            t += 1
            adam_step(params, net.gradients(), state, t, cfg)
            total += batch_loss * len(batch)
            seen += len(batch)
        train_loss = total / max(seen, 1)
        val_loss = evaluate_loss(net, x_val, y_val) if len(x_val) else float("nan")
        history.append((epoch, train_loss, val_loss))
    return net, history


def evaluate_loss(net: Network, x, y, chunk=4096) -> float:
    total = 0.0
    x = np.asarray(x, dtype=net.dtype)
    for start in range(0, len(x), chunk):
        pred = net.forward(x[start:start + chunk], train=False)
        diff = pred - y[start:start + chunk]
        total += float(np.sum(diff * diff))
    return total / len(x)


def save_loss_curve(history, path):
    with open(path, "w", newline="\n") as fh:
        fh.write("epoch,train_loss,val_loss\n")
        for epoch, train_loss, val_loss in history:
            fh.write(f"{epoch},{train_loss:.10g},{val_loss:.10g}\n")
