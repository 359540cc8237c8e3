"""Shared test utilities: finite-difference gradient checking."""

import numpy as np

from lifiloc.nn.layers import ReLU
from lifiloc.nn.network import build_network, loss_l2, loss_l2_grad


def fd_gradient_worst_error(net, x, y, h=1e-4, max_entries=8, mask_seed=1234):
    """Worst relative |analytic - central difference| over sampled entries.

    Dropout draws are pinned by reseeding the mask stream for every forward,
    so the finite-difference path sees the same masks as the analytic one.
    Entries whose +-h evaluations land on different sides of a ReLU kink are
    skipped: the loss is not differentiable across the kink, so a central
    difference there measures nothing.
    """
    def run_loss():
        pred = net.forward(x, train=True, rng=np.random.default_rng(mask_seed))
        masks = tuple(layer._mask.copy() for layer in net.layers
                      if isinstance(layer, ReLU))
        return loss_l2(pred, y), masks

    def same_masks(a, b):
        return all(np.array_equal(m1, m2) for m1, m2 in zip(a, b))

    (_, base_masks) = run_loss()
    pred = net.forward(x, train=True, rng=np.random.default_rng(mask_seed))
    net.zero_grads()
    net.backward(loss_l2_grad(pred, y))
    grads = dict(net.gradients())

    worst = 0.0
    checked = 0
    for name, param in net.parameters():
        flat = param.reshape(-1)
        gflat = grads[name].reshape(-1)
        idx = np.linspace(0, flat.size - 1, min(flat.size, max_entries),
                          dtype=int)
        for i in idx:
            old = flat[i]
            flat[i] = old + h
            lp, masks_p = run_loss()
            flat[i] = old - h
            lm, masks_m = run_loss()
            flat[i] = old
            if not (same_masks(masks_p, base_masks)
                    and same_masks(masks_m, base_masks)):
                continue
            fd = (lp - lm) / (2.0 * h)
            denom = max(abs(fd), abs(gflat[i]), 1e-8)
            worst = max(worst, abs(fd - gflat[i]) / denom)
            checked += 1
    assert checked > 0, "every sampled entry crossed an activation kink"
    return worst


def tiny_spec_for(kind: str, rng) -> dict:
    """Random tiny architecture exercising one layer kind (float64 path)."""
    width = int(rng.integers(3, 7))
    depth = int(rng.integers(1, 3))
    n_in = int(rng.integers(4, 9))
    if kind in ("dense", "relu", "dropout", "norm-dense"):
        return {"arch": "mlp", "input_width": n_in, "width": width,
                "depth": depth, "dropout": 0.3 if kind == "dropout" else 0.0,
                "output": 6}
    if kind in ("conv", "norm-conv"):
        return {"arch": "cnn", "input_width": n_in,
                "filters": int(rng.integers(2, 5)),
                "kernel": int(rng.integers(1, 6)), "depth": depth,
                "dropout": 0.0, "output": 6}
    raise ValueError(kind)


def make_tiny_net(kind: str, rng):
    spec = tiny_spec_for(kind, rng)
    net = build_network(spec, rng, dtype="float64")
    batch = int(rng.integers(2, 5))
    x = rng.uniform(-1.5, 1.5, size=(batch, spec["input_width"]))
    y = rng.uniform(-1.0, 1.0, size=(batch, 6))
    return net, x, y
