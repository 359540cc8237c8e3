"""Network assembly from compact spec dicts, plus the training loss.

Spec dicts are plain JSON-serializable descriptions:

    {"arch": "mlp", "input_width": 16, "depth": 4, "width": 256,
     "dropout": 0.2, "output": 6}
    {"arch": "cnn", "input_width": 16, "depth": 4, "filters": 64,
     "kernel": 16, "dropout": 0.2, "output": 6}

Hidden blocks follow the fixed order linear -> ReLU -> dropout -> batch
normalization; the CNN flattens (filters * input_width) before the linear
output head.  The output layer is linear with six units.
"""

from __future__ import annotations

import numpy as np

from .layers import BatchNorm, Conv1D, Dense, Dropout, Flatten, ReLU


def mlp_spec(input_width, width=256, depth=4, dropout=0.2, output=6):
    return {"arch": "mlp", "input_width": int(input_width), "width": int(width),
            "depth": int(depth), "dropout": float(dropout), "output": int(output)}


def cnn_spec(input_width, filters=64, kernel=16, depth=4, dropout=0.2, output=6):
    return {"arch": "cnn", "input_width": int(input_width),
            "filters": int(filters), "kernel": int(kernel), "depth": int(depth),
            "dropout": float(dropout), "output": int(output)}


class Network:
    """Sequential stack of layers sharing one dtype."""

    def __init__(self, spec, layers, dtype):
        self.spec = dict(spec)
        self.layers = layers
        self.dtype = np.dtype(dtype)

    def _shape_input(self, x):
        x = np.asarray(x, dtype=self.dtype)
        if self.spec["arch"] == "cnn":
            return x.reshape(x.shape[0], x.shape[1], 1)  # channels last
        return x

    def forward(self, x, train=False, rng=None):
        if x.shape[-1] != self.spec["input_width"]:
            raise ValueError(f"expected feature width {self.spec['input_width']}, "
                             f"got {x.shape[-1]}")
        out = self._shape_input(x)
        for layer in self.layers:
            out = layer.forward(out, train=train, rng=rng)
        return out

    def backward(self, dout):
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return dout

    def zero_grads(self):
        for layer in self.layers:
            layer.zero_grads()

    def parameters(self):
        """Flat (name, array) list in a fixed, documented order."""
        out = []
        for i, layer in enumerate(self.layers):
            for name in sorted(layer.params):
                out.append((f"layer{i}.{name}", layer.params[name]))
        return out

    def gradients(self):
        out = []
        for i, layer in enumerate(self.layers):
            for name in sorted(layer.grads):
                out.append((f"layer{i}.{name}", layer.grads[name]))
        return out

    def state_arrays(self):
        """Parameters plus normalization running statistics, for persistence."""
        out = dict(self.parameters())
        for i, layer in enumerate(self.layers):
            if isinstance(layer, BatchNorm):
                out[f"layer{i}.running_mean"] = layer.running_mean
                out[f"layer{i}.running_var"] = layer.running_var
        return out

    def load_state(self, arrays: dict):
        for name, value in self.state_arrays().items():
            if name not in arrays:
                raise ValueError(f"model file misses tensor {name}")
            stored = arrays[name]
            if stored.shape != value.shape:
                raise ValueError(f"tensor {name} has shape {stored.shape}, "
                                 f"expected {value.shape}")
            value[...] = stored.astype(self.dtype)


def build_network(spec, rng, dtype="float64") -> Network:
    arch = spec["arch"]
    dropout = spec.get("dropout", 0.2)
    layers = []
    if arch == "mlp":
        width_in = spec["input_width"]
        for _ in range(spec["depth"]):
            layers += [Dense(width_in, spec["width"], rng, dtype, init="he"),
                       ReLU(), Dropout(dropout), BatchNorm(spec["width"], dtype)]
            width_in = spec["width"]
        layers.append(Dense(width_in, spec["output"], rng, dtype, init="glorot"))
    elif arch == "cnn":
        c_in = 1
        for _ in range(spec["depth"]):
            layers += [Conv1D(c_in, spec["filters"], spec["kernel"], rng, dtype),
                       ReLU(), Dropout(dropout), BatchNorm(spec["filters"], dtype)]
            c_in = spec["filters"]
        layers.append(Flatten())
        layers.append(Dense(spec["filters"] * spec["input_width"], spec["output"],
                            rng, dtype, init="glorot"))
    else:
        raise ValueError(f"unknown architecture {arch!r}")
    return Network(spec, layers, dtype)


def count_parameters(net: Network):
    """(trainable, total) parameter counts; total adds running statistics."""
    trainable = sum(v.size for _, v in net.parameters())
    running = sum(layer.running_mean.size + layer.running_var.size
                  for layer in net.layers if isinstance(layer, BatchNorm))
    return trainable, trainable + running


def loss_l2(pred, labels) -> float:
    """Mean over the batch of the squared L2 residual norm."""
    diff = pred - labels
    return float(np.mean(np.sum(diff * diff, axis=1)))


def loss_l2_grad(pred, labels) -> np.ndarray:
    return 2.0 * (pred - labels) / len(pred)
