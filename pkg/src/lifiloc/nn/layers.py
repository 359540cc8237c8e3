"""Trainable layers with explicit forward/backward passes.

Every layer keeps its parameters in ``params`` and the matching gradient
accumulators in ``grads`` (same keys, same shapes).  ``forward`` caches what
``backward`` needs; backward returns the gradient with respect to the layer
input.  Hidden blocks are assembled in the fixed order linear -> ReLU ->
dropout -> normalization.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class Layer:
    """Stateless base; parameterized layers override params/grads."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def forward(self, x, train=False, rng=None):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    def zero_grads(self):
        for g in self.grads.values():
            g[...] = 0.0


class Dense(Layer):
    """Fully connected map x @ W + b on (batch, n_in) inputs."""

    def __init__(self, n_in, n_out, rng, dtype, init="he"):
        super().__init__()
        if init == "he":
            limit = np.sqrt(6.0 / n_in)
        else:  # glorot, for the linear output head
            limit = np.sqrt(6.0 / (n_in + n_out))
        w = rng.uniform(-limit, limit, size=(n_in, n_out))
        self.params = {"w": w.astype(dtype), "b": np.zeros(n_out, dtype=dtype)}
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        self._x = None

    def forward(self, x, train=False, rng=None):
        if train:
            self._x = x
        return x @ self.params["w"] + self.params["b"]

    def backward(self, dy):
        self.grads["w"] += self._x.T @ dy
        self.grads["b"] += dy.sum(axis=0)
        return dy @ self.params["w"].T


class Conv1D(Layer):
    """Same-length 1-D convolution on channels-last (batch, length, c_in)
    inputs.

    The kernel tensor is (kernel, c_in, filters); zero padding splits
    (k-1)//2 left, k//2 right so the output length equals the input length.
    Channels-last keeps every gemm operand and col2im slice contiguous.
    """

    def __init__(self, c_in, filters, kernel, rng, dtype):
        super().__init__()
        self.c_in, self.filters, self.kernel = c_in, filters, kernel
        self.pad_left = (kernel - 1) // 2
        limit = np.sqrt(6.0 / (c_in * kernel))
        w = rng.uniform(-limit, limit, size=(kernel, c_in, filters))
        self.params = {"w": w.astype(dtype), "b": np.zeros(filters, dtype=dtype)}
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        self._col = None
        self._shape = None

    def _im2col(self, x):
        b, length, c = x.shape
        xpad = np.zeros((b, length + self.kernel - 1, c), dtype=x.dtype)
        xpad[:, self.pad_left:self.pad_left + length, :] = x
        win = sliding_window_view(xpad, self.kernel, axis=1)  # (b, L, c, k)
        return win.transpose(0, 1, 3, 2).reshape(b * length, self.kernel * c)

    def forward(self, x, train=False, rng=None):
        b, length, c = x.shape
        col = self._im2col(x)
        y = col @ self.params["w"].reshape(self.kernel * c, self.filters)
        y += self.params["b"]
        if train:
            self._col, self._shape = col, (b, length, c)
        return y.reshape(b, length, self.filters)

    def backward(self, dy):
        b, length, c = self._shape
        dy_mat = dy.reshape(b * length, self.filters)
        w_mat = self.params["w"].reshape(self.kernel * c, self.filters)
        self.grads["w"] += (self._col.T @ dy_mat).reshape(self.params["w"].shape)
        self.grads["b"] += dy_mat.sum(axis=0)
        dcol = (dy_mat @ w_mat.T).reshape(b, length, self.kernel, c)
        dxpad = np.zeros((b, length + self.kernel - 1, c), dtype=dy.dtype)
        for t in range(self.kernel):
            dxpad[:, t:t + length, :] += dcol[:, :, t, :]
        return dxpad[:, self.pad_left:self.pad_left + length, :]


class ReLU(Layer):
    def forward(self, x, train=False, rng=None):
        mask = x > 0
        if train:
            self._mask = mask
        return np.where(mask, x, 0.0)

    def backward(self, dy):
        return np.where(self._mask, dy, 0.0)


class Dropout(Layer):
    """Inverted dropout: train-mode expectation matches inference."""

    def __init__(self, rate):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        self.rate = rate

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            return x
        draw_dtype = np.float32 if x.dtype == np.float32 else np.float64
        keep = (rng.random(x.shape, dtype=draw_dtype) >= self.rate).astype(x.dtype)
        self._mask = keep / (1.0 - self.rate)
        return x * self._mask

    def backward(self, dy):
        if self.rate == 0.0:
            return dy
        return dy * self._mask


class BatchNorm(Layer):
    """Per-channel batch normalization with learnable scale and shift.

    The channel axis is the last one — (batch, features) or (batch, length,
    channels) — and statistics are taken over every other axis.  Inference
    uses running averages updated with momentum 0.9.
    """

    def __init__(self, channels, dtype, eps=1e-5, momentum=0.9):
        super().__init__()
        self.eps = eps
        self.momentum = momentum
        self.params = {
            "gamma": np.ones(channels, dtype=dtype),
            "beta": np.zeros(channels, dtype=dtype),
        }
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)

    def forward(self, x, train=False, rng=None):
        axes = tuple(range(x.ndim - 1))
        if train:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            inv_std = 1.0 / np.sqrt(var + self.eps)
            xhat = (x - mean) * inv_std
            m = self.momentum
            self.running_mean[...] = m * self.running_mean + (1 - m) * mean
            self.running_var[...] = m * self.running_var + (1 - m) * var
            self._xhat, self._inv_std = xhat, inv_std
            self._n = x.size // x.shape[-1]
        else:
            xhat = (x - self.running_mean) / np.sqrt(self.running_var + self.eps)
        return self.params["gamma"] * xhat + self.params["beta"]

    def backward(self, dy):
        axes = tuple(range(dy.ndim - 1))
        xhat, n = self._xhat, self._n
        self.grads["gamma"] += (dy * xhat).sum(axis=axes)
        self.grads["beta"] += dy.sum(axis=axes)
        dxhat = dy * self.params["gamma"]
        sum_dxhat = dxhat.sum(axis=axes)
        sum_dxhat_xhat = (dxhat * xhat).sum(axis=axes)
        return (self._inv_std / n) * (n * dxhat - sum_dxhat
                                      - xhat * sum_dxhat_xhat)


class Flatten(Layer):
    def forward(self, x, train=False, rng=None):
        if train:
            self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._shape)
