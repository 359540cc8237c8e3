"""User-facing trained estimators (ANN and KNN) with persistence.

An estimator owns its FeatureTransform, so ``predict`` takes raw linear SNR
vectors and returns physical labels: positions/pitch/roll clamped into the
ranges seen in training, yaw wrapped into [0, 360).
"""

from __future__ import annotations

import time

import numpy as np

from . import knn
from .dataset import Dataset, FeatureTransform
from .errors import DataFormatError
from .geometry import wrap_360
from .modelio import load_container, save_container
from .nn.network import Network, build_network
from .nn.training import TrainConfig, train_network


def _finalize_labels(labels: np.ndarray, low, high) -> np.ndarray:
    out = labels.copy()
    for col in (0, 1, 2, 4, 5):
        out[:, col] = np.clip(out[:, col], low[col], high[col])
    out[:, 3] = wrap_360(out[:, 3])
    return out


class _BaseEstimator:
    kind: str = ""

    def __init__(self, transform: FeatureTransform, extra: dict):
        self.transform = transform
        self.extra = dict(extra)

    def _check_width(self, rho):
        if rho.shape[1] != len(self.transform.feat_mean):
            raise DataFormatError(
                f"feature width {rho.shape[1]} does not match the model "
                f"({len(self.transform.feat_mean)} APs)")

    def predict(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        single = rho.ndim == 1
        rho = np.atleast_2d(rho)
        self._check_width(rho)
        labels = self._predict_batch(self.transform.features_in(rho))
        labels = _finalize_labels(labels, self.transform.label_low,
                                  self.transform.label_high)
        return labels[0] if single else labels

    def _predict_batch(self, feats: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def save(self, path: str):
        raise NotImplementedError


class AnnEstimator(_BaseEstimator):
    """MLP or CNN regressor wrapping a trained Network."""

    def __init__(self, network: Network, transform: FeatureTransform,
                 extra: dict):
        super().__init__(transform, extra)
        self.network = network
        self.kind = network.spec["arch"]

    @classmethod
    def fit(cls, spec: dict, train: Dataset, val: Dataset,
            cfg: TrainConfig, transform: FeatureTransform | None = None):
        """Train on the given splits; returns (estimator, loss history)."""
        transform = transform or FeatureTransform().fit(train)
        started = time.perf_counter()
        net, history = train_network(
            spec,
            transform.features_in(train.features),
            transform.labels_in(train.labels),
            transform.features_in(val.features),
            transform.labels_in(val.labels) if len(val) else val.labels,
            cfg)
        elapsed = time.perf_counter() - started
        extra = {
            "seed": cfg.seed, "epochs": cfg.epochs, "n_train": len(train),
            "batch_size": cfg.batch_size, "learning_rate": cfg.learning_rate,
            "dtype": cfg.dtype,
            "offline_ms_per_point": 1e3 * elapsed / max(len(train), 1),
            "room_hash": train.meta.get("room_hash", ""),
            "channel_flag": train.meta.get("channel_flag", ""),
        }
        return cls(net, transform, extra), history

    def _predict_batch(self, feats):
        pred = self.network.forward(feats.astype(self.network.dtype), train=False)
        return self.transform.labels_out(pred.astype(float))

    def save(self, path: str):
        save_container(path, self.kind, self.network.spec,
                       self.transform.to_dict(), self.extra,
                       self.network.state_arrays())


class KnnEstimator(_BaseEstimator):
    """Nearest-neighbour baseline; stores the transformed training split."""

    kind = "knn"

    def __init__(self, features: np.ndarray, labels: np.ndarray, k: int,
                 transform: FeatureTransform, extra: dict):
        super().__init__(transform, extra)
        if not 1 <= k <= len(features):
            raise ValueError(f"k must lie in [1, {len(features)}]")
        self.features = np.asarray(features, dtype=float)
        self.labels = np.asarray(labels, dtype=float)
        self.k = int(k)

    @classmethod
    def fit(cls, train: Dataset, k: int = knn.DEFAULT_K,
            transform: FeatureTransform | None = None):
        if len(train) == 0:
            raise ValueError("cannot fit on an empty split")
        started = time.perf_counter()
        transform = transform or FeatureTransform().fit(train)
        stored = transform.features_in(train.features)
        elapsed = time.perf_counter() - started
        extra = {"n_train": len(train),
                 "offline_ms_per_point": 1e3 * elapsed / len(train),
                 "room_hash": train.meta.get("room_hash", ""),
                 "channel_flag": train.meta.get("channel_flag", "")}
        return cls(stored, train.labels.copy(), k, transform, extra)

    @classmethod
    def fit_with_selection(cls, train: Dataset, val: Dataset,
                           grid=knn.K_GRID,
                           transform: FeatureTransform | None = None):
        transform = transform or FeatureTransform().fit(train)
        model = cls.fit(train, k=1, transform=transform)
        model.k = knn.select_k(model.features, model.labels,
                               transform.features_in(val.features), val.labels,
                               grid=grid)
        model.extra["k_grid"] = list(grid)
        return model

    def _predict_batch(self, feats):
        idx = knn.nearest_indices(self.features, feats, self.k)
        return knn.average_labels(self.labels, idx)

    def save(self, path: str):
        save_container(path, "knn", {"k": self.k},
                       self.transform.to_dict(), self.extra,
                       {"features": self.features, "labels": self.labels})


def load_estimator(path: str):
    header, arrays = load_container(path)
    transform = FeatureTransform.from_dict(header["transform"])
    kind = header["kind"]
    if kind in ("mlp", "cnn"):
        net = build_network(header["spec"], np.random.default_rng(0),
                            dtype=header["extra"].get("dtype", "float64"))
        net.load_state(arrays)
        return AnnEstimator(net, transform, header["extra"])
    if kind == "knn":
        return KnnEstimator(arrays["features"], arrays["labels"],
                            header["spec"]["k"], transform, header["extra"])
    raise DataFormatError(f"unknown estimator kind {kind!r} in {path}")
