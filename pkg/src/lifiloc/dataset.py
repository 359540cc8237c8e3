"""Fingerprint dataset generation, persistence, splitting, and transforms.

One record pairs the linear SNR vector observed at the APs with the
six-value pose label (x, y, z, yaw, pitch, roll).  Record n consumes its own
RNG stream (see lifiloc.sampling), drawing in the fixed order position,
facing direction, yaw, pitch, roll, transmit power, so files regenerate
identically for a given (seed, config) no matter how generation is chunked.

File format: '#' title line, ``key = value`` metadata lines (version, n,
n_r, channel_flag, seed, rng_id, room_hash), one CSV header line, then one
CSV row per record at 17 significant digits (exact float64 round trip).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import CHANNEL_FLAGS, FULL, ChannelModel, snr_vector
from .config import SimConfig
from .errors import DataFormatError
from .sampling import RNG_ID, PoseSampler, record_rng

FORMAT_VERSION = 1
DB_FLOOR_LINEAR = 1e-10  # -100 dB; far below any detectable SNR at N0*B = 1e-14 W
_SPLIT_STREAM = 0x73706C69  # tags the shuffle stream used by split()


@dataclass
class Dataset:
    """In-memory fingerprint dataset: features (N, N_r), labels (N, 6)."""

    features: np.ndarray
    labels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        if len(self.features) != len(self.labels):
            raise DataFormatError("features/labels length mismatch")

    def __len__(self):
        return len(self.features)

    @property
    def n_aps(self) -> int:
        return self.features.shape[1]


def _generate_range(config: SimConfig, flag: str, seed: int, start: int,
                    stop: int):
    model = ChannelModel(config)
    sampler = PoseSampler(config)
    features = np.empty((stop - start, config.room.n_aps))
    labels = np.empty((stop - start, 6))
    for i in range(start, stop):
        rng = record_rng(seed, i)
        pose = sampler.sample_pose(rng)
        h = model.channel_matrix(pose, flag)
        p_elec = sampler.sample_power(rng)
        features[i - start] = snr_vector(h, p_elec, config.room)
        labels[i - start] = pose.label()
    return features, labels


def generate_dataset(config: SimConfig, n: int, channel_flag: str = FULL,
                     seed: int | None = None, workers: int | None = None) -> Dataset:
    """Run the full sampling -> channel -> SNR pipeline for n records."""
    if channel_flag not in CHANNEL_FLAGS:
        raise ValueError(f"channel flag must be one of {CHANNEL_FLAGS}")
    if n < 1:
        raise ValueError("need n >= 1")
    seed = config.sampler.seed if seed is None else int(seed)
    if workers is None:
        workers = int(os.environ.get("LIFI_THREADS", "1"))

    if workers > 1 and n >= 4 * workers:
        bounds = np.linspace(0, n, workers + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                _generate_range, [config] * workers, [channel_flag] * workers,
                [seed] * workers, bounds[:-1], bounds[1:]))
        features = np.concatenate([p[0] for p in parts])
        labels = np.concatenate([p[1] for p in parts])
    else:
        features, labels = _generate_range(config, channel_flag, seed, 0, n)

    meta = {
        "version": FORMAT_VERSION,
        "n": n,
        "n_r": config.room.n_aps,
        "channel_flag": channel_flag,
        "seed": seed,
        "rng_id": RNG_ID,
        "room_hash": config.room_hash(),
    }
    return Dataset(features, labels, meta)


def save_dataset(ds: Dataset, path: str):
    n_r = ds.n_aps
    header = ",".join([f"rho_{i + 1}" for i in range(n_r)]
                      + ["x", "y", "z", "alpha", "beta", "gamma"])
    with open(path, "w", newline="\n") as fh:
        fh.write("# lifiloc fingerprint dataset\n")
        for key in ("version", "n", "n_r", "channel_flag", "seed", "rng_id",
                    "room_hash"):
            fh.write(f"{key} = {ds.meta[key]}\n")
        fh.write(header + "\n")
        rows = np.hstack([ds.features, ds.labels])
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_dataset(path: str) -> Dataset:
    meta = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise DataFormatError(f"cannot open dataset {path}: {exc}") from exc
    with fh:
        first = fh.readline()
        if not first.startswith("# lifiloc fingerprint dataset"):
            raise DataFormatError(f"{path} is not a fingerprint dataset file")
        header = None
        for line in fh:
            line = line.strip()
            if line.startswith("rho_1,"):
                header = line
                break
            if "=" not in line:
                raise DataFormatError(f"malformed metadata line: {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            meta[key] = value
        if header is None:
            raise DataFormatError(f"{path}: missing CSV header line")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise DataFormatError(f"{path}: bad CSV body: {exc}") from exc

    for key in ("version", "n", "n_r", "seed"):
        if key in meta:
            meta[key] = int(meta[key])
    n_r = meta.get("n_r", data.shape[1] - 6)
    if data.shape[1] != n_r + 6:
        raise DataFormatError(f"{path}: expected {n_r + 6} columns, "
                              f"found {data.shape[1]}")
    if meta.get("n") not in (None, len(data)):
        raise DataFormatError(f"{path}: header says n = {meta['n']}, "
                              f"body has {len(data)} rows")
    return Dataset(data[:, :n_r], data[:, n_r:], meta)


def split(ds: Dataset, fractions=(0.81, 0.09, 0.10), seed: int | None = None):
    """Shuffle and partition into (train, val, test) datasets.

    Default keeps the 90/10 train/test partition and carves 10% of the
    training portion out for validation.  The shuffle stream is derived from
    the dataset seed unless one is given, so training and evaluation recover
    the same held-out split from the file alone.
    """
    fractions = tuple(float(f) for f in fractions)
    if abs(sum(fractions) - 1.0) > 1e-9 or len(fractions) != 3:
        raise ValueError("need three fractions summing to 1")
    if seed is None:
        seed = int(ds.meta.get("seed", 0))
    order = np.random.default_rng(
        np.random.SeedSequence([int(seed), _SPLIT_STREAM])).permutation(len(ds))
    n_train = int(fractions[0] * len(ds))
    n_val = int(fractions[1] * len(ds))
    cuts = (order[:n_train], order[n_train:n_train + n_val],
            order[n_train + n_val:])
    out = []
    for frac, idx in zip(fractions, cuts):
        if frac > 0 and len(idx) == 0:
            raise ValueError(f"fraction {frac} produced an empty partition")
        out.append(Dataset(ds.features[idx], ds.labels[idx], dict(ds.meta)))
    return tuple(out)


class FeatureTransform:
    """dB conversion + per-AP feature standardization + label scaling.

    Features: 10*log10(max(rho, floor)) standardized per AP column; a column
    with no variance (an AP that never hears anything) keeps std 1 and maps
    to zeros.  Labels are standardized per component unless raw_labels is
    set; the inverse restores physical units.  Fit on the training split
    only.
    """

    def __init__(self, db_floor_linear: float = DB_FLOOR_LINEAR,
                 raw_labels: bool = False):
        self.db_floor_linear = float(db_floor_linear)
        self.raw_labels = bool(raw_labels)
        self.feat_mean = None
        self.feat_std = None
        self.label_mean = None
        self.label_std = None
        self.label_low = None
        self.label_high = None

    def fit(self, train: Dataset) -> "FeatureTransform":
        if len(train) == 0:
            raise ValueError("cannot fit a transform on an empty split")
        db = self._to_db(train.features)
        self.feat_mean = db.mean(axis=0)
        std = db.std(axis=0)
        self.feat_std = np.where(std > 1e-12, std, 1.0)
        if self.raw_labels:
            self.label_mean = np.zeros(6)
            self.label_std = np.ones(6)
        else:
            self.label_mean = train.labels.mean(axis=0)
            lstd = train.labels.std(axis=0)
            self.label_std = np.where(lstd > 1e-12, lstd, 1.0)
        self.label_low = train.labels.min(axis=0)
        self.label_high = train.labels.max(axis=0)
        return self

    def _to_db(self, rho):
        return 10.0 * np.log10(np.maximum(rho, self.db_floor_linear))

    def features_in(self, rho: np.ndarray) -> np.ndarray:
        return (self._to_db(np.asarray(rho, dtype=float)) - self.feat_mean) / self.feat_std

    def labels_in(self, labels: np.ndarray) -> np.ndarray:
        return (np.asarray(labels, dtype=float) - self.label_mean) / self.label_std

    def labels_out(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float) * self.label_std + self.label_mean

    def to_dict(self) -> dict:
        return {
            "db_floor_linear": self.db_floor_linear,
            "raw_labels": self.raw_labels,
            "feat_mean": self.feat_mean.tolist(),
            "feat_std": self.feat_std.tolist(),
            "label_mean": self.label_mean.tolist(),
            "label_std": self.label_std.tolist(),
            "label_low": self.label_low.tolist(),
            "label_high": self.label_high.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureTransform":
        tf = cls(db_floor_linear=d["db_floor_linear"], raw_labels=d["raw_labels"])
        for name in ("feat_mean", "feat_std", "label_mean", "label_std",
                     "label_low", "label_high"):
            setattr(tf, name, np.asarray(d[name], dtype=float))
        return tf
