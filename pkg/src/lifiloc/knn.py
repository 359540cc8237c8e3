"""K-nearest-neighbour regression baseline over transformed fingerprints.

Fitting just stores the (transformed) training features and labels.  A
query averages the labels of the k nearest stored points in Euclidean
distance: plain means for position/pitch/roll, a circular (unit-vector)
mean for the yaw angle.  Ties in distance are broken by stored index order.
The scan is brute force; at fingerprint sizes (<= 1e6 x 16) that is both
tractable and the honest way to expose the query-time growth with N.
"""

from __future__ import annotations

import numpy as np

from .geometry import wrap_360

DEFAULT_K = 5
K_GRID = (1, 3, 5, 9, 15)


def nearest_indices(stored: np.ndarray, queries: np.ndarray, k: int,
                    chunk: int = 256) -> np.ndarray:
    """Indices of the k closest stored rows per query, ties by lowest index."""
    n = len(stored)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}]")
    sq_stored = np.einsum("ij,ij->i", stored, stored)
    out = np.empty((len(queries), k), dtype=np.int64)
    for start in range(0, len(queries), chunk):
        q = queries[start:start + chunk]
        d2 = sq_stored[None, :] - 2.0 * (q @ stored.T)
        d2 += np.einsum("ij,ij->i", q, q)[:, None]
        if k == n:
            sel = np.broadcast_to(np.arange(n), (len(q), n)).copy()
        else:
            sel = np.argpartition(d2, k - 1, axis=1)[:, :k]
        rows = np.arange(len(q))[:, None]
        # order the selected neighbours by (distance, index); this also
        # repairs boundary ties that argpartition resolved arbitrarily
        order = np.lexsort((sel, np.take_along_axis(d2, sel, axis=1)), axis=1)
        sel = np.take_along_axis(sel, order, axis=1)
        tau = d2[rows[:, 0], sel[:, -1]]
        suspect = np.where((d2 <= tau[:, None]).sum(axis=1) > k)[0]
        for i in suspect:
            full = np.lexsort((np.arange(n), d2[i]))[:k]
            sel[i] = full
        out[start:start + chunk] = sel
    return out


def average_labels(labels: np.ndarray, neighbour_idx: np.ndarray) -> np.ndarray:
    """Uniform neighbour average; yaw (column 3) averaged circularly."""
    picked = labels[neighbour_idx]  # (Q, k, 6)
    mean = picked.mean(axis=1)
    yaw = np.radians(picked[:, :, 3])
    mean[:, 3] = wrap_360(np.degrees(
        np.arctan2(np.sin(yaw).mean(axis=1), np.cos(yaw).mean(axis=1))))
    return mean


def select_k(stored, labels, val_features, val_labels, grid=K_GRID) -> int:
    """Pick k from the grid by mean 3-D position error on the validation split."""
    best_k, best_err = None, np.inf
    for k in grid:
        if k > len(stored):
            continue
        idx = nearest_indices(stored, val_features, k)
        pred = average_labels(labels, idx)
        err = float(np.linalg.norm(pred[:, :3] - val_labels[:, :3], axis=1).mean())
        if err < best_err:
            best_k, best_err = k, err
    return best_k if best_k is not None else 1
