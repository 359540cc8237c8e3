"""NumPy implementation of the pairwise Lambertian-gain kernels.

These are the hot loops of the simulator: LED-to-surface transfer vectors,
surface-to-PD transfer vectors, and the K x K surface coupling matrix of the
reflection solver.  A compiled twin lives in ``_ckernels.pyx``; both must
return bit-compatible results (same formula, same order of operations per
element), and ``lifiloc.kernels`` picks one at import time.
"""

import numpy as np

from .errors import DegenerateGeometryError

DEGENERATE_DISTANCE = 1e-9

BACKEND = "numpy"


def point_to_many(tx_pos, tx_normal, m, min_cos_tx, rx_pos, rx_normals, rx_areas,
                  min_cos_rx, zero_degenerate=False):
    """Gains from one emitter to many receivers, (K,) array.

    gain_k = (m+1) * area_k / (2 pi d^2) * cos_phi^m * cos_psi inside both
    acceptance cones (cosine thresholds), else 0.  A receiver closer than the
    degenerate-distance guard raises, unless zero_degenerate is set: then it
    contributes 0, the in-plane limit for a surface patch hosting the point
    (the convention used for element transfer vectors).
    """
    tx_pos = np.asarray(tx_pos, dtype=float)
    rx_pos = np.asarray(rx_pos, dtype=float)
    diff = rx_pos - tx_pos[None, :]
    d2 = np.einsum("kj,kj->k", diff, diff)
    degenerate = d2 < DEGENERATE_DISTANCE**2
    if np.any(degenerate):
        if not zero_degenerate:
            raise DegenerateGeometryError("emitter coincides with a receiver")
        d2 = np.where(degenerate, 1.0, d2)
    d = np.sqrt(d2)
    cos_phi = (diff @ np.asarray(tx_normal, dtype=float)) / d
    cos_psi = -np.einsum("kj,kj->k", diff, np.asarray(rx_normals, dtype=float)) / d
    visible = (cos_phi >= min_cos_tx) & (cos_psi >= min_cos_rx) & ~degenerate
    cos_phi = np.where(visible, cos_phi, 0.0)
    gains = (m + 1.0) * rx_areas / (2.0 * np.pi * d2) * cos_phi**m * cos_psi
    return np.where(visible, gains, 0.0)


def many_to_point(tx_pos, tx_normals, m, min_cos_tx, rx_pos, rx_normal, rx_area,
                  min_cos_rx, zero_degenerate=False):
    """Gains from many emitters to one receiver, (K,) array."""
    tx_pos = np.asarray(tx_pos, dtype=float)
    rx_pos = np.asarray(rx_pos, dtype=float)
    diff = rx_pos[None, :] - tx_pos
    d2 = np.einsum("kj,kj->k", diff, diff)
    degenerate = d2 < DEGENERATE_DISTANCE**2
    if np.any(degenerate):
        if not zero_degenerate:
            raise DegenerateGeometryError("a receiver coincides with an emitter")
        d2 = np.where(degenerate, 1.0, d2)
    d = np.sqrt(d2)
    cos_phi = np.einsum("kj,kj->k", diff, np.asarray(tx_normals, dtype=float)) / d
    cos_psi = -(diff @ np.asarray(rx_normal, dtype=float)) / d
    visible = (cos_phi >= min_cos_tx) & (cos_psi >= min_cos_rx) & ~degenerate
    cos_phi = np.where(visible, cos_phi, 0.0)
    gains = (m + 1.0) * rx_area / (2.0 * np.pi * d2) * cos_phi**m * cos_psi
    return np.where(visible, gains, 0.0)


def surface_coupling(centers, normals, areas, block=256):
    """K x K transfer matrix E between surface elements.

    E[k, l] is the gain from element l to element k: both sides Lambertian
    with m = 1 and a 90-degree acceptance cone, receiver area areas[k].
    Entries vanish when either element lies behind the other's plane.
    """
    k_total = len(centers)
    out = np.empty((k_total, k_total))
    for start in range(0, k_total, block):
        stop = min(start + block, k_total)
        diff = centers[start:stop, None, :] - centers[None, :, :]
        d2 = np.einsum("klj,klj->kl", diff, diff)
        np.fill_diagonal(d2[:, start:stop], 1.0)  # excluded below
        cos_emit = np.einsum("lj,klj->kl", normals, diff) / np.sqrt(d2)
        cos_recv = -np.einsum("kj,klj->kl", normals[start:stop], diff) / np.sqrt(d2)
        vis = (cos_emit > 0.0) & (cos_recv > 0.0)
        blockmat = np.where(
            vis, areas[start:stop, None] / np.pi * cos_emit * cos_recv / d2, 0.0)
        np.fill_diagonal(blockmat[:, start:stop], 0.0)
        out[start:stop] = blockmat
    return out
