"""Random UE poses and transmit powers.

Positions are uniform over the room (z up to the device-height ceiling),
the facing direction is uniform on [0, 360), and the three orientation
angles follow truncated Laplace laws around their measured statistics, the
yaw centred on facing-minus-90.

All draws come from numpy's PCG64.  Dataset generation gives record n its
own independent stream seeded by SeedSequence([seed, n]) (identity string
RNG_ID), so files are reproducible bit for bit regardless of chunking or
worker count.
"""

from __future__ import annotations

import math

import numpy as np

from .config import SimConfig
from .errors import NumericsError
from .geometry import Pose, wrap_360

RNG_ID = "pcg64-seedseq-v1"

MIN_ACCEPTANCE = 1e-6


def record_rng(seed: int, index: int) -> np.random.Generator:
    """Independent per-record generator (see module docstring)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def _laplace_cdf(x, mean, scale):
    z = (x - mean) / scale
    return np.where(z < 0, 0.5 * np.exp(z), 1.0 - 0.5 * np.exp(-z))


def truncated_laplace(rng, mean, std, lo, hi, size=None):
    """Rejection-sample a Laplace(mean, std/sqrt(2)) restricted to [lo, hi]."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    if std <= 0:
        raise ValueError("std must be > 0")
    scale = std / math.sqrt(2.0)
    acceptance = float(_laplace_cdf(hi, mean, scale) - _laplace_cdf(lo, mean, scale))
    if acceptance < MIN_ACCEPTANCE:
        raise NumericsError(
            f"truncated-Laplace acceptance {acceptance:.2e} below {MIN_ACCEPTANCE}; "
            "mean lies far outside [lo, hi]")

    if size is None:
        while True:
            x = rng.laplace(mean, scale)
            if lo <= x <= hi:
                return float(x)

    out = np.empty(int(size))
    filled = 0
    while filled < out.size:
        want = out.size - filled
        draw = rng.laplace(mean, scale, size=max(16, int(want / acceptance * 1.1)))
        keep = draw[(draw >= lo) & (draw <= hi)][:want]
        out[filled:filled + keep.size] = keep
        filled += keep.size
    return out


class PoseSampler:
    """Draws poses and powers per the configured statistics."""

    def __init__(self, config: SimConfig):
        self.room = config.room
        self.sampler = config.sampler
        self.stats = config.sampler.orientation

    def sample_position(self, rng) -> tuple[float, float, float]:
        x = rng.uniform(-self.room.l / 2, self.room.l / 2)
        y = rng.uniform(-self.room.w / 2, self.room.w / 2)
        z = rng.uniform(0.0, self.sampler.h_device_m)
        return x, y, z

    def sample_pose(self, rng) -> Pose:
        x, y, z = self.sample_position(rng)
        omega = rng.uniform(0.0, 360.0)
        st = self.stats
        # yaw: Laplace around omega-90 on a +-180 window, wrapped into [0, 360)
        mu = omega - 90.0
        yaw = wrap_360(truncated_laplace(rng, mu, st.yaw_std, mu - 180.0, mu + 180.0))
        pitch = truncated_laplace(rng, st.pitch_mean, st.pitch_std, -180.0, 180.0)
        roll = truncated_laplace(rng, st.roll_mean, st.roll_std, -90.0, 90.0)
        return Pose(x=x, y=y, z=z, yaw=float(yaw), pitch=pitch, roll=roll,
                    omega=omega)

    def sample_power(self, rng) -> float:
        return rng.uniform(0.0, self.sampler.p_elec_max_w)
