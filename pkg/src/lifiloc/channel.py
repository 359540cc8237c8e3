"""Uplink/downlink optical channel gains and received SNR.

The generalized Lambertian line-of-sight gain between an emitter of order m
and a bare detector of area A at distance d is

    h = (m + 1) A / (2 pi d^2) * cos^m(phi) * cos(psi)

inside both acceptance cones and zero outside, with phi the radiance angle at
the emitter and psi the incidence angle at the detector.  Diffuse components
go through the radiosity cache; the SNR at AP i for electrical signal power
P is

    rho_i = (lambda * sum_j H_ij)^2 * P / (N0 * B).
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .config import RoomConfig, SimConfig, UEGeometry
from .geometry import Pose, lambertian_order, led_states
from .radiosity import RadiosityCache, build_radiosity_cache

LOS = "los"
FULL = "los+nlos"
CHANNEL_FLAGS = (LOS, FULL)


def _min_cos(fov_deg: float) -> float:
    # cos is noisy at exactly 90 deg; clamp so a 90-deg cone accepts cos >= 0
    return max(math.cos(math.radians(fov_deg)), 0.0)


def los_gain(tx_pos, tx_normal, tx_m, rx_pos, rx_normal, rx_area,
             tx_fov_deg=90.0, rx_fov_deg=90.0) -> float:
    """Line-of-sight gain for a single emitter/detector pair."""
    gains = kernels.point_to_many(
        np.asarray(tx_pos, dtype=float), np.asarray(tx_normal, dtype=float),
        float(tx_m), _min_cos(tx_fov_deg),
        np.asarray(rx_pos, dtype=float).reshape(1, 3),
        np.asarray(rx_normal, dtype=float).reshape(1, 3),
        np.asarray([rx_area], dtype=float), _min_cos(rx_fov_deg))
    return float(gains[0])


def emitter_to_elements(cache: RadiosityCache, tx_pos, tx_normal, tx_m,
                        tx_fov_deg=90.0) -> np.ndarray:
    """Transfer vector t: emitter to every surface element (element areas).

    A patch exactly hosting the emitter contributes zero (in-plane limit).
    """
    return kernels.point_to_many(
        np.asarray(tx_pos, dtype=float), np.asarray(tx_normal, dtype=float),
        float(tx_m), _min_cos(tx_fov_deg),
        cache.element_centers, cache.element_normals, cache.element_areas, 0.0,
        zero_degenerate=True)


def elements_to_detector(cache: RadiosityCache, rx_pos, rx_normal, rx_area,
                         rx_fov_deg=90.0) -> np.ndarray:
    """Transfer vector r: every surface element (m = 1) to one detector.

    A patch exactly hosting the detector contributes zero (in-plane limit).
    """
    return kernels.many_to_point(
        cache.element_centers, cache.element_normals, 1.0, 0.0,
        np.asarray(rx_pos, dtype=float), np.asarray(rx_normal, dtype=float),
        float(rx_area), _min_cos(rx_fov_deg), zero_degenerate=True)


def nlos_gain(cache: RadiosityCache, tx_pos, tx_normal, tx_m, rx_pos, rx_normal,
              rx_area, tx_fov_deg=90.0, rx_fov_deg=90.0) -> float:
    """Diffuse gain including every reflection order."""
    t = emitter_to_elements(cache, tx_pos, tx_normal, tx_m, tx_fov_deg)
    r = elements_to_detector(cache, rx_pos, rx_normal, rx_area, rx_fov_deg)
    return cache.diffuse_gain(r, t)


class ChannelModel:
    """Uplink channel evaluator for one room + UE geometry.

    The radiosity cache and the per-AP receiver rows are built lazily on the
    first diffuse query and reused; everything here is immutable afterwards,
    so one instance can serve many worker threads.
    """

    def __init__(self, config: SimConfig, cache: RadiosityCache | None = None):
        self.config = config
        self.room = config.room
        self.ue = config.ue
        self.led_m = lambertian_order(self.room.phi_half_deg)
        self._cache = cache
        self._ap_rows = None  # (N_r, K): per-AP diffuse receiver operators

    @property
    def cache(self) -> RadiosityCache:
        if self._cache is None:
            self._cache = build_radiosity_cache(self.room)
        return self._cache

    def _receiver_rows(self) -> np.ndarray:
        if self._ap_rows is None:
            cache = self.cache
            rows = np.empty((self.room.n_aps, cache.n_elements))
            for i in range(self.room.n_aps):
                r = elements_to_detector(
                    cache, self.room.ap_positions[i], self.room.ap_normals[i],
                    self.room.pd_area_m2, self.room.fov_pd_deg)
                rows[i] = cache.receiver_row(r)
            self._ap_rows = rows
        return self._ap_rows

    def los_matrix(self, pose: Pose) -> np.ndarray:
        """(N_r, N_t) line-of-sight gains at one pose."""
        positions, normals = led_states(pose, self.ue)
        room = self.room
        h = np.empty((room.n_aps, self.ue.n_leds))
        for j in range(self.ue.n_leds):
            h[:, j] = kernels.point_to_many(
                positions[j], normals[j], self.led_m,
                _min_cos(room.fov_led_deg), room.ap_positions, room.ap_normals,
                np.full(room.n_aps, room.pd_area_m2), _min_cos(room.fov_pd_deg))
        return h

    def nlos_matrix(self, pose: Pose) -> np.ndarray:
        """(N_r, N_t) diffuse gains at one pose (all reflection orders)."""
        positions, normals = led_states(pose, self.ue)
        rows = self._receiver_rows()
        h = np.empty((self.room.n_aps, self.ue.n_leds))
        for j in range(self.ue.n_leds):
            t = emitter_to_elements(self.cache, positions[j], normals[j],
                                    self.led_m, self.room.fov_led_deg)
            h[:, j] = rows @ t
        return h

    def channel_matrix(self, pose: Pose, flag: str = FULL) -> np.ndarray:
        if flag not in CHANNEL_FLAGS:
            raise ValueError(f"channel flag must be one of {CHANNEL_FLAGS}")
        h = self.los_matrix(pose)
        if flag == FULL:
            h = h + self.nlos_matrix(pose)
        return h

    def snr_vector(self, h: np.ndarray, p_elec: float) -> np.ndarray:
        return snr_vector(h, p_elec, self.room)


def channel_matrix(config: SimConfig, pose: Pose, flag: str = FULL,
                   cache: RadiosityCache | None = None) -> np.ndarray:
    """One-shot channel matrix; prefer ChannelModel for repeated queries."""
    return ChannelModel(config, cache=cache).channel_matrix(pose, flag)


def snr_vector(h: np.ndarray, p_elec: float, room: RoomConfig) -> np.ndarray:
    """Received SNR (linear) per AP for summed-LED transmission."""
    if p_elec < 0:
        raise ValueError("electrical power must be >= 0")
    summed = np.asarray(h).sum(axis=1)
    return (room.conversion_gain * summed) ** 2 * p_elec / room.noise_power


def pam_levels(order: int, i_dc: float) -> np.ndarray:
    """Zero-mean M-PAM drive-current levels around the bias i_dc."""
    if order < 2:
        raise ValueError("PAM order must be >= 2")
    if i_dc <= 0:
        raise ValueError("bias current must be > 0")
    m = np.arange(1, order + 1)
    return (2 * m - (order + 1)) / (order + 1) * i_dc


def pam_power(order: int, i_dc: float) -> float:
    """Electrical power of a uniformly drawn M-PAM symbol."""
    if order < 2:
        raise ValueError("PAM order must be >= 2")
    return i_dc**2 / 3.0 * (order - 1) / (order + 1)
