import math

import numpy as np
import pytest

from lifiloc.channel import (FULL, LOS, ChannelModel, los_gain, pam_levels,
                             pam_power, snr_vector)
from lifiloc.config import RoomConfig, SimConfig
from lifiloc.errors import DegenerateGeometryError
from lifiloc.geometry import Pose


def los_oracle(tx_pos, tx_normal, m, rx_pos, rx_normal, area):
    """Direct scalar evaluation of the Lambertian LOS formula (90-deg FOVs)."""
    d_vec = np.subtract(rx_pos, tx_pos)
    d = math.sqrt(d_vec @ d_vec)
    cos_phi = (np.asarray(tx_normal) @ d_vec) / d
    cos_psi = -(np.asarray(rx_normal) @ d_vec) / d
    if cos_phi < 0 or cos_psi < 0:
        return 0.0
    return (m + 1) * area / (2 * math.pi * d * d) * cos_phi**m * cos_psi


class TestLosGain:
    def test_aligned_pair(self):
        got = los_gain((0, 0, 1.5), (0, 0, 1), 1.0, (0, 0, 3), (0, 0, -1), 1e-4)
        oracle = los_oracle((0, 0, 1.5), (0, 0, 1), 1.0, (0, 0, 3), (0, 0, -1),
                            1e-4)
        assert oracle == pytest.approx(2e-4 / (2 * math.pi * 2.25), rel=1e-12)
        assert got == pytest.approx(1.41471e-5, rel=1e-4)
        assert got == pytest.approx(oracle, rel=1e-12)

    def test_offset_pair_45_degrees(self):
        got = los_gain((1.5, 0, 1.5), (0, 0, 1), 1.0, (0, 0, 3), (0, 0, -1), 1e-4)
        oracle = los_oracle((1.5, 0, 1.5), (0, 0, 1), 1.0, (0, 0, 3), (0, 0, -1),
                            1e-4)
        assert got == pytest.approx(3.5368e-6, rel=1e-4)
        assert got == pytest.approx(oracle, rel=1e-12)

    def test_facing_away_is_zero(self):
        # LED directly beneath the AP but pointing at the floor
        assert los_gain((0, 0, 1.5), (0, 0, -1), 1.0, (0, 0, 3), (0, 0, -1),
                        1e-4) == 0.0

    def test_outside_fov_is_zero(self):
        # 45-degree radiance angle, 30-degree transmitter cone
        assert los_gain((1.5, 0, 1.5), (0, 0, 1), 1.0, (0, 0, 3), (0, 0, -1),
                        1e-4, tx_fov_deg=30.0) == 0.0

    def test_degenerate_distance_raises(self):
        with pytest.raises(DegenerateGeometryError):
            los_gain((0, 0, 1), (0, 0, 1), 1.0, (0, 0, 1), (0, 0, -1), 1e-4)

    def test_reciprocity_of_unit_order_kernel(self):
        # m = 1 both ways: swapping roles (and the area factor) is symmetric
        rng = np.random.default_rng(5)
        for _ in range(50):
            p1, p2 = rng.uniform(-2, 2, size=(2, 3))
            n1, n2 = rng.normal(size=(2, 3))
            n1 /= np.linalg.norm(n1)
            n2 /= np.linalg.norm(n2)
            area = 0.07
            fwd = los_gain(p1, n1, 1.0, p2, -n2, area)
            # reverse: emit from p2 along -n2's opposite ... receive at p1
            rev = los_gain(p2, -n2, 1.0, p1, n1, area)
            assert fwd == pytest.approx(rev, rel=1e-12, abs=1e-300)


class TestChannelMatrix:
    def test_los_only_can_be_all_zero(self, sim_config):
        model = ChannelModel(sim_config)
        pose = Pose(0.0, 0.0, 1.0, 0.0, 180.0, 0.0)  # screen facing the floor
        h = model.channel_matrix(pose, LOS)
        assert h.shape == (16, 1)
        assert np.all(h == 0.0)

    def test_full_dominates_los_elementwise(self, channel_model):
        rng = np.random.default_rng(11)
        for _ in range(10):
            pose = Pose(*rng.uniform([-2, -2, 0], [2, 2, 1.5]),
                        rng.uniform(0, 360), rng.uniform(-60, 60),
                        rng.uniform(-45, 45))
            h_los = channel_model.channel_matrix(pose, LOS)
            h_full = channel_model.channel_matrix(pose, FULL)
            assert np.all(h_full >= h_los)
            assert np.all(np.isfinite(h_full)) and np.all(h_full >= 0)

    def test_nearest_ap_dominates_when_aligned(self, sim_config):
        model = ChannelModel(sim_config)
        ap0 = sim_config.room.ap_positions[0]
        pose = Pose(ap0[0], ap0[1] - 0.06, 1.0, 0.0, 0.0, 0.0)  # LED under AP 1
        h = model.los_matrix(pose)[:, 0]
        oracle = [los_oracle(
            (ap0[0], ap0[1], 1.0), (0, 0, 1), model.led_m,
            sim_config.room.ap_positions[i], sim_config.room.ap_normals[i],
            sim_config.room.pd_area_m2) for i in range(16)]
        assert np.argmax(h) == 0 == np.argmax(oracle)
        np.testing.assert_allclose(h, oracle, rtol=1e-12)

    def test_nlos_positive_inside_room(self, channel_model):
        pose = Pose(1.2, -0.7, 0.9, 123.0, 41.0, -2.0)
        assert np.all(channel_model.nlos_matrix(pose) > 0.0)


class TestSnrVector:
    def test_single_entry_example(self):
        room = RoomConfig()  # lambda = 0.6, N0*B = 1e-14 W
        rho = snr_vector(np.array([[1.41471e-5]]), 0.01, room)
        assert rho[0] == pytest.approx((0.6 * 1.41471e-5) ** 2 * 0.01 / 1e-14,
                                       rel=1e-12)
        assert rho[0] == pytest.approx(72.05, rel=1e-3)
        assert 10 * np.log10(rho[0]) == pytest.approx(18.58, abs=5e-3)

    def test_zero_power_zero_vector(self):
        room = RoomConfig()
        h = np.full((16, 1), 1e-5)
        assert np.all(snr_vector(h, 0.0, room) == 0.0)

    def test_linear_in_power(self):
        room = RoomConfig()
        h = np.random.default_rng(0).uniform(0, 1e-5, size=(16, 1))
        base = snr_vector(h, 0.002, room)
        np.testing.assert_allclose(snr_vector(h, 0.006, room), 3 * base,
                                   rtol=1e-12)

    def test_gain_power_rescaling_invariance(self):
        h = np.random.default_rng(1).uniform(0, 1e-5, size=(16, 1))
        c = 3.7
        room_a = RoomConfig(conversion_gain=0.6)
        room_b = RoomConfig(conversion_gain=0.6 * c)
        a = snr_vector(h, 0.01, room_a)
        b = snr_vector(h, 0.01 / c**2, room_b)
        np.testing.assert_allclose(a, b, rtol=1e-12)
        assert np.argmax(a) == np.argmax(b)


class TestPam:
    def test_binary_levels(self):
        levels = pam_levels(2, 1.0)
        np.testing.assert_allclose(levels, [-1 / 3, 1 / 3], rtol=1e-15)
        # empirical mean square of the levels equals the power formula
        assert np.mean(levels**2) == pytest.approx(pam_power(2, 1.0), rel=1e-15)
        assert pam_power(2, 1.0) == pytest.approx(1 / 9, rel=1e-15)

    def test_quaternary_levels(self):
        levels = pam_levels(4, 1.0)
        np.testing.assert_allclose(levels, [-0.6, -0.2, 0.2, 0.6], atol=1e-15)
        assert np.mean(levels**2) == pytest.approx(pam_power(4, 1.0), rel=1e-15)
        assert pam_power(4, 1.0) == pytest.approx(0.2, rel=1e-15)

    @pytest.mark.parametrize("order", [2, 3, 4, 8, 16])
    def test_levels_are_zero_mean(self, order):
        assert pam_levels(order, 2.5).sum() == pytest.approx(0.0, abs=1e-12)
