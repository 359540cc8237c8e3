import numpy as np
import pytest

from lifiloc.config import (RoomConfig, SimConfig, load_config,
                            square_lattice_aps, write_config)
from lifiloc.errors import ConfigError


class TestDefaults:
    def test_default_room_matches_reference_setup(self):
        cfg = SimConfig()
        room = cfg.room
        assert (room.l, room.w, room.h) == (5.0, 5.0, 3.0)
        assert room.n_aps == 16
        assert room.phi_half_deg == 60.0
        assert room.pd_area_m2 == 1e-4
        assert room.responsivity == 0.6
        assert room.conversion_gain == 0.6
        assert room.noise_power == pytest.approx(1e-14)
        assert np.all(room.zeta == 0.7)
        assert cfg.sampler.h_device_m == 1.5
        assert cfg.sampler.p_elec_max_w == 0.01

    def test_ap_lattice_geometry(self):
        aps = square_lattice_aps(16, 5.0, 5.0, 3.0)
        assert aps.shape == (16, 3)
        assert np.all(aps[:, 2] == 3.0)
        xs = np.unique(aps[:, 0])
        np.testing.assert_allclose(xs, [-1.875, -0.625, 0.625, 1.875])

    def test_ue_geometry_default_led(self):
        cfg = SimConfig()
        np.testing.assert_array_equal(cfg.ue.led_offsets, [[0.0, 0.06, 0.0]])
        np.testing.assert_array_equal(cfg.ue.led_normals, [[0.0, 0.0, 1.0]])


class TestValidation:
    def test_reflectivity_must_stay_below_one(self):
        with pytest.raises(ConfigError):
            RoomConfig(zeta=1.0)

    def test_bad_fov(self):
        with pytest.raises(ConfigError):
            RoomConfig(fov_pd_deg=120.0)

    def test_non_square_ap_count(self):
        with pytest.raises(ConfigError):
            square_lattice_aps(7, 5, 5, 3)


class TestFileRoundTrip:
    def test_write_then_load_preserves_everything(self, tmp_path):
        cfg = SimConfig()
        path = tmp_path / "room.cfg"
        write_config(cfg, path)
        loaded = load_config(path)
        assert loaded.room_hash() == cfg.room_hash()
        assert loaded.sampler.seed == cfg.sampler.seed
        np.testing.assert_array_equal(loaded.room.ap_positions,
                                      cfg.room.ap_positions)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "room.cfg"
        path.write_text("room_l = 5\nbogus_key = 1\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_file_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.cfg")

    def test_comments_and_defaults(self, tmp_path):
        path = tmp_path / "room.cfg"
        path.write_text("# just a seed override\nseed = 99\n")
        cfg = load_config(path)
        assert cfg.sampler.seed == 99
        assert cfg.room.l == 5.0

    def test_hash_tracks_room_changes_only(self, tmp_path):
        base = SimConfig()
        seeded = SimConfig()
        seeded.sampler.seed = 12345
        assert base.room_hash() == seeded.room_hash()
        bigger = SimConfig(room=RoomConfig(l=6.0))
        assert bigger.room_hash() != base.room_hash()
