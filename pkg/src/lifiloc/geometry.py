"""Device pose, elemental rotations, and the Lambertian emission order."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass
class Pose:
    """UE position (metres, room-centred x/y) and orientation (degrees).

    yaw rotates about Z, pitch about X, roll about Y; omega is the user's
    facing/movement direction measured from East.
    """

    x: float
    y: float
    z: float
    yaw: float    # [0, 360)
    pitch: float  # [-180, 180)
    roll: float   # [-90, 90)
    omega: float = 0.0

    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def label(self) -> np.ndarray:
        """Six-value label vector (x, y, z, yaw, pitch, roll)."""
        return np.array([self.x, self.y, self.z, self.yaw, self.pitch, self.roll])

    @classmethod
    def from_label(cls, label) -> "Pose":
        x, y, z, a, b, g = (float(v) for v in label)
        return cls(x, y, z, a, b, g)


def wrap_360(angle_deg):
    """Reduce an angle into [0, 360)."""
    return np.mod(angle_deg, 360.0)


def lambertian_order(phi_half_deg: float) -> float:
    """Directivity exponent of an LED with the given half-power semi-angle."""
    if not 0.0 < phi_half_deg < 90.0:
        raise ConfigError("half-power semi-angle must lie in (0, 90) degrees")
    return -1.0 / math.log2(math.cos(math.radians(phi_half_deg)))


def rotation_matrix(yaw_deg: float, pitch_deg: float, roll_deg: float) -> np.ndarray:
    """Composed rotation R = R_yaw(Z) @ R_pitch(X) @ R_roll(Y)."""
    a, b, g = (math.radians(v) for v in (yaw_deg, pitch_deg, roll_deg))
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    cg, sg = math.cos(g), math.sin(g)
    r_yaw = np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
    r_pitch = np.array([[1.0, 0.0, 0.0], [0.0, cb, -sb], [0.0, sb, cb]])
    r_roll = np.array([[cg, 0.0, sg], [0.0, 1.0, 0.0], [-sg, 0.0, cg]])
    return r_yaw @ r_pitch @ r_roll


def led_state(pose: Pose, led_offset, led_normal_standard):
    """World-frame position and unit normal of one device LED.

    position = UE position + R @ offset; normal = R @ standard normal.
    """
    rot = rotation_matrix(pose.yaw, pose.pitch, pose.roll)
    position = pose.position() + rot @ np.asarray(led_offset, dtype=float)
    normal = rot @ np.asarray(led_normal_standard, dtype=float)
    return position, normal


def led_states(pose: Pose, geom) -> tuple[np.ndarray, np.ndarray]:
    """All LED positions/normals of a UEGeometry at one pose, shape (N_t, 3)."""
    rot = rotation_matrix(pose.yaw, pose.pitch, pose.roll)
    positions = pose.position() + geom.led_offsets @ rot.T
    normals = geom.led_normals @ rot.T
    return positions, normals
