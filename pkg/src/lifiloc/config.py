"""Room, device, and sampler configuration.

Everything numeric lives in a flat ``key = value`` text file; the CLI only
carries paths and sizes.  Angles are stored in degrees end to end; radians
appear only inside trigonometric evaluation.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

# Faces are indexed in this fixed order everywhere (reflectivity, tiling).
FACES = ("floor", "ceiling", "wall_xlo", "wall_xhi", "wall_ylo", "wall_yhi")

DEFAULT_ELEMENT_CAP = 20_000

# Measured orientation statistics (degrees): yaw is centred on the movement
# direction minus 90, pitch and roll have fixed means.
YAW_STD = 3.67
PITCH_MEAN, PITCH_STD = 40.78, 2.39
ROLL_MEAN, ROLL_STD = -0.84, 2.21


@dataclass
class RoomConfig:
    """Geometry, AP layout, optics, and noise parameters of one room."""

    l: float = 5.0
    w: float = 5.0
    h: float = 3.0
    ap_positions: np.ndarray = None  # (N_r, 3), metres, room-centred x/y
    ap_normals: np.ndarray = None    # (N_r, 3), unit vectors
    phi_half_deg: float = 60.0       # LED half-power semi-angle
    fov_led_deg: float = 90.0
    fov_pd_deg: float = 90.0
    pd_area_m2: float = 1.0e-4
    responsivity: float = 0.6        # A/W
    conversion_gain: float = None    # lambda in the SNR map; defaults to responsivity
    zeta: np.ndarray = None          # reflectivity per face, order FACES
    element_res_m: float = 0.5
    n0_w_per_hz: float = 1.0e-21
    bandwidth_hz: float = 1.0e7
    element_cap: int = DEFAULT_ELEMENT_CAP

    def __post_init__(self):
        if self.ap_positions is None:
            self.ap_positions = square_lattice_aps(16, self.l, self.w, self.h)
        self.ap_positions = np.asarray(self.ap_positions, dtype=float).reshape(-1, 3)
        if self.ap_normals is None:
            self.ap_normals = np.tile([0.0, 0.0, -1.0], (len(self.ap_positions), 1))
        self.ap_normals = np.asarray(self.ap_normals, dtype=float).reshape(-1, 3)
        if self.conversion_gain is None:
            self.conversion_gain = self.responsivity
        if self.zeta is None:
            self.zeta = np.full(6, 0.7)
        self.zeta = np.atleast_1d(np.asarray(self.zeta, dtype=float))
        if self.zeta.size == 1:
            self.zeta = np.full(6, float(self.zeta[0]))
        self.validate()

    @property
    def n_aps(self) -> int:
        return len(self.ap_positions)

    @property
    def noise_power(self) -> float:
        """Receiver noise variance N0 * B in watts."""
        return self.n0_w_per_hz * self.bandwidth_hz

    def validate(self):
        for name in ("l", "w", "h", "pd_area_m2", "element_res_m", "bandwidth_hz",
                     "n0_w_per_hz", "responsivity", "conversion_gain"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if not 0 < self.phi_half_deg < 90:
            raise ConfigError("phi_half_deg must lie in (0, 90)")
        for name in ("fov_led_deg", "fov_pd_deg"):
            if not 0 < getattr(self, name) <= 90:
                raise ConfigError(f"{name} must lie in (0, 90]")
        if self.zeta.shape != (6,):
            raise ConfigError("zeta needs one value, or one per face (6)")
        if np.any(self.zeta < 0) or np.any(self.zeta >= 1):
            raise ConfigError("reflectivity must satisfy 0 <= zeta < 1")
        if len(self.ap_positions) != len(self.ap_normals):
            raise ConfigError("ap_positions and ap_normals disagree in length")
        norms = np.linalg.norm(self.ap_normals, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ConfigError("ap_normals must be unit length")


@dataclass
class UEGeometry:
    """LED placement on the device, in the device frame (standard position)."""

    led_offsets: np.ndarray = None        # (N_t, 3) metres
    led_normals: np.ndarray = None        # (N_t, 3) unit vectors, standard pose
    device_dims: tuple = (0.14, 0.07, 0.01)

    def __post_init__(self):
        if self.led_offsets is None:
            # single IR-LED on the screen, 6 cm above the device centre
            self.led_offsets = np.array([[0.0, 0.06, 0.0]])
        self.led_offsets = np.asarray(self.led_offsets, dtype=float).reshape(-1, 3)
        if self.led_normals is None:
            self.led_normals = np.tile([0.0, 0.0, 1.0], (len(self.led_offsets), 1))
        self.led_normals = np.asarray(self.led_normals, dtype=float).reshape(-1, 3)
        norms = np.linalg.norm(self.led_normals, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ConfigError("led normals must be unit length")
        half = 0.5 * np.linalg.norm(self.device_dims)
        if np.any(np.linalg.norm(self.led_offsets, axis=1) > half + 0.05):
            raise ConfigError("led offset far outside the device bounding box")

    @property
    def n_leds(self) -> int:
        return len(self.led_offsets)


@dataclass
class OrientationStats:
    """Per-angle truncated-Laplace statistics (degrees)."""

    yaw_std: float = YAW_STD            # mean is movement direction - 90
    pitch_mean: float = PITCH_MEAN
    pitch_std: float = PITCH_STD
    roll_mean: float = ROLL_MEAN
    roll_std: float = ROLL_STD

    def validate(self):
        if min(self.yaw_std, self.pitch_std, self.roll_std) <= 0:
            raise ConfigError("orientation stds must be > 0")


@dataclass
class SamplerConfig:
    """Random pose / power draw parameters."""

    seed: int = 1
    h_device_m: float = 1.5
    p_elec_max_w: float = 0.01
    orientation: OrientationStats = field(default_factory=OrientationStats)

    def validate(self, room: RoomConfig):
        if not 0 <= self.h_device_m <= room.h:
            raise ConfigError("h_device_m must lie in [0, room height]")
        if self.p_elec_max_w <= 0:
            raise ConfigError("p_elec_max_w must be > 0")
        self.orientation.validate()


@dataclass
class SimConfig:
    """Bundle of room, UE geometry, and sampler configuration."""

    room: RoomConfig = field(default_factory=RoomConfig)
    ue: UEGeometry = field(default_factory=UEGeometry)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)

    def validate(self):
        self.room.validate()
        self.sampler.validate(self.room)

    def room_hash(self) -> str:
        """Hash of everything that affects channel/SNR values (not the seed)."""
        r = self.room
        parts = [
            r.l, r.w, r.h, r.phi_half_deg, r.fov_led_deg, r.fov_pd_deg,
            r.pd_area_m2, r.responsivity, r.conversion_gain, r.element_res_m,
            r.n0_w_per_hz, r.bandwidth_hz,
        ]
        blob = ",".join(repr(float(p)) for p in parts)
        blob += "|" + ",".join(repr(float(v)) for v in r.zeta)
        blob += "|" + ",".join(repr(float(v)) for v in r.ap_positions.ravel())
        blob += "|" + ",".join(repr(float(v)) for v in r.ap_normals.ravel())
        blob += "|" + ",".join(repr(float(v)) for v in self.ue.led_offsets.ravel())
        blob += "|" + ",".join(repr(float(v)) for v in self.ue.led_normals.ravel())
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def square_lattice_aps(n_aps: int, l: float, w: float, h: float) -> np.ndarray:
    """Place n_aps APs on the vertexes of a square lattice over the ceiling."""
    side = math.isqrt(n_aps)
    if side * side != n_aps:
        raise ConfigError("auto AP layout needs a perfect-square n_aps; "
                          "give ap_positions explicitly otherwise")
    xs = (np.arange(side) + 0.5) * l / side - l / 2
    ys = (np.arange(side) + 0.5) * w / side - w / 2
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel(), np.full(n_aps, h)])


def _parse_vector_list(text: str) -> np.ndarray:
    rows = [r for r in text.split(";") if r.strip()]
    return np.array([[float(v) for v in row.split(",")] for row in rows])


def load_config(path: str) -> SimConfig:
    """Read a flat key-value config file; unknown keys are an error."""
    raw = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = (s.strip() for s in line.split("=", 1))
                raw[key.lower()] = value
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> SimConfig:
    raw = dict(raw)

    def pop_float(key, default):
        return float(raw.pop(key)) if key in raw else default

    def pop_int(key, default):
        return int(raw.pop(key)) if key in raw else default

    l = pop_float("room_l", 5.0)
    w = pop_float("room_w", 5.0)
    h = pop_float("room_h", 3.0)

    if "ap_positions" in raw:
        ap_positions = _parse_vector_list(raw.pop("ap_positions"))
        raw.pop("n_aps", None)
        raw.pop("ap_grid", None)
    else:
        n_aps = pop_int("n_aps", pop_int("ap_grid", 16))
        ap_positions = square_lattice_aps(n_aps, l, w, h)
    ap_normals = _parse_vector_list(raw.pop("ap_normals")) if "ap_normals" in raw else None

    zeta_text = raw.pop("zeta", "0.7")
    zeta = np.array([float(v) for v in zeta_text.split(",")])

    try:
        room = RoomConfig(
            l=l, w=w, h=h,
            ap_positions=ap_positions, ap_normals=ap_normals,
            phi_half_deg=pop_float("phi_half_deg", 60.0),
            fov_led_deg=pop_float("fov_led_deg", 90.0),
            fov_pd_deg=pop_float("fov_pd_deg", 90.0),
            pd_area_m2=pop_float("pd_area_m2", 1.0e-4),
            responsivity=pop_float("responsivity", 0.6),
            conversion_gain=pop_float("conversion_gain", None),
            zeta=zeta,
            element_res_m=pop_float("element_res_m", 0.5),
            n0_w_per_hz=pop_float("n0_w_per_hz", 1.0e-21),
            bandwidth_hz=pop_float("bandwidth_hz", 1.0e7),
            element_cap=pop_int("element_cap", DEFAULT_ELEMENT_CAP),
        )
        if "ue_led_offset_m" in raw:
            offsets = _parse_vector_list(raw.pop("ue_led_offset_m"))
        else:
            offsets = None
        ue = UEGeometry(led_offsets=offsets)
        sampler = SamplerConfig(
            seed=pop_int("seed", 1),
            h_device_m=pop_float("h_device_m", 1.5),
            p_elec_max_w=pop_float("p_elec_max_w", 0.01),
            orientation=OrientationStats(
                yaw_std=pop_float("yaw_std_deg", YAW_STD),
                pitch_mean=pop_float("pitch_mean_deg", PITCH_MEAN),
                pitch_std=pop_float("pitch_std_deg", PITCH_STD),
                roll_mean=pop_float("roll_mean_deg", ROLL_MEAN),
                roll_std=pop_float("roll_std_deg", ROLL_STD),
            ),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc

    if raw:
        raise ConfigError(f"unknown config keys: {sorted(raw)}")
    cfg = SimConfig(room=room, ue=ue, sampler=sampler)
    cfg.validate()
    return cfg


def write_config(cfg: SimConfig, path: str):
    """Serialize a SimConfig back into the flat key-value format."""
    r, s = cfg.room, cfg.sampler

    def f(v):
        return repr(float(v))

    def vectors(rows):
        return "; ".join(",".join(f(v) for v in row) for row in rows)

    lines = [
        f"room_l = {f(r.l)}",
        f"room_w = {f(r.w)}",
        f"room_h = {f(r.h)}",
        f"ap_positions = {vectors(r.ap_positions)}",
        f"ap_normals = {vectors(r.ap_normals)}",
        f"phi_half_deg = {f(r.phi_half_deg)}",
        f"fov_led_deg = {f(r.fov_led_deg)}",
        f"fov_pd_deg = {f(r.fov_pd_deg)}",
        f"pd_area_m2 = {f(r.pd_area_m2)}",
        f"responsivity = {f(r.responsivity)}",
        f"conversion_gain = {f(r.conversion_gain)}",
        "zeta = " + ",".join(f(v) for v in r.zeta),
        f"element_res_m = {f(r.element_res_m)}",
        f"n0_w_per_hz = {f(r.n0_w_per_hz)}",
        f"bandwidth_hz = {f(r.bandwidth_hz)}",
        f"element_cap = {r.element_cap}",
        f"ue_led_offset_m = {vectors(cfg.ue.led_offsets)}",
        f"seed = {s.seed}",
        f"h_device_m = {f(s.h_device_m)}",
        f"p_elec_max_w = {f(s.p_elec_max_w)}",
        f"yaw_std_deg = {f(s.orientation.yaw_std)}",
        f"pitch_mean_deg = {f(s.orientation.pitch_mean)}",
        f"pitch_std_deg = {f(s.orientation.pitch_std)}",
        f"roll_mean_deg = {f(s.orientation.roll_mean)}",
        f"roll_std_deg = {f(s.orientation.roll_std)}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
