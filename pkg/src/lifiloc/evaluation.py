"""Estimation metrics, CDF export, latency measurement, and the OOK BER study.

Positioning error is the 3-D Euclidean distance in centimetres; yaw error is
the circular distance, pitch/roll are plain absolute differences.  The
''precision'' of an error set is its nearest-rank 90th percentile: the value
only 10% of errors exceed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from . import kernels
from .channel import elements_to_detector, emitter_to_elements
from .config import SimConfig
from .errors import NumericsError
from .geometry import lambertian_order, led_states, Pose
from .radiosity import build_radiosity_cache


def position_error_cm(true_labels, est_labels) -> np.ndarray:
    true_labels, est_labels = np.atleast_2d(true_labels), np.atleast_2d(est_labels)
    return 100.0 * np.linalg.norm(true_labels[:, :3] - est_labels[:, :3], axis=1)


def angle_error_deg(true_labels, est_labels, which: str) -> np.ndarray:
    col = {"yaw": 3, "pitch": 4, "roll": 5}[which]
    true_labels, est_labels = np.atleast_2d(true_labels), np.atleast_2d(est_labels)
    delta = np.abs(true_labels[:, col] - est_labels[:, col])
    if which == "yaw":
        delta = np.minimum(delta, 360.0 - delta)
    return delta


def precision90(errors) -> float:
    """Nearest-rank 90th percentile of an error sample."""
    errors = np.sort(np.asarray(errors, dtype=float))
    if errors.size == 0:
        raise ValueError("empty error list")
    rank = math.ceil(0.9 * errors.size)
    return float(errors[rank - 1])


def summarize(errors) -> tuple[float, float]:
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("empty error list")
    return float(errors.mean()), precision90(errors)


def cdf_points(errors) -> tuple[np.ndarray, np.ndarray]:
    """(sorted errors, empirical CDF ordinates ending at 1)."""
    errors = np.sort(np.asarray(errors, dtype=float))
    if errors.size == 0:
        raise ValueError("empty error list")
    return errors, np.arange(1, errors.size + 1) / errors.size


def write_cdf_csv(errors, path, value_name="error_cm"):
    values, cdf = cdf_points(errors)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{value_name},cdf\n")
        for v, c in zip(values, cdf):
            fh.write(f"{v:.10g},{c:.10g}\n")


@dataclass
class MetricSummary:
    mean: float
    precision: float
    errors: np.ndarray  # ascending


@dataclass
class EvalReport:
    """Per-target error summaries of one estimator on one test split."""

    position_cm: MetricSummary
    yaw_deg: MetricSummary
    pitch_deg: MetricSummary
    roll_deg: MetricSummary
    n: int


def evaluate_estimator(estimator, test) -> EvalReport:
    pred = estimator.predict(test.features)
    summaries = {}
    for name, errs in (
        ("position_cm", position_error_cm(test.labels, pred)),
        ("yaw_deg", angle_error_deg(test.labels, pred, "yaw")),
        ("pitch_deg", angle_error_deg(test.labels, pred, "pitch")),
        ("roll_deg", angle_error_deg(test.labels, pred, "roll")),
    ):
        mean, prec = summarize(errs)
        summaries[name] = MetricSummary(mean, prec, np.sort(errs))
    return EvalReport(n=len(test), **summaries)


def format_report_grid(entries: dict) -> str:
    """Render {(method, flag): EvalReport} as a metric-by-column text grid."""
    cols = sorted(entries)
    rows = [
        ("position mean [cm]", lambda r: r.position_cm.mean),
        ("position precision [cm]", lambda r: r.position_cm.precision),
        ("yaw mean [deg]", lambda r: r.yaw_deg.mean),
        ("yaw precision [deg]", lambda r: r.yaw_deg.precision),
        ("pitch mean [deg]", lambda r: r.pitch_deg.mean),
        ("pitch precision [deg]", lambda r: r.pitch_deg.precision),
        ("roll mean [deg]", lambda r: r.roll_deg.mean),
        ("roll precision [deg]", lambda r: r.roll_deg.precision),
    ]
    head = ["metric".ljust(26)] + [f"{m}/{f}".rjust(16) for m, f in cols]
    lines = ["  ".join(head)]
    for label, pick in rows:
        cells = [label.ljust(26)] + [f"{pick(entries[c]):16.4g}" for c in cols]
        lines.append("  ".join(cells))
    return "\n".join(lines) + "\n"


def timing_benchmark(estimator, queries, warmup: int = 100):
    """(offline ms/point, online ms/point); online averages single-query calls.

    The first `warmup` queries are excluded from the average; the offline
    figure is what fit() recorded (training/store-building time per record).
    """
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if len(queries) <= warmup:
        raise ValueError("need more queries than the warmup count")
    for q in queries[:warmup]:
        estimator.predict(q)
    start = time.perf_counter()
    for q in queries[warmup:]:
        estimator.predict(q)
    elapsed = time.perf_counter() - start
    online_ms = 1e3 * elapsed / (len(queries) - warmup)
    offline_ms = float(estimator.extra.get("offline_ms_per_point", float("nan")))
    return offline_ms, online_ms


def q_function(x) -> np.ndarray:
    """Standard normal tail probability Q(x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


class DownlinkModel:
    """AP-LED to UE-PD channel for the broadcast reliability study.

    Roles are the uplink's swapped: each AP's LED emits downward with the
    configured half-power semi-angle; the UE PD shares the pose of the first
    device LED.  Per-AP element emissions are precomputed, so each pose
    costs one element-to-detector vector and N_r dot products.
    """

    def __init__(self, config: SimConfig, cache=None):
        self.config = config
        self.room = config.room
        self.ap_m = lambertian_order(self.room.phi_half_deg)
        self.cache = cache if cache is not None else build_radiosity_cache(self.room)
        rows = []
        for i in range(self.room.n_aps):
            t = emitter_to_elements(self.cache, self.room.ap_positions[i],
                                    self.room.ap_normals[i], self.ap_m,
                                    self.room.fov_led_deg)
            rows.append(self.cache.apply(t))
        self._emissions = np.array(rows)  # (N_r, K)

    def gain_vector(self, label) -> np.ndarray:
        """Total (LOS + diffuse) downlink gains at one pose label."""
        pose = Pose.from_label(label[:6])
        pd_pos, pd_normal = (v[0] for v in led_states(pose, self.config.ue))
        room = self.room
        los = kernels.many_to_point(
            room.ap_positions, room.ap_normals, self.ap_m,
            max(math.cos(math.radians(room.fov_led_deg)), 0.0),
            pd_pos, pd_normal, room.pd_area_m2,
            max(math.cos(math.radians(room.fov_pd_deg)), 0.0))
        r = elements_to_detector(self.cache, pd_pos, pd_normal,
                                 room.pd_area_m2, room.fov_pd_deg)
        return los + self._emissions @ r

    def summed_gains(self, labels) -> np.ndarray:
        return np.array([self.gain_vector(lab).sum() for lab in np.atleast_2d(labels)])


def ber_curve_from_labels(true_labels, est_labels, config: SimConfig,
                          snr_grid_db, cache=None, downlink=None):
    """Mean exact/estimated OOK BER per target average received SNR (dB).

    For each target, the broadcast power is calibrated so the mean received
    SNR over the *true* poses hits the target; the same power then prices
    the channels implied by the estimated poses.
    """
    dl = downlink if downlink is not None else DownlinkModel(config, cache=cache)
    s_true = dl.summed_gains(true_labels) ** 2
    same = est_labels is true_labels or np.array_equal(est_labels, true_labels)
    s_est = s_true if same else dl.summed_gains(est_labels) ** 2
    mean_true = s_true.mean()
    if mean_true <= 0:
        raise NumericsError("no downlink signal reaches any test pose")
    rows = []
    for target_db in np.asarray(snr_grid_db, dtype=float):
        target = 10.0 ** (target_db / 10.0)
        ber_exact = float(q_function(np.sqrt(target * s_true / mean_true)).mean())
        ber_est = float(q_function(np.sqrt(target * s_est / mean_true)).mean())
        rows.append((float(target_db), ber_exact, ber_est))
    return rows


def ber_curve(estimator, test, config: SimConfig, snr_grid_db, cache=None):
    est_labels = estimator.predict(test.features)
    return ber_curve_from_labels(test.labels, est_labels, config, snr_grid_db,
                                 cache=cache)


def write_ber_csv(rows, path):
    with open(path, "w", newline="\n") as fh:
        fh.write("snr_db,ber_exact,ber_est\n")
        for snr_db, exact, est in rows:
            fh.write(f"{snr_db:.10g},{exact:.10g},{est:.10g}\n")
