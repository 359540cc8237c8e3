"""Indoor LiFi uplink SNR fingerprinting and joint pose estimation.

Pipeline: configure a room (`lifiloc.config`), simulate LOS + diffuse
channel gains (`channel`, `radiosity`), draw random poses and powers
(`sampling`), persist fingerprint datasets (`dataset`), fit MLP/CNN/KNN
estimators (`nn`, `knn`, `estimator`), and score them (`evaluation`).
The `lifiloc` CLI chains these stages with reproducible seeds.
"""

__version__ = "0.1.0"

from .config import (OrientationStats, RoomConfig, SamplerConfig, SimConfig,
                     UEGeometry, load_config)
from .geometry import Pose, lambertian_order, led_state, rotation_matrix
from .channel import (ChannelModel, FULL, LOS, channel_matrix, los_gain,
                      nlos_gain, pam_levels, pam_power, snr_vector)
from .radiosity import RadiosityCache, build_radiosity_cache, discretize_room
from .sampling import PoseSampler, truncated_laplace
from .dataset import (Dataset, FeatureTransform, generate_dataset,
                      load_dataset, save_dataset, split)
from .estimator import AnnEstimator, KnnEstimator, load_estimator
from .evaluation import (angle_error_deg, ber_curve, evaluate_estimator,
                         position_error_cm, precision90, q_function,
                         summarize, timing_benchmark)

__all__ = [
    "__version__",
    "OrientationStats", "RoomConfig", "SamplerConfig", "SimConfig",
    "UEGeometry", "load_config",
    "Pose", "lambertian_order", "led_state", "rotation_matrix",
    "ChannelModel", "FULL", "LOS", "channel_matrix", "los_gain", "nlos_gain",
    "pam_levels", "pam_power", "snr_vector",
    "RadiosityCache", "build_radiosity_cache", "discretize_room",
    "PoseSampler", "truncated_laplace",
    "Dataset", "FeatureTransform", "generate_dataset", "load_dataset",
    "save_dataset", "split",
    "AnnEstimator", "KnnEstimator", "load_estimator",
    "angle_error_deg", "ber_curve", "evaluate_estimator", "position_error_cm",
    "precision90", "q_function", "summarize", "timing_benchmark",
]
