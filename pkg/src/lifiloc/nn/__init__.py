from .network import (build_network, cnn_spec, count_parameters, loss_l2,
                      loss_l2_grad, mlp_spec)
from .training import AdamState, TrainConfig, adam_step, train_network

__all__ = [
    "build_network", "cnn_spec", "mlp_spec", "count_parameters",
    "loss_l2", "loss_l2_grad",
    "AdamState", "TrainConfig", "adam_step", "train_network",
]
