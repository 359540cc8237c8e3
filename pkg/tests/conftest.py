import numpy as np
import pytest

from lifiloc.channel import ChannelModel, FULL
from lifiloc.config import SimConfig
from lifiloc.dataset import generate_dataset, split


@pytest.fixture(scope="session")
def sim_config() -> SimConfig:
    return SimConfig()


@pytest.fixture(scope="session")
def channel_model(sim_config) -> ChannelModel:
    model = ChannelModel(sim_config)
    model.cache  # build once for the whole session
    return model


@pytest.fixture(scope="session")
def small_dataset(sim_config):
    """600 full-channel records shared by estimator/evaluation/CLI tests."""
    return generate_dataset(sim_config, 600, FULL, seed=31)


@pytest.fixture(scope="session")
def small_splits(small_dataset):
    return split(small_dataset)
