import numpy as np
import pytest

from noma_d2d.linkmodel import qos_thresholds
from noma_d2d.scenario import ChannelState, ScenarioConfig, realize, substream


@pytest.fixture(scope="session")
def cfg():
    return ScenarioConfig()


@pytest.fixture(scope="session")
def qos_default(cfg):
    return qos_thresholds(5e6, 5e6, 5e6, 5e6, cfg.bandwidth_hz)


@pytest.fixture(scope="session")
def p_max(cfg):
    return cfg.p_ue_max_w


def draw_states(cfg: ScenarioConfig, n: int, seed: int = 0) -> list[ChannelState]:
    return [realize(cfg, substream(seed, i))[1] for i in range(n)]


@pytest.fixture(scope="session")
def states_100(cfg):
    return draw_states(cfg, 100)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
