import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import triquart as tq

settings.register_profile(
    "package", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("package")


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


@pytest.fixture(scope="session")
def protocol_ensemble():
    """The acceptance-scale Monte Carlo, shared across test modules.

    200 trials x 24 phases x (adaptive + nonadaptive) takes several
    minutes; computing it once keeps the whole suite inside the runtime
    target.
    """
    config = tq.ProtocolConfig(M=10_000, rng_seed=5)
    return tq.monte_carlo(config, trials=200, include_nonadaptive=True)
