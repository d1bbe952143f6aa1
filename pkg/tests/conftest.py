import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("conclab", deadline=None, max_examples=40, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("conclab")


def mc_mean(x):
    """Sample mean and its standard error."""
    x = np.asarray(x, dtype=float)
    return float(np.mean(x)), float(np.std(x, ddof=1) / np.sqrt(x.size))


@pytest.fixture
def within_3se():
    def check(samples, target):
        m, se = mc_mean(samples)
        assert abs(m - target) <= 3 * se, (m, se, target)
    return check
