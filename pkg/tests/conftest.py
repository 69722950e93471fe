import numpy as np
import pytest

from stringstab import AffineTerm, ControllerGains

REFERENCE = ControllerGains.from_gains(1.0, 1.0, 10.0, 100.0)
SYMMETRIC = ControllerGains.from_gains(1.0, 1.0, 1.0, 1.0)


@pytest.fixture
def reference_gains():
    return REFERENCE


@pytest.fixture
def symmetric_gains():
    return SYMMETRIC


def random_gains(rng: np.random.Generator) -> ControllerGains:
    """Gain tuple with a, b log-uniform in [1e-2, 1e2]."""
    vals = 10.0 ** rng.uniform(-2, 2, size=4)
    return ControllerGains(AffineTerm(vals[0], vals[1]), AffineTerm(vals[2], vals[3]))


def random_upper_half_plane(rng: np.random.Generator, size: int) -> np.ndarray:
    """Points with log-uniform magnitude in [1e-2, 1e2], phase in [0, pi]."""
    mag = 10.0 ** rng.uniform(-2, 2, size=size)
    phase = rng.uniform(0.0, np.pi, size=size)
    return mag * np.exp(1j * phase)
