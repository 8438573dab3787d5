# conftest.py

import numpy as np
import pytest

from geometry import NavState, STATE_DIM, boxplus, so3_exp
from simulator import RunSimulator, ScanPattern, TrajectoryKind, TrajectorySpec, default_world

# Scan pattern used by the closed-loop fixtures; coarser than the default to keep runs short
TEST_PATTERN = ScanPattern(rings=16, azimuth_steps=360)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def world():
    return default_world()


def random_state(rng, timestamp: float = 0.0, bias_scale: float = 0.05) -> NavState:
    return NavState(
        translation=rng.normal(size=3),
        rotation=so3_exp(rng.normal(size=3)),
        velocity=rng.normal(size=3),
        accel_bias=bias_scale * rng.normal(size=3),
        gyro_bias=0.1 * bias_scale * rng.normal(size=3),
        timestamp=timestamp,
    )


@pytest.fixture
def make_state(rng):
    """Factory for random navigation states"""
    return lambda timestamp=0.0, bias_scale=0.05: random_state(rng, timestamp, bias_scale)


def _numeric_jacobian(f, x, eps: float = 1e-6):
    """Central differences of f over the 15-dim error state of NavState x"""
    columns = []
    for i in range(STATE_DIM):
        step = np.zeros(STATE_DIM)
        step[i] = eps
        columns.append((np.atleast_1d(f(boxplus(x, step))) - np.atleast_1d(f(boxplus(x, -step)))) / (2.0 * eps))
    return np.column_stack(columns)


@pytest.fixture
def numeric_jacobian():
    return _numeric_jacobian


def simulate(kind: TrajectoryKind, duration: float, noise=None, range_noise: float = 0.0, seed: int = 0,
             **spec_kwargs):
    simulator = RunSimulator(world=default_world(), noise=noise, pattern=TEST_PATTERN, range_noise=range_noise)
    spec = TrajectorySpec(kind=kind, duration=duration, seed=seed, **spec_kwargs)
    return simulator.simulate(spec)


@pytest.fixture(scope="session")
def stationary_run():
    return simulate(TrajectoryKind.STATIONARY, duration=2.0)


@pytest.fixture(scope="session")
def circular_run():
    """Noiseless circle: 1 s at rest, then a 1 s ramp into 2 m/s on a 5 m radius"""
    return simulate(TrajectoryKind.CIRCULAR, duration=4.0, lead_in=1.0, ramp=1.0)
