"""
Shared fixtures for the pauli_gaussian test suite.
"""

import numpy as np
import pytest

from pauli_gaussian.config import EngineConfig, set_config
from pauli_gaussian.state import random_state
from pauli_gaussian.validation import random_basis


@pytest.fixture(autouse=True)
def fresh_config(monkeypatch):
    """Every test starts from default guards, free of environment overrides."""
    for name in (
        "PAULI_GAUSSIAN_MAX_ENUM_SITES",
        "PAULI_GAUSSIAN_WORKERS",
        "PAULI_GAUSSIAN_ALLOW_LARGE",
    ):
        monkeypatch.delenv(name, raising=False)
    config = EngineConfig()
    set_config(config)
    yield config
    set_config(EngineConfig())


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def make_random_state(rng):
    """Factory for seeded random vacuum-based states."""

    def build(size, scale=1.0):
        return random_state(size, seed=int(rng.integers(2**31)), scale=scale)

    return build


@pytest.fixture
def make_random_basis(rng):
    """Factory for random per-site bases."""

    def build(size, theta_margin=0.0):
        return random_basis(rng, size, theta_margin)

    return build


def phase_aligned_error(a, b):
    """max |a - c b| over unit-modulus c."""
    a, b = np.asarray(a), np.asarray(b)
    overlap = np.vdot(b, a)
    c = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(a - c * b)))
