import numpy as np
import pytest

from src.quenchfidelity.models.model_spec import ModelSpec

REFERENCE_INITIAL = (-2.0, 0.8)


def _constant_map(gamma, ks):
    # the Bloch vector does not depend on k: gamma = (dx, dy, dz)
    return np.tile([gamma[0], gamma[1], gamma[2], 0.0], (len(ks), 1))


def _tilted_map(gamma, ks):
    # d(k) = (gamma_0 (k - 1), 0, 1): every member is parallel to the z axis at k = 1
    ks = np.asarray(ks, dtype=float)
    rows = np.zeros((len(ks), 4))
    rows[:, 0] = gamma[0] * (ks - 1.0)
    rows[:, 2] = 1.0
    return rows


@pytest.fixture
def reference_initial():
    return REFERENCE_INITIAL


@pytest.fixture
def constant_model():
    return ModelSpec("constant", ("dx", "dy", "dz"), _constant_map)


@pytest.fixture
def tilted_model():
    return ModelSpec("tilted", ("slope",), _tilted_map)
