import math

import numpy as np
import pytest

ALPHA, BETA = math.cos(math.pi / 8), math.sin(math.pi / 8)
P0 = ALPHA**2  # 0.8535533905932737


def sigma3(p: float, shots: int) -> float:
    return 3 * math.sqrt(p * (1 - p) / shots)


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
