import numpy as np
import pytest

from sensenorm.synthgen import WalkParams, generate


def pearson_oracle(x, y):
    """Definitional Pearson correlation, coded independently of numpy.corrcoef."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y)) / n
    sx = (sum((a - mx) ** 2 for a in x) / n) ** 0.5
    sy = (sum((b - my) ** 2 for b in y) / n) ** 0.5
    return cov / (sx * sy)


@pytest.fixture(scope="session")
def small_walk():
    """Shared pilot-scale generated corpus: 500 senses, 100k steps."""
    params = WalkParams(dim=10, n_senses=500, steps=100_000, drift=0.1,
                        vector_scale=1.0, seed=42)
    corpus, truth = generate(params)
    return params, corpus, truth


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
