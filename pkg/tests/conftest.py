import numpy as np
import pytest

from hyperpipe.data import Dataset

# per-dimension class-mean separation such that the likelihood-ratio rule has
# balanced accuracy Phi(delta * sqrt(2) / 2) ~= 0.8500 (two informative dims)
BAYES_DELTA = 1.4658
BAYES_BALANCED_ACCURACY = 0.85


def gaussian_mixture(n=120, majority=0.68, delta=BAYES_DELTA, n_informative=2,
                     n_noise=3, seed=0):
    """Binary Gaussian mixture: minority class shifted by delta per informative dim."""
    rng = np.random.default_rng(seed)
    n_major = int(round(n * majority))
    n_minor = n - n_major
    y = np.array([0.0] * n_major + [1.0] * n_minor)
    x = rng.standard_normal((n, n_informative + n_noise))
    x[n_major:, :n_informative] += delta
    order = rng.permutation(n)
    return Dataset(x=x[order], y=y[order], kind="classification")


@pytest.fixture
def small_dataset():
    return gaussian_mixture(n=90, seed=11)
