import numpy as np
import pytest

import config
from modules.model import Dataset, Family, SamplerConfig
from modules.samplers import RngStream
from modules.simgen import SimSpec, generate


@pytest.fixture(autouse=True)
def isolated_logs(tmp_path, monkeypatch):
    """Keep app.log / error.log of CLI tests out of the repository."""
    log_dir = tmp_path / 'logs'
    monkeypatch.setattr(config, 'LOG_DIR', str(log_dir))
    monkeypatch.setattr(config, 'APP_LOG_FILE', str(log_dir / 'app.log'))
    monkeypatch.setattr(config, 'ERROR_LOG_FILE', str(log_dir / 'error.log'))


@pytest.fixture
def rng():
    return RngStream.from_seed(12345)


@pytest.fixture
def short_sampler():
    return SamplerConfig(n_iter=300, burn_in=100, seed=7)


@pytest.fixture
def small_spec():
    return SimSpec(setting='I', n=60, p=4, q=2, n_test=20, seed=3)


@pytest.fixture
def small_data(small_spec):
    train, test, truth = generate(small_spec, RngStream.from_seed(11))
    return train, test, truth


@pytest.fixture
def binary_data():
    """n=200, p=2, q=1 logistic data with strong main effects."""
    gen = np.random.default_rng(5)
    n = 200
    X = gen.standard_normal((n, 2))
    Z = gen.standard_normal((n, 1))
    eta = 0.3 + 2.0 * X[:, 0] - 2.0 * X[:, 1]
    y = (gen.random(n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    return Dataset(X, Z, y, family=Family.BINOMIAL)
