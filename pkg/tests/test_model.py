import numpy as np
import pytest

from modules.errors import ConfigError, DimensionError, InvalidDatasetError
from modules.model import (Dataset, Family, GaussianState, PointEstimate, SamplerConfig,
                           block_design, init_state, linear_predictor, standardize)
from modules.samplers import RngStream


def _random_dataset(n=12, p=3, q=2, seed=0):
    gen = np.random.default_rng(seed)
    return Dataset(gen.standard_normal((n, p)), gen.standard_normal((n, q)), gen.standard_normal(n))


def test_linear_predictor_matches_elementwise_sum():
    data = _random_dataset()
    gen = np.random.default_rng(1)
    est = PointEstimate(beta0=0.7, theta0=gen.standard_normal(2), beta=gen.standard_normal(3),
                        Theta=gen.standard_normal((3, 2)))
    expected = np.empty(data.n)
    for i in range(data.n):
        z = data.Z[i]
        total = est.beta0 + z @ est.theta0
        for j in range(data.p):
            total += data.X[i, j] * (est.beta[j] + z @ est.Theta[j])
        expected[i] = total
    assert np.allclose(linear_predictor(est, data), expected)


def test_linear_predictor_hand_example():
    # 1 - 0.5 * 3 + 2 * (2 + 3 * 1)
    data = Dataset(np.array([[2.0]]), np.array([[3.0]]), np.zeros(1))
    est = PointEstimate(1.0, np.array([-0.5]), np.array([2.0]), np.array([[1.0]]))
    assert linear_predictor(est, data)[0] == pytest.approx(9.5)
    zero = PointEstimate(0.0, np.zeros(1), np.zeros(1), np.zeros((1, 1)))
    assert np.array_equal(linear_predictor(zero, data), [0.0])


def test_linear_predictor_without_modifiers():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    data = Dataset(X, np.zeros((2, 0)), np.zeros(2))
    est = PointEstimate(1.0, np.zeros(0), np.array([1.0, -1.0]), np.zeros((2, 0)))
    assert np.allclose(linear_predictor(est, data), [0.0, 0.0])


def test_linear_predictor_shape_mismatch():
    data = _random_dataset()
    est = PointEstimate(0.0, np.zeros(2), np.zeros(4), np.zeros((4, 2)))
    with pytest.raises(DimensionError):
        linear_predictor(est, data)


def test_block_design():
    data = _random_dataset(n=5, p=3, q=2)
    W0 = block_design(data, 0)
    assert W0.shape == (5, 3)
    assert np.all(W0[:, 0] == 1.0)
    W2 = block_design(data, 2)
    assert np.allclose(W2[:, 0], data.X[:, 1])
    assert np.allclose(W2[:, 1:], data.X[:, [1]] * data.Z)
    with pytest.raises(DimensionError):
        block_design(data, 4)


def test_dataset_is_read_only():
    data = _random_dataset()
    with pytest.raises(ValueError):
        data.X[0, 0] = 1.0


def test_dataset_missing_responses_are_nan():
    y = np.array([1.0, 2.0, 3.0, 4.0])
    mask = np.array([False, True, False, True])
    data = Dataset(np.ones((4, 1)), np.zeros((4, 0)), y, mask)
    assert data.n_missing == 2
    assert np.isnan(data.y[1]) and np.isnan(data.y[3])
    assert np.array_equal(data.observed_y, [1.0, 3.0])


def test_dataset_validation():
    with pytest.raises(DimensionError):
        Dataset(np.ones((3, 2)), np.ones((4, 1)), np.ones(3))
    with pytest.raises(InvalidDatasetError):
        Dataset(np.ones((2, 1)), np.ones((2, 1)), np.ones(2), np.array([True, True]))
    with pytest.raises(InvalidDatasetError):
        Dataset(np.ones((2, 1)), np.ones((2, 1)), np.array([0.0, 2.0]), family=Family.BINOMIAL)
    with pytest.raises(InvalidDatasetError):
        Dataset(np.array([[np.nan], [1.0]]), np.ones((2, 1)), np.ones(2))


def test_dataset_default_names_and_subset():
    data = _random_dataset(n=6, p=2, q=1)
    assert data.predictor_names() == ['x1', 'x2']
    assert data.modifier_names() == ['z1']
    sub = data.subset(np.array([0, 2]))
    assert sub.n == 2
    assert np.array_equal(sub.X, data.X[[0, 2]])


def test_sampler_config_validation_and_storage():
    sampler = SamplerConfig(n_iter=10, burn_in=4, thin=2)
    assert list(sampler.stored_iterations) == [4, 6, 8]
    assert sampler.n_stored == 3
    with pytest.raises(ConfigError):
        SamplerConfig(n_iter=10, burn_in=10)
    with pytest.raises(ConfigError):
        SamplerConfig(n_iter=10, burn_in=0, thin=0)


def test_init_state_gaussian_with_missing():
    y = np.array([1.0, 3.0, 5.0, 0.0])
    data = Dataset(np.ones((4, 2)), np.ones((4, 1)), y, np.array([False, False, False, True]))
    state = init_state(data, SamplerConfig(), RngStream.from_seed(0))
    assert isinstance(state, GaussianState)
    assert state.sigma_sq == pytest.approx(4.0)
    assert state.y_completed[3] == pytest.approx(3.0)
    assert np.all(state.beta == 0) and np.all(state.lambda_sq == 1)


def test_init_state_logistic(binary_data):
    state = init_state(binary_data, SamplerConfig(), RngStream.from_seed(0))
    assert state.gamma.shape == (3, 2)
    assert np.all(state.omega == 0.25)
    assert state.beta.shape == (2,) and state.Theta.shape == (2, 1)


def test_standardize():
    X = np.column_stack([np.arange(5.0), np.full(5, 3.0)])
    data = Dataset(X, np.zeros((5, 0)), np.arange(5.0))
    scaled, std = standardize(data)
    assert np.allclose(scaled.X[:, 0].mean(), 0.0)
    assert np.allclose(scaled.X[:, 0].std(ddof=1), 1.0)
    assert std.scales[1] == 1.0
    assert np.allclose(scaled.X[:, 1], 0.0)
