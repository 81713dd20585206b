import numpy as np
import pytest

from modules.errors import ConfigError, ParameterDomainError
from modules.model import Family
from modules.samplers import RngStream
from modules.simgen import Setting, SimSpec, ar1_covariance, generate, make_truth


@pytest.mark.parametrize('value, expected', [('I', Setting.I), ('iv', Setting.IV), (3, Setting.III),
                                             ('6', Setting.VI), (Setting.II, Setting.II)])
def test_setting_parse(value, expected):
    assert Setting.parse(value) is expected


@pytest.mark.parametrize('value', ['VII', 0, 7, ''])
def test_setting_parse_rejects(value):
    with pytest.raises(ConfigError):
        Setting.parse(value)


def test_truth_values():
    truth = make_truth(10, 4)
    assert truth.beta0_true == 1.0
    assert np.array_equal(truth.beta_true[:5], [2.0, -2.0, 2.0, 2.0, 0.0])
    assert np.all(truth.theta0_true == -0.5)
    assert np.array_equal(truth.Theta_true[0], np.ones(4))
    assert np.array_equal(truth.Theta_true[1], np.full(4, -2.0))
    assert np.array_equal(truth.Theta_true[2], [1.0, 2.0, 3.0, 4.0])
    assert np.all(truth.Theta_true[3:] == 0)
    assert truth.support.sum() == 4


def test_truth_without_interactions_and_small_p():
    truth = make_truth(10, 4, interactions=False)
    assert np.all(truth.Theta_true == 0) and np.all(truth.theta0_true == 0)
    small = make_truth(2, 3)
    assert np.array_equal(small.beta_true, [2.0, -2.0])
    assert small.Theta_true.shape == (2, 3)


def test_truth_frame_uses_chain_names():
    frame = make_truth(2, 1).to_frame()
    assert list(frame['parameter']) == ['beta0', 'theta0[1]', 'beta[1]', 'beta[2]', 'Theta[1,1]', 'Theta[2,1]']
    assert frame.loc[frame['parameter'] == 'Theta[2,1]', 'value'].item() == -2.0


def test_ar1_covariance():
    S = ar1_covariance(3, 0.5)
    assert np.allclose(S, [[1, 0.5, 0.25], [0.5, 1, 0.5], [0.25, 0.5, 1]])
    with pytest.raises(ParameterDomainError):
        ar1_covariance(3, 1.0)


def test_spec_validation():
    with pytest.raises(ConfigError):
        SimSpec(family='binomial', missing_fraction=0.1)
    with pytest.raises(ConfigError):
        SimSpec(rho_x=1.0)
    with pytest.raises(ConfigError):
        SimSpec(n=0)
    assert SimSpec(setting='I', rho_x=0.5).effective_rho == 0.0
    assert SimSpec(setting='IV', rho_x=0.5).effective_rho == 0.5


def test_generate_shapes_and_missing_count():
    spec = SimSpec(setting='I', n=200, p=10, q=4, missing_fraction=0.3, n_test=50, seed=1)
    train, test, truth = generate(spec)
    assert train.X.shape == (200, 10) and train.Z.shape == (200, 4)
    assert test.n == 50 and test.n_missing == 0
    assert train.n_missing == 60
    assert truth.beta_true.shape == (10,)


def test_generate_is_reproducible():
    spec = SimSpec(n=40, p=5, q=2, seed=9)
    a, _, _ = generate(spec)
    b, _, _ = generate(spec)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)


def test_test_size_does_not_change_training_data():
    a, _, _ = generate(SimSpec(n=40, p=5, q=2, n_test=10, seed=9))
    b, _, _ = generate(SimSpec(n=40, p=5, q=2, n_test=200, seed=9))
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)


@pytest.mark.parametrize('setting, x_binary, z_binary', [('II', False, True), ('V', True, False),
                                                          ('VI', True, True)])
def test_binary_designs(setting, x_binary, z_binary):
    train, _, _ = generate(SimSpec(setting=setting, n=100, p=4, q=2, seed=2))
    assert np.all(np.isin(train.X, (0.0, 1.0))) == x_binary
    assert np.all(np.isin(train.Z, (0.0, 1.0))) == z_binary


def test_correlated_design():
    train, _, _ = generate(SimSpec(setting='III', n=20_000, p=3, q=1, rho_x=0.5, seed=3),
                           RngStream.from_seed(3))
    corr = np.corrcoef(train.X.T)
    assert corr[0, 1] == pytest.approx(0.5, abs=0.03)
    assert corr[0, 2] == pytest.approx(0.25, abs=0.03)


def test_binomial_responses():
    train, test, _ = generate(SimSpec(n=100, p=4, q=2, family='binomial', seed=4))
    assert train.family is Family.BINOMIAL
    assert set(np.unique(train.y)) <= {0.0, 1.0}
    assert set(np.unique(test.y)) <= {0.0, 1.0}
