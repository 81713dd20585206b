import numpy as np
import pytest

from modules.errors import ConfigError, DimensionError, UnsupportedOperationError
from modules.gibbs_gaussian import PosteriorDraws
from modules.model import Dataset, Family, PointEstimate, linear_predictor, standardize
from modules.summary import (acf_frame, autocorrelation, back_transform, chain, credible_interval,
                             imputation_table, interval_from_samples, intervals_table,
                             linear_predictor_draws, point_estimate, posterior_mean, scalar_names,
                             select_variables, selection_table, summary_table, trace_frame)


@pytest.fixture
def draws():
    """p=3, q=2 draws: beta[1] clearly positive, beta[2] straddles zero, beta[3] constant zero."""
    gen = np.random.default_rng(0)
    S = 400
    d = PosteriorDraws.allocate(Family.GAUSSIAN, S, 3, 2)
    d.beta0[:] = 1.0 + 0.1 * gen.standard_normal(S)
    d.theta0[:] = gen.standard_normal((S, 2))
    d.beta[:, 0] = 2.0 + 0.1 * gen.standard_normal(S)
    d.beta[:, 1] = gen.standard_normal(S)
    d.beta[:, 2] = 0.0
    d.Theta[:] = gen.standard_normal((S, 3, 2))
    d.Theta[:, 0, 1] = -3.0 + 0.1 * gen.standard_normal(S)
    d.tau_sq[:] = gen.gamma(2.0, size=S)
    d.lambda_sq[:] = gen.gamma(2.0, size=(S, 3))
    d.sigma_sq[:] = gen.gamma(2.0, size=S)
    return d


def test_chain_uses_one_based_names(draws):
    assert np.array_equal(chain(draws, 'beta[1]'), draws.beta[:, 0])
    assert np.array_equal(chain(draws, 'Theta[1,2]'), draws.Theta[:, 0, 1])
    assert np.array_equal(chain(draws, 'theta0[2]'), draws.theta0[:, 1])
    assert np.array_equal(chain(draws, 'sigma_sq'), draws.sigma_sq)


@pytest.mark.parametrize('name', ['beta[0]', 'beta[4]', 'Theta[1]', 'gamma[1]', 'beta[1', 'y_imputed[1]'])
def test_chain_rejects_bad_names(draws, name):
    with pytest.raises(ConfigError):
        chain(draws, name)


def test_scalar_names(draws):
    names = scalar_names(draws)
    assert names[:4] == ['beta0', 'theta0[1]', 'theta0[2]', 'beta[1]']
    assert names[-1] == 'sigma_sq'
    assert len(names) == 1 + 2 + 3 + 6 + 3 + 2
    assert 'tau_sq' not in scalar_names(draws, include_scales=False)


def test_credible_interval_matches_quantiles(draws):
    ci = credible_interval(draws, 'beta[2]', 0.9)
    lo, hi = np.quantile(draws.beta[:, 1], [0.05, 0.95])
    assert (ci.lower, ci.upper, ci.level) == (lo, hi, 0.9)
    assert not ci.excludes_zero()
    assert credible_interval(draws, 'beta[1]').excludes_zero()
    with pytest.raises(ConfigError):
        interval_from_samples(draws.beta0, 1.0)

def test_posterior_mean_scalar_and_block(draws):
    d = PosteriorDraws.allocate(Family.GAUSSIAN, 3, 1, 1)
    d.beta0[:] = [1.0, 2.0, 3.0]
    d.beta[:] = 4.0
    d.theta0[:] = 0.0
    d.Theta[:] = 0.0
    assert posterior_mean(d, 'beta0') == 2.0
    assert posterior_mean(d, 'beta[1]') == 4.0
    assert np.array_equal(posterior_mean(draws, 'Theta'), draws.Theta.mean(axis=0))
    est = point_estimate(draws)
    assert est.beta0 == posterior_mean(draws, 'beta0')
    assert np.array_equal(est.beta, posterior_mean(draws, 'beta'))
    with pytest.raises(ConfigError):
        posterior_mean(draws, 'gamma')


def test_posterior_mean_of_empty_chain():
    with pytest.raises(DimensionError):
        posterior_mean(PosteriorDraws.allocate(Family.GAUSSIAN, 0, 2, 1), 'beta[1]')


def test_credible_interval_widens_with_level(draws):
    intervals = [credible_interval(draws, 'beta[2]', level) for level in (0.5, 0.8, 0.9, 0.95, 0.99)]
    for narrow, wide in zip(intervals, intervals[1:]):
        assert wide.lower <= narrow.lower
        assert wide.upper >= narrow.upper
    for ci in intervals:
        assert ci.lower <= ci.upper



def test_select_variables(draws):
    assert select_variables(draws).tolist() == [True, False, False]
    extended = select_variables(draws, include_interactions=True)
    assert extended.shape == (3 + 6,)
    assert extended[3 + 1]


def test_constant_chain_is_not_selected():
    d = PosteriorDraws.allocate(Family.GAUSSIAN, 10, 1, 0)
    d.beta[:] = 5.0
    assert select_variables(d).tolist() == [False]


def test_autocorrelation():
    gen = np.random.default_rng(1)
    x = np.empty(20_000)
    x[0] = 0.0
    for t in range(1, x.size):
        x[t] = 0.8 * x[t - 1] + gen.standard_normal()
    acf = autocorrelation(x, max_lag=5)
    assert acf.values[0] == 1.0
    assert acf.values[1] == pytest.approx(0.8, abs=0.03)
    assert acf.values[2] == pytest.approx(0.64, abs=0.04)
    assert not acf.degenerate


def test_autocorrelation_of_constant_chain_is_degenerate(draws):
    acf = autocorrelation(draws, 'beta[3]', max_lag=3)
    assert acf.degenerate
    assert np.all(np.isnan(acf.values)) and acf.values.shape == (4,)


def test_autocorrelation_caps_lag(draws):
    assert autocorrelation(draws.beta0[:5], max_lag=40).values.shape == (5,)


def test_trace_and_acf_frames(draws):
    trace = trace_frame(draws, ['beta[1]', 'tau_sq'])
    assert trace.index.name == 'draw' and trace.shape == (400, 2)
    acf = acf_frame(draws, ['beta[1]'], max_lag=10)
    assert acf.index.name == 'lag' and acf.shape == (11, 1)


def test_summary_table(draws):
    table = summary_table(draws).set_index('parameter')
    assert list(table.columns) == ['mean', 'sd', 'lower_95', 'upper_95', 'lower_90', 'upper_90', 'selected']
    assert table.loc['beta[1]', 'selected']
    assert not table.loc['beta[2]', 'selected']
    assert not table.loc['Theta[1,2]', 'selected']
    assert table.loc['beta[1]', 'mean'] == pytest.approx(draws.beta[:, 0].mean())
    assert table.loc['beta[1]', 'lower_90'] >= table.loc['beta[1]', 'lower_95']
    with_theta = summary_table(draws, include_interactions=True).set_index('parameter')
    assert with_theta.loc['Theta[1,2]', 'selected']


def test_intervals_and_selection_tables(draws):
    intervals = intervals_table(draws)
    assert set(intervals['level']) == {0.95, 0.90}
    assert len(intervals) == 2 * (1 + 2 + 3 + 6)
    selection = selection_table(draws, ['a', 'b', 'c'])
    assert selection['name'].tolist() == ['a', 'b', 'c']
    assert selection['predictor'].tolist() == [1, 2, 3]
    assert selection['selected'].tolist() == [True, False, False]


def test_linear_predictor_draws_match_plugin(draws):
    gen = np.random.default_rng(2)
    data = Dataset(gen.standard_normal((7, 3)), gen.standard_normal((7, 2)), np.zeros(7))
    eta = linear_predictor_draws(draws, data)
    assert eta.shape == (400, 7)
    s = 17
    est = PointEstimate(draws.beta0[s], draws.theta0[s], draws.beta[s], draws.Theta[s])
    assert np.allclose(eta[s], linear_predictor(est, data))


def test_back_transform_preserves_linear_predictor(draws):
    gen = np.random.default_rng(3)
    X = 5.0 + 3.0 * gen.standard_normal((20, 3))
    data = Dataset(X, gen.standard_normal((20, 2)), np.zeros(20))
    scaled, std = standardize(data)
    original = back_transform(draws, std)
    assert np.allclose(linear_predictor_draws(draws, scaled), linear_predictor_draws(original, data))
    assert np.allclose(original.beta, draws.beta / std.scales)
    assert original.diagnostics['back_transformed']


def test_imputation_table():
    d = PosteriorDraws.allocate(Family.GAUSSIAN, 50, 1, 0, n_imputed=2)
    d.y_imputed[:] = np.column_stack([np.linspace(0, 1, 50), np.full(50, 3.0)])
    d.missing_index = np.array([4, 9])
    table = imputation_table(d)
    assert table['row'].tolist() == [4, 9]
    assert table['mean'].iloc[1] == pytest.approx(3.0)
    with pytest.raises(UnsupportedOperationError):
        imputation_table(PosteriorDraws.allocate(Family.GAUSSIAN, 5, 1, 0))
