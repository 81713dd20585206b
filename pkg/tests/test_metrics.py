import numpy as np
import pandas as pd
import pytest

from modules.errors import DimensionError
from modules.gibbs_gaussian import PosteriorDraws
from modules.metrics import (aggregate_metrics, estimation_errors, prediction_error, score,
                             selection_metrics, truth_support)
from modules.model import Dataset, Family, PointEstimate, linear_predictor
from modules.simgen import make_truth


def _dataset(n=30, p=4, q=2, seed=0, family=Family.GAUSSIAN, y=None):
    gen = np.random.default_rng(seed)
    X = gen.standard_normal((n, p))
    Z = gen.standard_normal((n, q))
    return Dataset(X, Z, np.zeros(n) if y is None else y, family=family)


def test_estimation_errors():
    truth = make_truth(4, 2)
    assert estimation_errors(truth.as_estimate(), truth) == (0.0, 0.0)
    est = PointEstimate(0.0, np.zeros(2), truth.beta_true + 0.5, truth.Theta_true + 1.0)
    est_beta, est_theta = estimation_errors(est, truth)
    assert est_beta == pytest.approx(4 * 0.25)
    assert est_theta == pytest.approx(8.0)


def test_estimation_errors_shape_mismatch():
    truth = make_truth(4, 2)
    with pytest.raises(DimensionError):
        estimation_errors(PointEstimate(0.0, np.zeros(2), np.zeros(3), np.zeros((3, 2))), truth)


def test_selection_edge_cases():
    nothing = selection_metrics(np.zeros(5, bool), np.array([1, 1, 0, 0, 0], bool))
    assert (nothing.tp, nothing.fn, nothing.tn) == (0, 2, 3)
    assert nothing.fdr == 0.0 and nothing.fpr == 0.0
    assert nothing.accuracy == pytest.approx(0.6)
    all_true = selection_metrics(np.ones(3, bool), np.ones(3, bool))
    assert all_true.fpr == 0.0 and all_true.accuracy == 1.0
    with pytest.raises(DimensionError):
        selection_metrics(np.ones(3, bool), np.ones(4, bool))


def test_truth_support_with_interactions():
    truth = make_truth(4, 2)
    support = truth_support(truth, include_interactions=True)
    assert support.shape == (4 + 8,)
    assert support[:4].tolist() == [True, True, True, True]
    assert support[4:].sum() == 6


def test_prediction_error_gaussian_is_zero_for_exact_plugin():
    truth = make_truth(4, 2)
    shell = _dataset()
    test = Dataset(shell.X, shell.Z, linear_predictor(truth.as_estimate(), shell))
    assert prediction_error(truth.as_estimate(), test) == pytest.approx(0.0, abs=1e-20)


def test_prediction_error_skips_missing_rows():
    truth = make_truth(4, 2)
    shell = _dataset()
    y = linear_predictor(truth.as_estimate(), shell)
    y[0] = y[0] + 100.0
    mask = np.zeros(shell.n, dtype=bool)
    mask[0] = True
    test = Dataset(shell.X, shell.Z, y, mask)
    assert prediction_error(truth.as_estimate(), test) == pytest.approx(0.0, abs=1e-20)


def test_prediction_error_binomial_misclassification():
    X = np.array([[1.0], [-1.0], [2.0], [-2.0]])
    Z = np.zeros((4, 0))
    test = Dataset(X, Z, np.array([1.0, 0.0, 0.0, 0.0]), family=Family.BINOMIAL)
    est = PointEstimate(0.0, np.zeros(0), np.array([1.0]), np.zeros((1, 0)))
    assert prediction_error(est, test) == pytest.approx(0.25)


def test_prediction_error_binomial_averages_probabilities_over_draws():
    X = np.array([[1.0], [-1.0]])
    test = Dataset(X, np.zeros((2, 0)), np.array([1.0, 0.0]), family=Family.BINOMIAL)
    draws = PosteriorDraws.allocate(Family.BINOMIAL, 2, 1, 0, with_sigma=False)
    draws.beta0[:] = 0.0
    draws.beta[:, 0] = [3.0, -1.0]
    draws.tau_sq[:] = 1.0
    draws.lambda_sq[:] = 1.0
    # mean probability for x=1 is (expit(3) + expit(-1)) / 2 > 0.5
    assert prediction_error(draws, test) == 0.0


def test_score_report(small_data):
    train, test, truth = small_data
    draws = PosteriorDraws.allocate(Family.GAUSSIAN, 3, 4, 2)
    for name, value in (('beta0', truth.beta0_true), ('theta0', truth.theta0_true),
                        ('beta', truth.beta_true), ('Theta', truth.Theta_true)):
        getattr(draws, name)[:] = value
    report = score(draws, truth.support, truth, test, n_missing=7)
    assert report.est_beta == 0.0 and report.est_theta == 0.0
    assert report.accuracy == 1.0 and report.fdr == 0.0
    assert report.n_missing == 7
    row = report.to_row(replication=1, setting='I')
    assert list(row)[:3] == ['replication', 'setting', 'est_beta']


def test_aggregate_uses_population_sd():
    frame = pd.DataFrame({'est_beta': [0.04, 0.06], 'pred': [1.0, 1.0], 'fdr': [np.nan, 0.2]})
    agg = aggregate_metrics(frame).set_index('metric')
    assert list(agg.index) == ['est_beta', 'pred', 'fdr']
    assert agg.loc['est_beta', 'sd'] == pytest.approx(0.01)
    assert agg.loc['est_beta', 'display'] == '0.05 (0.01)'
    assert agg.loc['pred', 'display'] == '1.00 (0.00)'
    assert agg.loc['fdr', 'mean'] == pytest.approx(0.2)
