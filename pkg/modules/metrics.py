"""
Scoring against simulation truth: estimation error, prediction error and
selection counts.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import expit

from modules.errors import DimensionError
from modules.gibbs_gaussian import PosteriorDraws
from modules.model import Dataset, Family, PointEstimate, linear_predictor
from modules.simgen import SimTruth
from modules.summary import linear_predictor_draws, point_estimate
from modules.utils import format_mean_sd, mean_sd

logger = logging.getLogger(__name__)

METRIC_NAMES = ('est_beta', 'est_theta', 'pred', 'accuracy', 'fdr', 'fpr')


@dataclass
class SelectionCounts:
    tp: int
    fp: int
    fn: int
    tn: int
    accuracy: float
    fdr: float
    fpr: float


@dataclass
class MetricsReport:
    """One scored replication; serializes to one metrics.csv row."""

    est_beta: float
    est_theta: float
    pred: float
    accuracy: float
    fdr: float
    fpr: float
    tp: int
    fp: int
    fn: int
    tn: int
    n_missing: int = 0

    def to_row(self, **context) -> dict:
        """Flat dict with the given context columns (replication, setting, ...) first."""
        row = dict(context)
        row.update(asdict(self))
        return row


def estimation_errors(estimate: PointEstimate, truth: SimTruth) -> Tuple[float, float]:
    """
    Squared L2 error of beta and squared Frobenius error of Theta.

    Raises:
        DimensionError: estimate and truth disagree in shape
    """
    beta = np.asarray(estimate.beta, dtype=float)
    Theta = np.asarray(estimate.Theta, dtype=float)
    if beta.shape != truth.beta_true.shape or Theta.shape != truth.Theta_true.shape:
        raise DimensionError(
            f"estimate shapes beta {beta.shape}, Theta {Theta.shape} do not match truth "
            f"{truth.beta_true.shape}, {truth.Theta_true.shape}")
    est_beta = float(np.sum((beta - truth.beta_true) ** 2))
    est_theta = float(np.sum((Theta - truth.Theta_true) ** 2))
    return est_beta, est_theta


def prediction_error(estimate: Union[PointEstimate, PosteriorDraws], test: Dataset,
                     family: Optional[Family] = None) -> float:
    """
    Test-set prediction error using the full pliable predictor.

    Gaussian: mean squared error of the plug-in prediction. Binomial:
    misclassification rate at threshold 0.5 on the predicted probability;
    with posterior draws the probability is averaged over draws.
    Rows with a missing response are skipped.
    """
    family = Family(family or test.family)
    observed = ~test.missing_mask
    y = test.y[observed]

    if family is Family.BINOMIAL:
        if isinstance(estimate, PosteriorDraws):
            prob = expit(linear_predictor_draws(estimate, test)).mean(axis=0)
        else:
            prob = expit(linear_predictor(estimate, test))
        predicted = (prob[observed] >= 0.5).astype(float)
        return float(np.mean(predicted != y))

    if isinstance(estimate, PosteriorDraws):
        estimate = point_estimate(estimate)
    y_hat = linear_predictor(estimate, test)[observed]
    return float(np.mean((y - y_hat) ** 2))


def selection_metrics(selected: np.ndarray, truth_support: np.ndarray) -> SelectionCounts:
    """
    Confusion counts and rates of a selection against the true support.

    fdr is 0 when nothing is selected; fpr is 0 when there are no true nulls.

    Examples:
        >>> m = selection_metrics(np.ones(10, bool), np.arange(10) < 4)
        >>> (m.tp, m.fp, m.accuracy, m.fdr, m.fpr)
        (4, 6, 0.4, 0.6, 1.0)
    """
    selected = np.asarray(selected, dtype=bool).ravel()
    truth_support = np.asarray(truth_support, dtype=bool).ravel()
    if selected.shape != truth_support.shape:
        raise DimensionError(f"selection length {selected.size} != truth length {truth_support.size}")
    tp = int(np.sum(selected & truth_support))
    fp = int(np.sum(selected & ~truth_support))
    fn = int(np.sum(~selected & truth_support))
    tn = int(np.sum(~selected & ~truth_support))
    total = tp + fp + fn + tn
    return SelectionCounts(
        tp=tp, fp=fp, fn=fn, tn=tn,
        accuracy=(tp + tn) / total,
        fdr=fp / (tp + fp) if tp + fp else 0.0,
        fpr=fp / (fp + tn) if fp + tn else 0.0,
    )


def truth_support(truth: SimTruth, include_interactions: bool = False) -> np.ndarray:
    """Nonzero pattern of beta, followed by the flattened Theta when requested."""
    if not include_interactions:
        return truth.support
    return np.concatenate([truth.beta_true != 0, (truth.Theta_true != 0).ravel()])


def score(draws: PosteriorDraws, selected: np.ndarray, truth: SimTruth, test: Dataset,
          n_missing: int = 0, include_interactions: bool = False) -> MetricsReport:
    """Score a fitted chain: posterior-mean errors, test prediction and selection."""
    estimate = point_estimate(draws)
    est_beta, est_theta = estimation_errors(estimate, truth)
    pred = prediction_error(draws if draws.family is Family.BINOMIAL else estimate, test, draws.family)
    counts = selection_metrics(selected, truth_support(truth, include_interactions))
    return MetricsReport(est_beta=est_beta, est_theta=est_theta, pred=pred,
                         accuracy=counts.accuracy, fdr=counts.fdr, fpr=counts.fpr,
                         tp=counts.tp, fp=counts.fp, fn=counts.fn, tn=counts.tn,
                         n_missing=n_missing)


def aggregate_metrics(frame: pd.DataFrame, metrics=METRIC_NAMES) -> pd.DataFrame:
    """
    Mean and sd (ddof=0) per metric across replications, with the "m (s)" display.

    Examples:
        >>> agg = aggregate_metrics(pd.DataFrame({'pred': [1.0, 2.0]}), metrics=('pred',))
        >>> float(agg.loc[0, 'sd']), agg.loc[0, 'display']
        (0.5, '1.50 (0.50)')
    """
    rows = []
    for name in metrics:
        if name not in frame.columns:
            continue
        mean, sd = mean_sd(frame[name].to_numpy(dtype=float))
        rows.append({'metric': name, 'mean': mean, 'sd': sd, 'display': format_mean_sd(mean, sd)})
    return pd.DataFrame(rows, columns=['metric', 'mean', 'sd', 'display'])
