"""
Posterior post-processing: means, equal-tailed credible intervals,
interval-based selection, chain diagnostics and the tables written by the
fit command.

Scalar chains are addressed by name with 1-based indices: beta0,
theta0[k], beta[j], Theta[j,k], lambda_sq[j], tau_sq, sigma_sq and
y_imputed[i] (i is the position among the stored imputations).
"""

import logging
import re
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

import config
from modules.errors import ConfigError, DimensionError, UnsupportedOperationError
from modules.gibbs_gaussian import PosteriorDraws
from modules.model import Dataset, PointEstimate, Standardization

logger = logging.getLogger(__name__)

_NAME_PATTERN = re.compile(r'^(\w+?)(?:\[(\d+)(?:,(\d+))?\])?$')


@dataclass(frozen=True)
class CredibleInterval:
    lower: float
    upper: float
    level: float

    def excludes_zero(self) -> bool:
        return self.lower > 0 or self.upper < 0


@dataclass
class AcfResult:
    """Sample ACF at lags 0..max_lag; values is all-NaN when degenerate."""

    name: str
    values: np.ndarray
    degenerate: bool = False


def _check_level(level: float) -> None:
    if not 0.0 < level < 1.0:
        raise ConfigError(f"credible level must lie in (0, 1), got {level}")


def _stored(draws: PosteriorDraws, base: str) -> Optional[np.ndarray]:
    return {
        'beta0': draws.beta0,
        'theta0': draws.theta0,
        'beta': draws.beta,
        'Theta': draws.Theta,
        'lambda_sq': draws.lambda_sq,
        'tau_sq': draws.tau_sq,
        'sigma_sq': draws.sigma_sq,
        'y_imputed': draws.y_imputed,
    }.get(base)


def chain(draws: PosteriorDraws, name: str) -> np.ndarray:
    """
    The stored chain of one scalar parameter.

    Raises:
        ConfigError: unknown parameter name or index out of range
    """
    match = _NAME_PATTERN.match(name.replace(' ', ''))
    if not match:
        raise ConfigError(f"cannot parse parameter name '{name}'")
    base, i, k = match.group(1), match.group(2), match.group(3)
    source = _stored(draws, base)
    if source is None:
        raise ConfigError(f"parameter '{name}' is not available in these draws")

    indices = tuple(int(v) - 1 for v in (i, k) if v is not None)
    if len(indices) != source.ndim - 1:
        raise ConfigError(f"parameter '{name}' needs {source.ndim - 1} index(es)")
    for axis, idx in enumerate(indices, start=1):
        if not 0 <= idx < source.shape[axis]:
            raise ConfigError(f"index out of range in '{name}'")
    return source[(slice(None),) + indices]


def scalar_names(draws: PosteriorDraws, include_scales: bool = True) -> List[str]:
    """Every scalar chain name, in the column order used by draws.csv."""
    names = ['beta0']
    names += [f"theta0[{k}]" for k in range(1, draws.q + 1)]
    names += [f"beta[{j}]" for j in range(1, draws.p + 1)]
    names += [f"Theta[{j},{k}]" for j in range(1, draws.p + 1) for k in range(1, draws.q + 1)]
    if include_scales:
        names += [f"lambda_sq[{j}]" for j in range(1, draws.p + 1)]
        names.append('tau_sq')
        if draws.sigma_sq is not None:
            names.append('sigma_sq')
    return names


def posterior_mean(draws: PosteriorDraws, name: str) -> Union[float, np.ndarray]:
    """
    Mean over the stored draws of one parameter.

    A scalar name such as 'beta[2]' gives a float; a bare block name
    ('beta', 'Theta', 'theta0', ...) gives the elementwise mean array.

    Raises:
        ConfigError: unknown parameter name
        DimensionError: no draws were stored
    """
    if draws.n_stored == 0:
        raise DimensionError("cannot average an empty chain")
    block = _stored(draws, name)
    if block is not None and block.ndim > 1:
        return block.mean(axis=0)
    return float(np.mean(chain(draws, name)))


def point_estimate(draws: PosteriorDraws) -> PointEstimate:
    """Posterior means of all coefficients."""
    return PointEstimate(beta0=posterior_mean(draws, 'beta0'), theta0=posterior_mean(draws, 'theta0'),
                         beta=posterior_mean(draws, 'beta'), Theta=posterior_mean(draws, 'Theta'))


def interval_from_samples(samples: np.ndarray, level: float = config.DEFAULT_LEVEL) -> CredibleInterval:
    """Equal-tailed interval by linear interpolation of order statistics."""
    _check_level(level)
    alpha = (1.0 - level) / 2.0
    lower, upper = np.quantile(np.asarray(samples, dtype=float), [alpha, 1.0 - alpha])
    return CredibleInterval(float(lower), float(upper), level)


def credible_interval(draws: PosteriorDraws, name: str,
                      level: float = config.DEFAULT_LEVEL) -> CredibleInterval:
    return interval_from_samples(chain(draws, name), level)


def _selected(samples: np.ndarray, level: float) -> np.ndarray:
    """Column-wise: interval excludes zero and the chain is not constant."""
    alpha = (1.0 - level) / 2.0
    lower, upper = np.quantile(samples, [alpha, 1.0 - alpha], axis=0)
    degenerate = np.ptp(samples, axis=0) == 0
    return ((lower > 0) | (upper < 0)) & ~degenerate


def select_variables(draws: PosteriorDraws, level: float = config.DEFAULT_LEVEL,
                     include_interactions: bool = False) -> np.ndarray:
    """
    Predictor j is selected when the level interval of beta_j excludes zero.

    With include_interactions the result is extended by one flag per
    Theta entry (row-major), decided by the same rule.
    """
    _check_level(level)
    selected = _selected(draws.beta, level)
    if include_interactions:
        theta = draws.Theta.reshape(draws.n_stored, -1)
        if theta.shape[1]:
            selected = np.concatenate([selected, _selected(theta, level)])
    return selected


def autocorrelation(draws_or_chain, name: Optional[str] = None,
                    max_lag: int = config.DEFAULT_ACF_MAX_LAG) -> AcfResult:
    """
    Sample ACF at lags 0..max_lag (capped at n - 1), lag 0 equal to 1.

    Accepts PosteriorDraws plus a parameter name, or a raw 1-d chain.
    A constant chain has no ACF: the result is flagged degenerate.
    """
    if isinstance(draws_or_chain, PosteriorDraws):
        x = chain(draws_or_chain, name)
    else:
        x = np.asarray(draws_or_chain, dtype=float).ravel()
    label = name or 'chain'
    if max_lag < 0:
        raise ConfigError(f"max_lag must be non-negative, got {max_lag}")
    n = x.shape[0]
    max_lag = min(max_lag, n - 1)
    centred = x - x.mean()
    denom = float(centred @ centred)
    if n < 2 or denom == 0.0:
        logger.warning(f"ACF of '{label}' is undefined: chain is constant")
        return AcfResult(label, np.full(max_lag + 1, np.nan), degenerate=True)
    values = np.array([1.0] + [float(centred[:-k] @ centred[k:]) / denom for k in range(1, max_lag + 1)])
    return AcfResult(label, values)


def trace_frame(draws: PosteriorDraws, names: Sequence[str]) -> pd.DataFrame:
    """One column per requested scalar chain, indexed by stored draw."""
    frame = pd.DataFrame({name: chain(draws, name) for name in names})
    frame.index.name = 'draw'
    return frame


def acf_frame(draws: PosteriorDraws, names: Sequence[str],
              max_lag: int = config.DEFAULT_ACF_MAX_LAG) -> pd.DataFrame:
    results = [autocorrelation(draws, name, max_lag) for name in names]
    frame = pd.DataFrame({r.name: r.values for r in results})
    frame.index.name = 'lag'
    return frame


def draws_frame(draws: PosteriorDraws) -> pd.DataFrame:
    return trace_frame(draws, scalar_names(draws))


def summary_table(draws: PosteriorDraws, selection_level: float = config.DEFAULT_LEVEL,
                  include_interactions: bool = False) -> pd.DataFrame:
    """
    One row per coefficient (and scale parameter): mean, sd, 95% and 90%
    intervals and the selection flag.

    selected is set for beta[j] rows, and for Theta rows when
    include_interactions is on; other rows carry False.
    """
    names = scalar_names(draws)
    samples = np.column_stack([chain(draws, name) for name in names])
    q95 = np.quantile(samples, [0.025, 0.975], axis=0)
    q90 = np.quantile(samples, [0.05, 0.95], axis=0)
    frame = pd.DataFrame({
        'parameter': names,
        'mean': samples.mean(axis=0),
        'sd': samples.std(axis=0, ddof=1) if draws.n_stored > 1 else np.zeros(len(names)),
        'lower_95': q95[0],
        'upper_95': q95[1],
        'lower_90': q90[0],
        'upper_90': q90[1],
        'selected': False,
    })
    flags = select_variables(draws, selection_level, include_interactions)
    beta_rows = [names.index(f"beta[{j}]") for j in range(1, draws.p + 1)]
    frame.loc[beta_rows, 'selected'] = flags[:draws.p]
    if include_interactions and draws.q:
        theta_rows = [names.index(f"Theta[{j},{k}]")
                      for j in range(1, draws.p + 1) for k in range(1, draws.q + 1)]
        frame.loc[theta_rows, 'selected'] = flags[draws.p:]
    return frame


def intervals_table(draws: PosteriorDraws,
                    levels: Sequence[float] = (config.DEFAULT_LEVEL, config.SECONDARY_LEVEL)) -> pd.DataFrame:
    """Long format: parameter, level, lower, upper for every coefficient and level."""
    rows = []
    for name in scalar_names(draws, include_scales=False):
        samples = chain(draws, name)
        for level in levels:
            ci = interval_from_samples(samples, level)
            rows.append({'parameter': name, 'level': level, 'lower': ci.lower, 'upper': ci.upper})
    return pd.DataFrame(rows, columns=['parameter', 'level', 'lower', 'upper'])


def selection_table(draws: PosteriorDraws, predictor_names: Sequence[str],
                    level: float = config.DEFAULT_LEVEL) -> pd.DataFrame:
    """Per predictor: name, selection flag, posterior mean and interval of beta_j."""
    if len(predictor_names) != draws.p:
        raise DimensionError(f"{len(predictor_names)} predictor names for p={draws.p}")
    selected = select_variables(draws, level)
    rows = []
    for j in range(1, draws.p + 1):
        ci = interval_from_samples(draws.beta[:, j - 1], level)
        rows.append({'predictor': j, 'name': predictor_names[j - 1], 'selected': bool(selected[j - 1]),
                     'mean': float(draws.beta[:, j - 1].mean()), 'lower': ci.lower, 'upper': ci.upper})
    return pd.DataFrame(rows, columns=['predictor', 'name', 'selected', 'mean', 'lower', 'upper'])


def linear_predictor_draws(draws: PosteriorDraws, data: Dataset) -> np.ndarray:
    """eta for every stored draw, shape (n_stored, n)."""
    if draws.p != data.p or draws.q != data.q:
        raise DimensionError(f"draws (p={draws.p}, q={draws.q}) do not match data (p={data.p}, q={data.q})")
    eta = draws.beta0[:, None] + draws.beta @ data.X.T
    if data.q:
        eta = eta + draws.theta0 @ data.Z.T + np.einsum('ij,sjk,ik->si', data.X, draws.Theta, data.Z)
    return eta


def imputation_table(draws: PosteriorDraws, level: float = config.DEFAULT_LEVEL) -> pd.DataFrame:
    """Posterior mean and interval of each imputed response (0-based row index)."""
    if draws.y_imputed is None or draws.missing_index is None:
        raise UnsupportedOperationError("no imputation draws were stored")
    alpha = (1.0 - level) / 2.0
    lower, upper = np.quantile(draws.y_imputed, [alpha, 1.0 - alpha], axis=0)
    return pd.DataFrame({
        'row': draws.missing_index,
        'mean': draws.y_imputed.mean(axis=0),
        'lower': lower,
        'upper': upper,
    })


def back_transform(draws: PosteriorDraws, std: Standardization) -> PosteriorDraws:
    """
    Map draws fitted on standardized X back to the original X scale.

    beta_j = beta~_j / s_j, theta_j = theta~_j / s_j, and the intercepts absorb
    the centring: beta0 = beta0~ - sum_j m_j beta_j, theta0 = theta0~ - sum_j m_j theta_j.
    Scale parameters are left as drawn.
    """
    scales = np.asarray(std.scales, dtype=float)
    means = np.asarray(std.means, dtype=float)
    if scales.shape[0] != draws.p:
        raise DimensionError(f"standardization has {scales.shape[0]} columns, draws have p={draws.p}")
    beta = draws.beta / scales
    Theta = draws.Theta / scales[None, :, None]
    beta0 = draws.beta0 - beta @ means
    theta0 = draws.theta0 - np.einsum('j,sjk->sk', means, Theta)
    return replace(draws, beta0=beta0, theta0=theta0, beta=beta, Theta=Theta,
                   diagnostics=dict(draws.diagnostics, back_transformed=True))
