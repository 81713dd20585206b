"""
Simulation scenarios: Settings I-VI, high-dimensional, missing-response,
no-interaction and logistic variants.

Setting   Z            X
I         N(0, 1)      N(0, I_p)
II        Ber(0.5)     N(0, I_p)
III       N(0, 1)      N(0, Sigma), Sigma_ij = rho^|i-j|
IV        Ber(0.5)     N(0, Sigma)
V         N(0, 1)      Ber(0.5)
VI        Ber(0.5)     Ber(0.5)
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy.special import expit

import config
from modules.errors import ConfigError, ParameterDomainError
from modules.model import Dataset, Family, PointEstimate, linear_predictor
from modules.samplers import RngStream

logger = logging.getLogger(__name__)


class Setting(str, Enum):
    I = 'I'
    II = 'II'
    III = 'III'
    IV = 'IV'
    V = 'V'
    VI = 'VI'

    @property
    def z_binary(self) -> bool:
        return self in (Setting.II, Setting.IV, Setting.VI)

    @property
    def x_binary(self) -> bool:
        return self in (Setting.V, Setting.VI)

    @property
    def correlated(self) -> bool:
        return self in (Setting.III, Setting.IV)

    @classmethod
    def parse(cls, value) -> "Setting":
        """Accepts 'I'..'VI' (any case) or 1..6."""
        if isinstance(value, Setting):
            return value
        text = str(value).strip().upper()
        if text.isdigit():
            index = int(text)
            members = list(cls)
            if 1 <= index <= len(members):
                return members[index - 1]
        try:
            return cls(text)
        except ValueError:
            raise ConfigError(f"unknown setting '{value}', expected one of I..VI") from None


@dataclass(frozen=True)
class SimSpec:
    """
    One simulation scenario.

    rho_x is used only by the correlated-design Settings III and IV; every
    other Setting draws independent columns and ignores it (see
    effective_rho). A correlated no-interaction scenario is therefore
    Setting III or IV with interactions=False.
    """

    setting: Setting = Setting.I
    n: int = config.DEFAULT_N
    p: int = config.DEFAULT_P
    q: int = config.DEFAULT_Q
    rho_x: float = config.DEFAULT_RHO_X
    missing_fraction: float = 0.0
    interactions: bool = True
    family: Family = Family.GAUSSIAN
    n_test: int = config.DEFAULT_N_TEST
    seed: int = config.DEFAULT_SEED
    noise_sd: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'setting', Setting.parse(self.setting))
        object.__setattr__(self, 'family', Family(self.family))
        if self.n < 1 or self.p < 1 or self.q < 0 or self.n_test < 1:
            raise ConfigError(f"invalid sizes n={self.n}, p={self.p}, q={self.q}, n_test={self.n_test}")
        if not 0.0 <= self.rho_x < 1.0:
            raise ConfigError(f"rho_x must lie in [0, 1), got {self.rho_x}")
        if not 0.0 <= self.missing_fraction < 1.0:
            raise ConfigError(f"missing_fraction must lie in [0, 1), got {self.missing_fraction}")
        if self.family is Family.BINOMIAL and self.missing_fraction > 0:
            raise ConfigError("missing responses are not supported for the binomial family")
        if self.noise_sd < 0:
            raise ConfigError("noise_sd must be non-negative")
        if round(self.missing_fraction * self.n) >= self.n:
            raise ConfigError("missing_fraction would remove every training response")

    @property
    def n_missing(self) -> int:
        return int(round(self.missing_fraction * self.n))

    @property
    def effective_rho(self) -> float:
        """rho_x only applies to the correlated settings."""
        return self.rho_x if self.setting.correlated else 0.0


@dataclass(frozen=True, eq=False)
class SimTruth:
    beta0_true: float
    theta0_true: np.ndarray
    beta_true: np.ndarray
    Theta_true: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return self.beta_true != 0

    def as_estimate(self) -> PointEstimate:
        return PointEstimate(self.beta0_true, self.theta0_true, self.beta_true, self.Theta_true)

    def to_frame(self) -> pd.DataFrame:
        """parameter/value table with scalar chain naming."""
        rows = [('beta0', self.beta0_true)]
        rows += [(f"theta0[{k + 1}]", v) for k, v in enumerate(self.theta0_true)]
        rows += [(f"beta[{j + 1}]", v) for j, v in enumerate(self.beta_true)]
        p, q = self.Theta_true.shape
        rows += [(f"Theta[{j + 1},{k + 1}]", self.Theta_true[j, k]) for j in range(p) for k in range(q)]
        return pd.DataFrame(rows, columns=['parameter', 'value'])


def make_truth(p: int, q: int, interactions: bool = True) -> SimTruth:
    """
    Generating coefficients.

    beta0 = 1, beta = (2, -2, 2, 2, 0, ...), theta0 = -0.5 per modifier,
    theta_1 = 1, theta_2 = -2, theta_3 = (1, 2, ..., q), other rows zero.
    Without interactions theta0 and Theta are zero. Vectors are truncated
    when p < 4.
    """
    beta = np.zeros(p)
    head = np.array([2.0, -2.0, 2.0, 2.0])[:p]
    beta[:head.shape[0]] = head
    Theta = np.zeros((p, q))
    theta0 = np.zeros(q)
    if interactions and q:
        theta0[:] = -0.5
        rows = [np.ones(q), np.full(q, -2.0), np.arange(1, q + 1, dtype=float)]
        for j, row in enumerate(rows[:p]):
            Theta[j] = row
    return SimTruth(beta0_true=1.0, theta0_true=theta0, beta_true=beta, Theta_true=Theta)


def ar1_covariance(p: int, rho: float) -> np.ndarray:
    """Sigma_ij = rho^|i-j|."""
    if p < 1:
        raise ParameterDomainError(f"p must be positive, got {p}")
    if not 0.0 <= rho < 1.0:
        raise ParameterDomainError(f"rho must lie in [0, 1), got {rho}")
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def _draw_design(spec: SimSpec, n: int, rng: RngStream) -> Tuple[np.ndarray, np.ndarray]:
    gen = rng.generator
    if spec.setting.x_binary:
        X = gen.binomial(1, 0.5, size=(n, spec.p)).astype(float)
    elif spec.effective_rho > 0:
        L = np.linalg.cholesky(ar1_covariance(spec.p, spec.effective_rho))
        X = gen.standard_normal((n, spec.p)) @ L.T
    else:
        X = gen.standard_normal((n, spec.p))
    if spec.setting.z_binary:
        Z = gen.binomial(1, 0.5, size=(n, spec.q)).astype(float)
    else:
        Z = gen.standard_normal((n, spec.q))
    return X, Z


def _draw_response(spec: SimSpec, eta: np.ndarray, rng: RngStream) -> np.ndarray:
    if spec.family is Family.BINOMIAL:
        return (rng.uniform(eta.shape[0]) < expit(eta)).astype(float)
    return eta + spec.noise_sd * rng.standard_normal(eta.shape[0])


def _simulate_split(spec: SimSpec, n: int, truth: SimTruth, rng: RngStream,
                    mask: Optional[np.ndarray] = None) -> Dataset:
    X, Z = _draw_design(spec, n, rng)
    shell = Dataset(X, Z, np.zeros(n))
    eta = linear_predictor(truth.as_estimate(), shell)
    y = _draw_response(spec, eta, rng)
    return Dataset(X, Z, y, mask, spec.family)


def generate(spec: SimSpec, rng: Optional[RngStream] = None) -> Tuple[Dataset, Dataset, SimTruth]:
    """
    Draw one training set, one test set and the truth.

    Training data, test data and the missing mask use three independent
    child streams of rng, so changing n_test never changes the training set.

    Returns:
        tuple: (train Dataset, test Dataset, SimTruth)
    """
    rng = rng or RngStream.from_seed(spec.seed)
    train_rng, test_rng, mask_rng = rng.spawn(3)
    truth = make_truth(spec.p, spec.q, spec.interactions)

    mask = np.zeros(spec.n, dtype=bool)
    if spec.n_missing:
        mask[mask_rng.generator.choice(spec.n, size=spec.n_missing, replace=False)] = True

    train = _simulate_split(spec, spec.n, truth, train_rng, mask)
    test = _simulate_split(spec, spec.n_test, truth, test_rng)
    logger.debug(f"Generated Setting {spec.setting.value}: n={spec.n}, p={spec.p}, q={spec.q}, "
                 f"missing={spec.n_missing}, family={spec.family.value}")
    return train, test, truth
