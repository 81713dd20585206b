"""
Core data model: datasets, hyperparameters, chain states, the pliable
linear predictor and block designs.

Predictor indices are 1-based (j = 1..p) wherever block 0 denotes the
intercept block [1, Z].
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

import config
from modules.errors import DimensionError, InvalidDatasetError, ConfigError
from modules.samplers import RngStream

logger = logging.getLogger(__name__)


class Family(str, Enum):
    GAUSSIAN = 'gaussian'
    BINOMIAL = 'binomial'


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float if a.dtype != bool else bool, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Predictors X (n x p), modifiers Z (n x q), response y and missing mask.

    Immutable after construction: arrays are copied and made read-only, so a
    Dataset can be shared between threads and chains.
    """

    X: np.ndarray
    Z: np.ndarray
    y: np.ndarray
    missing_mask: Optional[np.ndarray] = None
    family: Family = Family.GAUSSIAN
    x_names: Optional[tuple] = None
    z_names: Optional[tuple] = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        n = y.shape[0]
        Z = np.asarray(self.Z, dtype=float)
        if Z.ndim == 1:
            Z = Z.reshape(n, -1) if Z.size else np.zeros((n, 0))
        mask = (np.zeros(n, dtype=bool) if self.missing_mask is None
                else np.asarray(self.missing_mask, dtype=bool).ravel())
        family = Family(self.family)

        if n < 1 or X.shape[1] < 1:
            raise DimensionError(f"need n >= 1 and p >= 1, got X shape {X.shape}")
        if X.shape[0] != n or Z.shape[0] != n or mask.shape[0] != n:
            raise DimensionError(
                f"row counts differ: X {X.shape[0]}, Z {Z.shape[0]}, y {n}, mask {mask.shape[0]}")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(Z)):
            raise InvalidDatasetError("X and Z must be finite (missing covariates are not supported)")
        if not np.all(np.isfinite(y[~mask])):
            raise InvalidDatasetError("observed responses must be finite")
        if mask.all():
            raise InvalidDatasetError("all responses are missing")
        if family is Family.BINOMIAL:
            if mask.any():
                raise InvalidDatasetError("missing responses are not supported for the binomial family")
            if not np.all(np.isin(y, (0.0, 1.0))):
                raise InvalidDatasetError("binomial responses must be 0 or 1")

        y = y.copy()
        y[mask] = np.nan
        object.__setattr__(self, 'X', _readonly(X))
        object.__setattr__(self, 'Z', _readonly(Z))
        object.__setattr__(self, 'y', _readonly(y))
        object.__setattr__(self, 'missing_mask', _readonly(mask))
        object.__setattr__(self, 'family', family)
        if self.x_names is not None and len(self.x_names) != X.shape[1]:
            raise DimensionError("x_names length must equal p")
        if self.z_names is not None and len(self.z_names) != Z.shape[1]:
            raise DimensionError("z_names length must equal q")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def q(self) -> int:
        return self.Z.shape[1]

    @property
    def n_missing(self) -> int:
        return int(self.missing_mask.sum())

    @property
    def observed_y(self) -> np.ndarray:
        return self.y[~self.missing_mask]

    def predictor_names(self) -> list:
        if self.x_names is not None:
            return list(self.x_names)
        return [f"x{j}" for j in range(1, self.p + 1)]

    def modifier_names(self) -> list:
        if self.z_names is not None:
            return list(self.z_names)
        return [f"z{k}" for k in range(1, self.q + 1)]

    def subset(self, rows: np.ndarray) -> "Dataset":
        """Dataset restricted to the given row indices."""
        return Dataset(self.X[rows], self.Z[rows], self.y[rows], self.missing_mask[rows],
                       self.family, self.x_names, self.z_names)


@dataclass(frozen=True)
class Hyperparameters:
    sigma0_sq: float = config.SIGMA0_SQ
    a0: float = config.A0
    b0: float = config.B0

    def __post_init__(self):
        for name in ('sigma0_sq', 'a0', 'b0'):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class SamplerConfig:
    """Chain length, storage and model switches."""

    n_iter: int = config.DEFAULT_N_ITER
    burn_in: int = config.DEFAULT_BURN_IN
    seed: int = config.DEFAULT_SEED
    thin: int = config.DEFAULT_THIN
    pliable: bool = True
    store_imputations: bool = False
    refresh_every: int = config.REFRESH_EVERY

    def __post_init__(self):
        if self.n_iter < 1:
            raise ConfigError(f"n_iter must be positive, got {self.n_iter}")
        if not 0 <= self.burn_in < self.n_iter:
            raise ConfigError(f"burn_in must lie in [0, n_iter), got {self.burn_in}")
        if self.thin < 1:
            raise ConfigError(f"thin must be positive, got {self.thin}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.refresh_every < 1:
            raise ConfigError("refresh_every must be positive")

    @property
    def stored_iterations(self) -> range:
        return range(self.burn_in, self.n_iter, self.thin)

    @property
    def n_stored(self) -> int:
        return len(self.stored_iterations)


@dataclass
class GaussianState:
    """Full parameter state of the Gaussian chain. Theta row j-1 holds theta_j."""

    beta0: float
    theta0: np.ndarray
    beta: np.ndarray
    Theta: np.ndarray
    lambda_sq: np.ndarray
    nu: np.ndarray
    tau_sq: float
    xi: float
    sigma_sq: float
    y_completed: np.ndarray


@dataclass
class LogisticState:
    """
    Logistic chain state in block form.

    gamma has shape (p+1, 1+q): row 0 is (beta0, theta0), row j is
    (beta_j, theta_j). The coefficient properties are views into gamma.
    """

    gamma: np.ndarray
    omega: np.ndarray
    lambda_sq: np.ndarray
    nu: np.ndarray
    tau_sq: float
    xi: float

    @property
    def beta0(self) -> float:
        return float(self.gamma[0, 0])

    @property
    def theta0(self) -> np.ndarray:
        return self.gamma[0, 1:]

    @property
    def beta(self) -> np.ndarray:
        return self.gamma[1:, 0]

    @property
    def Theta(self) -> np.ndarray:
        return self.gamma[1:, 1:]


@dataclass
class PointEstimate:
    """Coefficient point estimate (e.g. posterior means) for scoring and prediction."""

    beta0: float
    theta0: np.ndarray
    beta: np.ndarray
    Theta: np.ndarray


CoefficientHolder = Union[GaussianState, LogisticState, PointEstimate]


def linear_predictor(state: CoefficientHolder, data: Dataset) -> np.ndarray:
    """
    eta_i = beta0 + Z_i theta0 + sum_j x_ij (beta_j + Z_i theta_j).

    The interaction sum is evaluated as rowsum((X Theta) * Z).

    Raises:
        DimensionError: state and data dimensions disagree
    """
    beta = np.asarray(state.beta, dtype=float)
    Theta = np.asarray(state.Theta, dtype=float).reshape(beta.shape[0], -1)
    theta0 = np.asarray(state.theta0, dtype=float).ravel()
    if beta.shape[0] != data.p or Theta.shape != (data.p, data.q) or theta0.shape[0] != data.q:
        raise DimensionError(
            f"state (p={beta.shape[0]}, Theta {Theta.shape}, q0={theta0.shape[0]}) "
            f"does not match data (p={data.p}, q={data.q})")
    eta = state.beta0 + data.X @ beta
    if data.q:
        eta = eta + data.Z @ theta0 + np.sum((data.X @ Theta) * data.Z, axis=1)
    return eta


def block_design(data: Dataset, j: int) -> np.ndarray:
    """
    Block design W_j: [1, Z] for j = 0, [x_j, x_j * Z] for j = 1..p.

    Raises:
        DimensionError: j outside 0..p
    """
    if not 0 <= j <= data.p:
        raise DimensionError(f"block index {j} outside 0..{data.p}")
    if j == 0:
        return np.column_stack([np.ones(data.n), data.Z])
    x = data.X[:, j - 1]
    return np.column_stack([x, x[:, None] * data.Z])


def init_state(data: Dataset, sampler: SamplerConfig, rng: RngStream) -> Union[GaussianState, LogisticState]:
    """
    Deterministic starting state for a chain.

    Coefficients at zero, all shrinkage scales at one. Gaussian: sigma^2 is
    the sample variance of the observed responses (floored), missing
    responses start at the observed mean. Logistic: omega = 1/4.

    The stream is accepted for interface symmetry with the kernels; the
    starting point itself uses no randomness.
    """
    observed = data.observed_y
    if observed.size == 0:
        raise InvalidDatasetError("all responses are missing")
    p, q = data.p, data.q

    if data.family is Family.BINOMIAL:
        return LogisticState(
            gamma=np.zeros((p + 1, 1 + q)),
            omega=np.full(data.n, 0.25),
            lambda_sq=np.ones(p),
            nu=np.ones(p),
            tau_sq=1.0,
            xi=1.0,
        )

    sigma_sq = float(np.var(observed, ddof=1)) if observed.size > 1 else 1.0
    sigma_sq = max(sigma_sq, config.SIGMA_SQ_FLOOR)
    y_completed = np.array(data.y, dtype=float)
    y_completed[data.missing_mask] = observed.mean()
    return GaussianState(
        beta0=0.0,
        theta0=np.zeros(q),
        beta=np.zeros(p),
        Theta=np.zeros((p, q)),
        lambda_sq=np.ones(p),
        nu=np.ones(p),
        tau_sq=1.0,
        xi=1.0,
        sigma_sq=sigma_sq,
        y_completed=y_completed,
    )


@dataclass(frozen=True)
class Standardization:
    """
    Column centring/scaling applied to X, kept so draws can be mapped back.

    With x~ = (x - m) / s, original-scale coefficients are beta_j = beta~_j / s_j,
    theta_j = theta~_j / s_j, and the intercepts absorb the centring:
    beta0 = beta0~ - sum_j m_j beta_j, theta0 = theta0~ - sum_j m_j theta_j.
    """

    means: np.ndarray
    scales: np.ndarray

    def apply(self, data: Dataset) -> Dataset:
        X = (data.X - self.means) / self.scales
        return Dataset(X, data.Z, data.y, data.missing_mask, data.family, data.x_names, data.z_names)


def standardize(data: Dataset) -> tuple:
    """
    Centre and scale each X column to unit sample sd.

    Constant columns keep scale 1.

    Returns:
        tuple: (standardized Dataset, Standardization)
    """
    means = data.X.mean(axis=0)
    scales = data.X.std(axis=0, ddof=1) if data.n > 1 else np.ones(data.p)
    scales = np.where(scales > 0, scales, 1.0)
    std = Standardization(means=means, scales=scales)
    logger.info(f"Standardized {data.p} predictor columns")
    return std.apply(data), std
