"""
Gibbs kernel for the Gaussian pliable horseshoe.

One iteration: impute missing responses, sweep j = 1..p updating beta_j then
theta_j, then local scales, global scale, intercepts and sigma^2. The
residual y_completed - eta is maintained incrementally and recomputed from
scratch every config.REFRESH_EVERY iterations.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

import config
from modules.errors import NumericalSingularityError, UnsupportedOperationError
from modules.model import (Dataset, Family, GaussianState, Hyperparameters, SamplerConfig,
                           init_state, linear_predictor)
from modules.samplers import (InverseGammaParams, PrecisionGaussian, RngStream, draw_normal,
                              sample_inverse_gamma, sample_precision_gaussian)

logger = logging.getLogger(__name__)


@dataclass
class PosteriorDraws:
    """
    Stored post-burn-in draws, one leading axis entry per stored iteration.

    sigma_sq is None for the binomial family; y_imputed is None unless
    imputations were stored (columns follow missing_index).
    """

    family: Family
    beta0: np.ndarray
    theta0: np.ndarray
    beta: np.ndarray
    Theta: np.ndarray
    tau_sq: np.ndarray
    lambda_sq: np.ndarray
    sigma_sq: Optional[np.ndarray] = None
    y_imputed: Optional[np.ndarray] = None
    missing_index: Optional[np.ndarray] = None
    max_drift: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_stored(self) -> int:
        return self.beta0.shape[0]

    @property
    def p(self) -> int:
        return self.beta.shape[1]

    @property
    def q(self) -> int:
        return self.theta0.shape[1]

    @classmethod
    def allocate(cls, family: Family, n_stored: int, p: int, q: int,
                 n_imputed: int = 0, with_sigma: bool = True) -> "PosteriorDraws":
        return cls(
            family=family,
            beta0=np.empty(n_stored),
            theta0=np.empty((n_stored, q)),
            beta=np.empty((n_stored, p)),
            Theta=np.empty((n_stored, p, q)),
            tau_sq=np.empty(n_stored),
            lambda_sq=np.empty((n_stored, p)),
            sigma_sq=np.empty(n_stored) if with_sigma else None,
            y_imputed=np.empty((n_stored, n_imputed)) if n_imputed else None,
        )


class Residual:
    """r = y_completed - eta(state), updated in O(n) per coordinate move."""

    def __init__(self, state: GaussianState, data: Dataset):
        self.r = state.y_completed - linear_predictor(state, data)

    def refresh(self, state: GaussianState, data: Dataset) -> float:
        """
        Recompute r from scratch.

        Returns:
            float: max |r_maintained - r_fresh| / (1 + max |y_completed|)
        """
        fresh = state.y_completed - linear_predictor(state, data)
        drift = float(np.max(np.abs(self.r - fresh)) / (1.0 + np.max(np.abs(state.y_completed))))
        self.r = fresh
        return drift


class DesignCache:
    """Per-chain products of the fixed design reused by every sweep."""

    def __init__(self, data: Dataset):
        self.x_sq = np.einsum('ij,ij->j', data.X, data.X)
        # Zx[:, j-1, :] = diag(x_j) Z
        self.Zx = data.X[:, :, None] * data.Z[:, None, :]
        self.ZxtZx = np.einsum('ijk,ijl->jkl', self.Zx, self.Zx)
        self.ZtZ = data.Z.T @ data.Z


def draw_local_scales(sq_norms: np.ndarray, nu: np.ndarray, tau_sq: float, d: int,
                      rng: RngStream) -> tuple:
    """
    lambda_j^2 ~ IG((d+1)/2, 1/nu_j + s_j/(2 tau^2)), then nu_j ~ IG(1/2, 1 + 1/lambda_j^2).

    s_j is the squared norm of block j and d its dimension. Shared by the
    Gaussian and logistic kernels.
    """
    lambda_sq = sample_inverse_gamma(
        InverseGammaParams((d + 1) / 2.0, 1.0 / nu + sq_norms / (2.0 * tau_sq)), rng)
    nu = sample_inverse_gamma(InverseGammaParams(0.5, 1.0 + 1.0 / lambda_sq), rng)
    return np.atleast_1d(lambda_sq), np.atleast_1d(nu)


def draw_global_scale(sq_norms: np.ndarray, lambda_sq: np.ndarray, xi: float, d: int,
                      rng: RngStream) -> tuple:
    """tau^2 ~ IG((p d + 1)/2, 1/xi + sum_j s_j / (2 lambda_j^2)), then xi ~ IG(1/2, 1 + 1/tau^2)."""
    p = sq_norms.shape[0]
    tau_sq = sample_inverse_gamma(
        InverseGammaParams((p * d + 1) / 2.0, 1.0 / xi + 0.5 * float(np.sum(sq_norms / lambda_sq))), rng)
    xi = sample_inverse_gamma(InverseGammaParams(0.5, 1.0 + 1.0 / tau_sq), rng)
    return tau_sq, xi


def _block_sq_norms(state: GaussianState, pliable: bool) -> np.ndarray:
    sq = state.beta ** 2
    if pliable and state.Theta.shape[1]:
        sq = sq + np.sum(state.Theta ** 2, axis=1)
    return sq


def _block_dim(q: int, pliable: bool) -> int:
    return 1 + q if pliable else 1


def update_beta_j(state: GaussianState, data: Dataset, residual: Residual, j: int,
                  rng: RngStream, cache: Optional[DesignCache] = None) -> None:
    """
    Draw beta_j from its Gaussian full conditional (j = 1..p), in place.

    The partial residual r^(-j) - Z_j theta_j equals r + x_j beta_j, so only
    the beta_j contribution is added back.
    """
    col = j - 1
    x = data.X[:, col]
    x_sq = cache.x_sq[col] if cache is not None else float(x @ x)
    old = state.beta[col]
    target = residual.r + x * old
    precision = x_sq / state.sigma_sq + 1.0 / (state.lambda_sq[col] * state.tau_sq)
    variance = 1.0 / precision
    mean = variance * float(x @ target) / state.sigma_sq
    new = draw_normal(mean, variance, rng, block=j)
    state.beta[col] = new
    residual.r += (old - new) * x


def update_theta_j(state: GaussianState, data: Dataset, residual: Residual, j: int,
                   rng: RngStream, cache: Optional[DesignCache] = None) -> None:
    """
    Draw theta_j ~ N(V Z_j' r^(-j) / sigma^2, V), V = (Z_j'Z_j/sigma^2 + I/(lambda_j^2 tau^2))^-1.

    Z_j = diag(x_j) Z. A no-op when q = 0.
    """
    q = data.q
    if q == 0:
        return
    col = j - 1
    if cache is not None:
        Zj = cache.Zx[:, col, :]
        ZjtZj = cache.ZxtZx[col]
    else:
        Zj = data.X[:, col][:, None] * data.Z
        ZjtZj = Zj.T @ Zj
    old = state.Theta[col].copy()
    target = residual.r + Zj @ old
    precision = ZjtZj / state.sigma_sq + np.eye(q) / (state.lambda_sq[col] * state.tau_sq)
    linear = Zj.T @ target / state.sigma_sq
    new = sample_precision_gaussian(PrecisionGaussian(precision, linear), rng, block=j)
    state.Theta[col] = new
    residual.r -= Zj @ (new - old)


def update_local_scales(state: GaussianState, rng: RngStream, pliable: bool = True) -> None:
    """Local scales lambda^2 and nu for every predictor. The block dimension is 1 + q, or 1 without interactions."""
    q = state.Theta.shape[1]
    sq = _block_sq_norms(state, pliable)
    state.lambda_sq, state.nu = draw_local_scales(sq, state.nu, state.tau_sq, _block_dim(q, pliable), rng)


def update_global_scale(state: GaussianState, rng: RngStream, pliable: bool = True) -> None:
    """Global scale tau^2 and its auxiliary xi."""
    q = state.Theta.shape[1]
    sq = _block_sq_norms(state, pliable)
    state.tau_sq, state.xi = draw_global_scale(sq, state.lambda_sq, state.xi, _block_dim(q, pliable), rng)


def update_intercepts(state: GaussianState, data: Dataset, residual: Residual, rng: RngStream,
                      hyper: Hyperparameters, pliable: bool = True,
                      cache: Optional[DesignCache] = None) -> None:
    """
    Intercept block: beta0 then theta0.

    theta0 stays at zero when pliable is off or q = 0.
    """
    n = data.n
    old = state.beta0
    variance = 1.0 / (n / state.sigma_sq + 1.0 / hyper.sigma0_sq)
    mean = variance * float(np.sum(residual.r + old)) / state.sigma_sq
    new = draw_normal(mean, variance, rng, block=0)
    state.beta0 = new
    residual.r += old - new

    if not pliable or data.q == 0:
        return
    Z = data.Z
    ZtZ = cache.ZtZ if cache is not None else Z.T @ Z
    old_theta0 = state.theta0.copy()
    target = residual.r + Z @ old_theta0
    precision = ZtZ / state.sigma_sq + np.eye(data.q) / hyper.sigma0_sq
    linear = Z.T @ target / state.sigma_sq
    new_theta0 = sample_precision_gaussian(PrecisionGaussian(precision, linear), rng, block=0)
    state.theta0 = new_theta0
    residual.r -= Z @ (new_theta0 - old_theta0)


def update_sigma2(state: GaussianState, data: Dataset, residual: Residual, rng: RngStream,
                  hyper: Hyperparameters) -> None:
    """Noise variance sigma^2 ~ IG(a0 + n/2, b0 + ||r||^2 / 2)."""
    shape = hyper.a0 + data.n / 2.0
    rate = hyper.b0 + 0.5 * float(residual.r @ residual.r)
    state.sigma_sq = sample_inverse_gamma(InverseGammaParams(shape, rate), rng)


def impute_missing(state: GaussianState, data: Dataset, rng: RngStream,
                   residual: Optional[Residual] = None) -> None:
    """
    Draw every missing y_i from N(eta_i, sigma^2) at the current parameters.

    Observed entries are untouched. When a maintained residual is given,
    eta_i is read off it and its masked entries are reset to y_i - eta_i.

    Raises:
        UnsupportedOperationError: dataset is not Gaussian
    """
    if data.family is not Family.GAUSSIAN:
        raise UnsupportedOperationError("response imputation is only defined for the Gaussian family")
    mask = data.missing_mask
    if not mask.any():
        return
    if residual is not None:
        eta = state.y_completed[mask] - residual.r[mask]
    else:
        eta = linear_predictor(state, data)[mask]
    drawn = eta + np.sqrt(state.sigma_sq) * rng.standard_normal(eta.shape[0])
    state.y_completed[mask] = drawn
    if residual is not None:
        residual.r[mask] = drawn - eta


def _store(draws: PosteriorDraws, k: int, state: GaussianState, mask: np.ndarray) -> None:
    draws.beta0[k] = state.beta0
    draws.theta0[k] = state.theta0
    draws.beta[k] = state.beta
    draws.Theta[k] = state.Theta
    draws.tau_sq[k] = state.tau_sq
    draws.lambda_sq[k] = state.lambda_sq
    draws.sigma_sq[k] = state.sigma_sq
    if draws.y_imputed is not None:
        draws.y_imputed[k] = state.y_completed[mask]


def gibbs_iteration(state: GaussianState, data: Dataset, residual: Residual, rng: RngStream,
                    hyper: Hyperparameters, pliable: bool, cache: DesignCache) -> None:
    """One full sweep in the fixed update order."""
    if data.n_missing:
        impute_missing(state, data, rng, residual)
    for j in range(1, data.p + 1):
        update_beta_j(state, data, residual, j, rng, cache)
        if pliable:
            update_theta_j(state, data, residual, j, rng, cache)
    update_local_scales(state, rng, pliable)
    update_global_scale(state, rng, pliable)
    update_intercepts(state, data, residual, rng, hyper, pliable, cache)
    update_sigma2(state, data, residual, rng, hyper)


def run_chain(data: Dataset, sampler: SamplerConfig,
              hyper: Optional[Hyperparameters] = None,
              rng: Optional[RngStream] = None) -> PosteriorDraws:
    """
    Run one Gaussian chain and return the thinned post-burn-in draws.

    Args:
        data: Gaussian dataset, missing responses allowed
        sampler: Chain length, thinning, seed and model switches
        hyper: Prior hyperparameters (defaults from config)
        rng: Stream to use instead of one seeded from sampler.seed

    Raises:
        UnsupportedOperationError: dataset is not Gaussian
        NumericalSingularityError: annotated with the failing iteration
    """
    if data.family is not Family.GAUSSIAN:
        raise UnsupportedOperationError("run_chain expects a Gaussian dataset; use run_chain_logistic")
    hyper = hyper or Hyperparameters()
    rng = rng or RngStream.from_seed(sampler.seed)
    pliable = sampler.pliable

    state = init_state(data, sampler, rng)
    residual = Residual(state, data)
    cache = DesignCache(data)
    mask = data.missing_mask
    n_imputed = data.n_missing if sampler.store_imputations else 0
    draws = PosteriorDraws.allocate(Family.GAUSSIAN, sampler.n_stored, data.p, data.q, n_imputed)
    if n_imputed:
        draws.missing_index = np.flatnonzero(mask)

    logger.info(f"Gaussian chain: n={data.n}, p={data.p}, q={data.q}, missing={data.n_missing}, "
                f"iterations={sampler.n_iter}, stored={sampler.n_stored}, pliable={pliable}")
    started = time.perf_counter()
    max_drift = 0.0
    k = 0
    for it in range(sampler.n_iter):
        try:
            gibbs_iteration(state, data, residual, rng, hyper, pliable, cache)
        except NumericalSingularityError as exc:
            raise exc.with_iteration(it) from exc
        if not np.isfinite(state.sigma_sq) or state.sigma_sq <= 0:
            raise NumericalSingularityError(f"sigma^2 became {state.sigma_sq}").with_iteration(it)

        if (it + 1) % sampler.refresh_every == 0:
            drift = residual.refresh(state, data)
            max_drift = max(max_drift, drift)
            if drift > config.DRIFT_TOLERANCE:
                logger.warning(f"Residual drift {drift:.3e} above tolerance at iteration {it + 1}")
        if (it + 1) % config.PROGRESS_EVERY == 0:
            logger.debug(f"iter {it + 1}: sigma2={state.sigma_sq:.4g}, tau2={state.tau_sq:.4g}, "
                         f"max|beta|={np.max(np.abs(state.beta)):.4g}")

        if it >= sampler.burn_in and (it - sampler.burn_in) % sampler.thin == 0:
            _store(draws, k, state, mask)
            k += 1

    draws.max_drift = max_drift
    draws.diagnostics['elapsed_seconds'] = time.perf_counter() - started
    logger.info(f"Gaussian chain finished in {draws.diagnostics['elapsed_seconds']:.1f}s "
                f"({k} draws stored, max residual drift {max_drift:.2e})")
    return draws
