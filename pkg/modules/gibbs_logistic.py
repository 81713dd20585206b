"""
Polya-Gamma augmented Gibbs kernel for binary responses.

Given omega_i ~ PG(1, eta_i) the logistic likelihood is Gaussian in eta
(proportional to exp(kappa' eta - eta' Omega eta / 2), kappa = y - 1/2), so
every coefficient block gamma_j = (beta_j, theta_j) has a multivariate normal
full conditional. Blocks 1..p share the horseshoe scales of the Gaussian
kernel; block 0 (intercepts) has a fixed N(0, sigma0^2 I) prior.
"""

import logging
import time
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

import config
from modules.errors import NumericalSingularityError, UnsupportedOperationError
from modules.gibbs_gaussian import PosteriorDraws, draw_global_scale, draw_local_scales
from modules.model import (Dataset, Family, Hyperparameters, LogisticState, SamplerConfig,
                           block_design, init_state, linear_predictor)
from modules.samplers import PrecisionGaussian, RngStream, sample_polya_gamma_1, sample_precision_gaussian

logger = logging.getLogger(__name__)


@dataclass
class PGWorkspace:
    """kappa = y - 1/2, the PG latents and the maintained linear predictor."""

    kappa: np.ndarray
    omega: np.ndarray
    eta: np.ndarray

    @classmethod
    def create(cls, state: LogisticState, data: Dataset) -> "PGWorkspace":
        return cls(kappa=data.y - 0.5, omega=state.omega.copy(), eta=linear_predictor(state, data))

    def refresh(self, state: LogisticState, data: Dataset) -> float:
        """Recompute eta; returns the relative drift of the maintained copy."""
        fresh = linear_predictor(state, data)
        drift = float(np.max(np.abs(self.eta - fresh)) / (1.0 + np.max(np.abs(fresh))))
        self.eta = fresh
        return drift


def block_designs(data: Dataset, pliable: bool = True) -> List[np.ndarray]:
    """W_0..W_p; without interactions each block keeps only its first column."""
    designs = [block_design(data, j) for j in range(data.p + 1)]
    if not pliable:
        designs = [W[:, :1] for W in designs]
    return designs


def update_omega(state: LogisticState, data: Dataset, ws: PGWorkspace, rng: RngStream) -> None:
    """omega_i ~ PG(1, eta_i) for every observation."""
    ws.omega = np.atleast_1d(sample_polya_gamma_1(ws.eta, rng))
    state.omega = ws.omega


def update_block(state: LogisticState, data: Dataset, ws: PGWorkspace, j: int, rng: RngStream,
                 hyper: Optional[Hyperparameters] = None,
                 designs: Optional[List[np.ndarray]] = None) -> None:
    """
    Draw gamma_j ~ N(V W_j'(kappa - Omega eta_-j), V), V = (W_j' Omega W_j + D_j^-1)^-1.

    D_j = tau^2 lambda_j^2 I for j >= 1 and sigma0^2 I for the intercept
    block. Only the active columns of the block are updated (all of them
    unless interactions are switched off). eta is updated incrementally.
    """
    hyper = hyper or Hyperparameters()
    W = designs[j] if designs is not None else block_design(data, j)
    d = W.shape[1]
    old = state.gamma[j, :d].copy()
    eta_minus = ws.eta - W @ old
    prior_precision = 1.0 / hyper.sigma0_sq if j == 0 else 1.0 / (state.tau_sq * state.lambda_sq[j - 1])
    WtO = W.T * ws.omega
    precision = WtO @ W + prior_precision * np.eye(d)
    linear = W.T @ ws.kappa - WtO @ eta_minus
    new = sample_precision_gaussian(PrecisionGaussian(precision, linear), rng, block=j)
    state.gamma[j, :d] = new
    ws.eta = eta_minus + W @ new


def update_scales_logistic(state: LogisticState, rng: RngStream, pliable: bool = True) -> None:
    """Local and global horseshoe scales from the blocks j = 1..p (intercepts excluded)."""
    blocks = state.gamma[1:] if pliable else state.gamma[1:, :1]
    d = blocks.shape[1]
    sq = np.sum(blocks ** 2, axis=1)
    state.lambda_sq, state.nu = draw_local_scales(sq, state.nu, state.tau_sq, d, rng)
    state.tau_sq, state.xi = draw_global_scale(sq, state.lambda_sq, state.xi, d, rng)


def _store(draws: PosteriorDraws, k: int, state: LogisticState) -> None:
    draws.beta0[k] = state.beta0
    draws.theta0[k] = state.theta0
    draws.beta[k] = state.beta
    draws.Theta[k] = state.Theta
    draws.tau_sq[k] = state.tau_sq
    draws.lambda_sq[k] = state.lambda_sq


def run_chain_logistic(data: Dataset, sampler: SamplerConfig,
                       hyper: Optional[Hyperparameters] = None,
                       rng: Optional[RngStream] = None) -> PosteriorDraws:
    """
    Run one logistic chain: omega, blocks 0..p, scales, per iteration.

    Raises:
        UnsupportedOperationError: dataset is not binomial
        NumericalSingularityError: annotated with the failing iteration
    """
    if data.family is not Family.BINOMIAL:
        raise UnsupportedOperationError("run_chain_logistic expects a binomial dataset")
    if data.n_missing:
        raise UnsupportedOperationError("missing binary responses are not supported")
    hyper = hyper or Hyperparameters()
    rng = rng or RngStream.from_seed(sampler.seed)
    pliable = sampler.pliable

    state = init_state(data, sampler, rng)
    ws = PGWorkspace.create(state, data)
    designs = block_designs(data, pliable)
    draws = PosteriorDraws.allocate(Family.BINOMIAL, sampler.n_stored, data.p, data.q, with_sigma=False)

    logger.info(f"Logistic chain: n={data.n}, p={data.p}, q={data.q}, "
                f"iterations={sampler.n_iter}, stored={sampler.n_stored}, pliable={pliable}")
    started = time.perf_counter()
    max_drift = 0.0
    k = 0
    for it in range(sampler.n_iter):
        try:
            update_omega(state, data, ws, rng)
            for j in range(data.p + 1):
                update_block(state, data, ws, j, rng, hyper, designs)
            update_scales_logistic(state, rng, pliable)
        except NumericalSingularityError as exc:
            raise exc.with_iteration(it) from exc

        if (it + 1) % sampler.refresh_every == 0:
            drift = ws.refresh(state, data)
            max_drift = max(max_drift, drift)
            if drift > config.DRIFT_TOLERANCE:
                logger.warning(f"Linear predictor drift {drift:.3e} above tolerance at iteration {it + 1}")
        if (it + 1) % config.PROGRESS_EVERY == 0:
            logger.debug(f"iter {it + 1}: tau2={state.tau_sq:.4g}, max|beta|={np.max(np.abs(state.beta)):.4g}")

        if it >= sampler.burn_in and (it - sampler.burn_in) % sampler.thin == 0:
            _store(draws, k, state)
            k += 1

    draws.max_drift = max_drift
    draws.diagnostics['elapsed_seconds'] = time.perf_counter() - started
    logger.info(f"Logistic chain finished in {draws.diagnostics['elapsed_seconds']:.1f}s "
                f"({k} draws stored, max eta drift {max_drift:.2e})")
    return draws
