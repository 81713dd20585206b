"""
Random-variate generation for the Gibbs kernels.

Provides a seeded, splittable stream plus the three exact samplers the
kernels need: inverse-gamma (shape/rate), multivariate normal given a
precision matrix, and Polya-Gamma PG(1, z).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence
from scipy.linalg import cholesky, solve_triangular, LinAlgError
from scipy.special import log_ndtr

import config
from modules.errors import NumericalSingularityError, ParameterDomainError

logger = logging.getLogger(__name__)

# Truncation point of the Jacobi-type proposal used by the PG(1, z) sampler.
_PG_TRUNC = 0.64
_PG_TRUNC_RECIP = 1.0 / _PG_TRUNC

ArrayLike = Union[float, np.ndarray]


@dataclass
class RngStream:
    """
    Reproducible random stream.

    Wraps a PCG64 generator seeded through a SeedSequence, so a stream can be
    split into statistically independent child streams (one per chain or
    replication). Streams must not be shared between concurrent callers.

    Examples:
        >>> a, b = RngStream.from_seed(7), RngStream.from_seed(7)
        >>> bool(a.generator.integers(0, 2**32) == b.generator.integers(0, 2**32))
        True
    """

    seed_sequence: SeedSequence
    generator: Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.generator = Generator(PCG64(self.seed_sequence))

    @classmethod
    def from_seed(cls, seed: int) -> "RngStream":
        if seed < 0 or seed >= 2 ** 64:
            raise ParameterDomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        return cls(SeedSequence(int(seed)))

    @property
    def seed(self) -> int:
        return int(self.seed_sequence.entropy)

    def spawn(self, n: int) -> List["RngStream"]:
        """Split off n independent child streams."""
        return [RngStream(child) for child in self.seed_sequence.spawn(n)]

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, size=None):
        return self.generator.random(size)

    def exponential(self, size=None):
        return self.generator.standard_exponential(size)

    def gamma(self, shape, size=None):
        return self.generator.standard_gamma(shape, size)


@dataclass(frozen=True, eq=False)
class InverseGammaParams:
    """
    Inverse-gamma parameters in shape/rate form.

    Density is proportional to x^-(shape+1) exp(-rate / x). The rate may be
    an array, giving one independent draw per entry (all draws share shape).
    """

    shape: float
    rate: ArrayLike

    def __post_init__(self):
        if not np.isfinite(self.shape) or self.shape <= 0:
            raise ParameterDomainError(f"inverse-gamma shape must be positive, got {self.shape}")
        rate = np.asarray(self.rate, dtype=float)
        if not np.all(np.isfinite(rate)) or np.any(rate <= 0):
            raise ParameterDomainError(f"inverse-gamma rate must be positive, got {self.rate}")


@dataclass(frozen=True, eq=False)
class PrecisionGaussian:
    """
    Gaussian N(P^-1 h, P^-1) described by its precision P and linear term h.
    """

    precision: np.ndarray
    linear: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.precision, dtype=float))
        h = np.atleast_1d(np.asarray(self.linear, dtype=float))
        if P.shape[0] != P.shape[1] or P.shape[0] != h.shape[0]:
            raise ParameterDomainError(
                f"precision {P.shape} and linear term {h.shape} do not conform")
        scale = max(np.max(np.abs(P)), 1.0)
        if np.max(np.abs(P - P.T)) > 1e-10 * scale:
            raise ParameterDomainError("precision matrix is not symmetric")
        object.__setattr__(self, 'precision', P)
        object.__setattr__(self, 'linear', h)

    @property
    def dim(self) -> int:
        return self.linear.shape[0]


def sample_inverse_gamma(params: InverseGammaParams, rng: RngStream) -> ArrayLike:
    """
    Draw from IG(shape, rate) as rate / Gamma(shape, 1).

    Args:
        params: Shape and (scalar or array) rate
        rng: Stream to draw from

    Returns:
        A positive float, or an array shaped like params.rate
    """
    rate = np.asarray(params.rate, dtype=float)
    g = rng.gamma(params.shape, size=rate.shape if rate.ndim else None)
    draw = rate / g
    if np.ndim(draw) == 0:
        return float(draw)
    return draw


def _cholesky_with_ridge(P: np.ndarray, block: int) -> np.ndarray:
    try:
        return cholesky(P, lower=True)
    except LinAlgError:
        pass
    d = P.shape[0]
    base = np.trace(P) / d
    for scale in config.RIDGE_SCALES:
        eps = scale * base if base > 0 else scale
        logger.warning(f"Cholesky failed for block {block}; retrying with ridge {eps:.3e}")
        try:
            return cholesky(P + eps * np.eye(d), lower=True)
        except LinAlgError:
            continue
    raise NumericalSingularityError("precision matrix not positive-definite after ridge", block=block)


def precision_cholesky_mean(g: PrecisionGaussian, block: int = -1):
    """
    Factor the precision and solve for the mean without forming an inverse.

    Returns:
        tuple: (lower Cholesky factor L with P = L L^T, mean P^-1 h)
    """
    L = _cholesky_with_ridge(g.precision, block)
    u = solve_triangular(L, g.linear, lower=True)
    mean = solve_triangular(L, u, lower=True, trans='T')
    return L, mean


def sample_precision_gaussian(g: PrecisionGaussian, rng: RngStream, block: int = -1) -> np.ndarray:
    """
    Draw x ~ N(P^-1 h, P^-1) via the Cholesky factor of P.

    x = mean + L^-T z with z standard normal, so Cov[x] = (L L^T)^-1.

    Raises:
        NumericalSingularityError: Cholesky fails even after ridge escalation
    """
    L, mean = precision_cholesky_mean(g, block)
    z = rng.standard_normal(g.dim)
    return mean + solve_triangular(L, z, lower=True, trans='T')


def pg1_mean(z: ArrayLike) -> ArrayLike:
    """E[PG(1, z)] = tanh(z/2) / (2z), with the limit 1/4 at z = 0."""
    z = np.abs(np.asarray(z, dtype=float))
    small = z < 1e-8
    safe = np.where(small, 1.0, z)
    return np.where(small, 0.25, np.tanh(safe / 2.0) / (2.0 * safe))


def pg1_variance(z: ArrayLike) -> ArrayLike:
    """Var[PG(1, z)] = (sinh z - z) / (4 z^3 cosh^2(z/2)), with the limit 1/24 at z = 0."""
    z = np.abs(np.asarray(z, dtype=float))
    small = z < 1e-4
    safe = np.where(small, 1.0, z)
    var = (np.sinh(safe) - safe) / (4.0 * safe ** 3 * np.cosh(safe / 2.0) ** 2)
    return np.where(small, 1.0 / 24.0, var)


def _series_coefficient(n: int, x: np.ndarray) -> np.ndarray:
    # n-th term of the alternating series for the J*(1) density, piecewise at the truncation point
    k = (n + 0.5) * np.pi
    out = np.empty_like(x)
    right = x > _PG_TRUNC
    out[right] = k * np.exp(-0.5 * k * k * x[right])
    left = ~right
    xl = x[left]
    expnt = -1.5 * (np.log(0.5 * np.pi) + np.log(xl)) + np.log(k) - 2.0 * (n + 0.5) ** 2 / xl
    out[left] = np.exp(expnt)
    return out


def _exponential_mass(c: np.ndarray) -> np.ndarray:
    # Probability of proposing from the exponential tail rather than the truncated inverse Gaussian
    t = _PG_TRUNC
    fz = 0.125 * np.pi ** 2 + 0.5 * c * c
    b = np.sqrt(1.0 / t) * (t * c - 1.0)
    a = -np.sqrt(1.0 / t) * (t * c + 1.0)
    x0 = np.log(fz) + fz * t
    with np.errstate(over='ignore'):
        qdivp = 4.0 / np.pi * (np.exp(x0 - c + log_ndtr(b)) + np.exp(x0 + c + log_ndtr(a)))
    return 1.0 / (1.0 + qdivp)


def _truncated_inverse_gaussian(c: np.ndarray, rng: RngStream) -> np.ndarray:
    """Inverse Gaussian with mean 1/c and shape 1, truncated to (0, 0.64]."""
    t = _PG_TRUNC
    out = np.empty_like(c)

    # mean above the truncation point: propose from the truncated Levy law, accept by tilting
    pending = np.flatnonzero(c < _PG_TRUNC_RECIP)
    while pending.size:
        m = pending.size
        e1 = rng.exponential(m)
        e2 = rng.exponential(m)
        bad = e1 * e1 > 2.0 * e2 / t
        while bad.any():
            nb = int(bad.sum())
            e1[bad] = rng.exponential(nb)
            e2[bad] = rng.exponential(nb)
            bad = e1 * e1 > 2.0 * e2 / t
        x = t / (1.0 + e1 * t) ** 2
        cc = c[pending]
        accept = rng.uniform(m) <= np.exp(-0.5 * cc * cc * x)
        out[pending[accept]] = x[accept]
        pending = pending[~accept]

    # mean below the truncation point: inverse Gaussian draws rejected above t
    pending = np.flatnonzero(c >= _PG_TRUNC_RECIP)
    while pending.size:
        m = pending.size
        mu = 1.0 / c[pending]
        y = rng.standard_normal(m) ** 2
        mu_y = mu * y
        x = mu + 0.5 * mu * mu_y - 0.5 * mu * np.sqrt(4.0 * mu_y + mu_y * mu_y)
        flip = rng.uniform(m) > mu / (mu + x)
        x[flip] = mu[flip] ** 2 / x[flip]
        accept = x <= t
        out[pending[accept]] = x[accept]
        pending = pending[~accept]
    return out


def sample_polya_gamma_1(z: ArrayLike, rng: RngStream) -> ArrayLike:
    """
    Exact draws from PG(1, z), elementwise.

    Uses the alternating-series rejection sampler on the tilted Jacobi
    distribution J*(1, |z|/2); a draw X of J* gives X / 4 ~ PG(1, z).

    Args:
        z: Tilting parameter(s); any sign, must be finite
        rng: Stream to draw from

    Returns:
        Positive float or array with the shape of z

    Raises:
        ParameterDomainError: z contains non-finite values
    """
    z_arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z_arr)):
        raise ParameterDomainError("Polya-Gamma tilting parameter must be finite")
    c = 0.5 * np.abs(z_arr).ravel()
    out = np.empty_like(c)
    fz = 0.125 * np.pi ** 2 + 0.5 * c * c
    p_exp = _exponential_mass(c)

    pending = np.arange(c.size)
    while pending.size:
        m = pending.size
        cp = c[pending]
        x = np.empty(m)
        from_exp = rng.uniform(m) < p_exp[pending]
        x[from_exp] = _PG_TRUNC + rng.exponential(int(from_exp.sum())) / fz[pending][from_exp]
        x[~from_exp] = _truncated_inverse_gaussian(cp[~from_exp], rng)

        s = _series_coefficient(0, x)
        u = rng.uniform(m) * s
        accepted = np.zeros(m, dtype=bool)
        active = np.ones(m, dtype=bool)
        n = 0
        while active.any():
            n += 1
            idx = np.flatnonzero(active)
            if n % 2 == 1:
                s[idx] -= _series_coefficient(n, x[idx])
                hit = u[idx] <= s[idx]
                accepted[idx[hit]] = True
                active[idx[hit]] = False
            else:
                s[idx] += _series_coefficient(n, x[idx])
                active[idx[u[idx] > s[idx]]] = False

        out[pending[accepted]] = 0.25 * x[accepted]
        pending = pending[~accepted]

    if z_arr.ndim == 0:
        return float(out[0])
    return out.reshape(z_arr.shape)


def draw_normal(mean: float, variance: float, rng: RngStream, block: Optional[int] = None) -> float:
    """Scalar normal draw; a non-positive variance is a numerical singularity."""
    if not np.isfinite(variance) or variance <= 0:
        raise NumericalSingularityError(f"non-positive conditional variance {variance}",
                                        block=-1 if block is None else block)
    return float(mean + np.sqrt(variance) * rng.standard_normal())
