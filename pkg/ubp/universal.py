"""The universal H-linear portfolio.

The universal portfolio trades the performance-weighted average of every
order-H strategy under a Dirichlet prior,

    B_hat = E_f[B * W_B] / E_f[W_B],

and its wealth equals the prior average of all strategies' wealths. Here the
prior is represented by a fixed cloud of particles drawn once from the
Dirichlet and reweighted by their realized growth every period
(self-normalized importance sampling, no resampling). Horse-race histories
also have an exact answer through the Dirichlet moment identity.
"""
import concurrent.futures
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from ubp.errors import ApproximationWarning, InputError, RuinError
from ubp.strategy import MultilinearStrategy, period_tensor, replication_portfolios, uniform_strategy


logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 100000
DEFAULT_SEED = 42

# Warn once the effective sample size falls below this share of the cloud.
ESS_WARNING_FRACTION = 0.001


@dataclass(frozen=True)
class PriorSpec:
    """A symmetric Dirichlet(alpha) prior over the strategy simplex.

    alpha = 1 is the uniform prior, alpha = 1/2 the Jeffreys-type prior.
    """

    concentration: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.concentration) and self.concentration > 0):
            raise InputError("The prior concentration must be positive")

    @property
    def is_uniform(self):
        return self.concentration == 1.0

    def log_density_floor(self, dim, order):
        """Log of the smallest value the prior density takes on the simplex.

        The density is taken with respect to Lebesgue measure on the first
        k - 1 coordinates, so the uniform prior has the constant density
        (k - 1)!. For alpha < 1 the minimum sits at the centre of the simplex;
        for alpha > 1 the density vanishes on the boundary.
        """
        size = dim ** order
        alpha = self.concentration

        if alpha == 1.0:
            return float(gammaln(size))
        if alpha > 1.0:
            return -math.inf

        normalizer = gammaln(size * alpha) - size * gammaln(alpha)
        return float(normalizer + size * (1.0 - alpha) * math.log(size))

    def density_floor(self, dim, order):
        log_floor = self.log_density_floor(dim, order)
        return math.exp(log_floor) if log_floor < 709 else math.inf


def particle_growth(particles, tensor, workers=1):
    """Growth factor of every particle over one period; rows of `particles` are flat strategies."""
    if workers <= 1 or len(particles) < 2 * workers:
        return particles @ tensor

    chunks = np.array_split(particles, workers)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(lambda chunk: chunk @ tensor, chunks)))


@dataclass(frozen=True, eq=False)
class UniversalState:
    """The particle approximation of the universal portfolio after some periods.

    Attributes:
        prior: the Dirichlet prior the particles were drawn from
        dim, order: m and H
        particles: (n, m**H) array of flat strategies, shared between states
        log_weights: log of each particle's wealth so far (-inf once ruined)
        log_universal_wealth: log-wealth realized by trading B_hat each period
        current_strategy: B_hat, the strategy for the next period
        periods: number of periods absorbed
    """

    prior: PriorSpec
    dim: int
    order: int
    particles: np.ndarray
    log_weights: np.ndarray
    log_universal_wealth: float
    current_strategy: MultilinearStrategy
    periods: int = 0
    workers: int = 1

    @property
    def n_samples(self):
        return len(self.particles)

    @property
    def normalized_weights(self):
        return np.exp(self.log_weights - logsumexp(self.log_weights))

    @property
    def ess(self):
        """Effective sample size, (sum w)^2 / sum w^2."""
        return float(np.exp(2 * logsumexp(self.log_weights) - logsumexp(2 * self.log_weights)))

    @property
    def log_mean_particle_wealth(self):
        """Log of the plain average of particle wealths, the Monte Carlo estimate of E_f[W_B]."""
        return float(logsumexp(self.log_weights) - math.log(self.n_samples))

    @property
    def log_wealth_standard_error(self):
        """Standard error of the log-wealth estimate (relative error of the mean wealth)."""
        n = self.n_samples
        return math.sqrt(max(n / self.ess - 1.0, 0.0) / n)

    @property
    def strategy_standard_errors(self):
        """Delta-method standard error of every entry of B_hat."""
        weights = self.normalized_weights
        deviations = self.particles - self.current_strategy.weights
        return np.sqrt((weights ** 2) @ (deviations ** 2))


def initial_state(dim, order, prior=PriorSpec(), n_samples=DEFAULT_SAMPLES, seed=DEFAULT_SEED, workers=1):
    """Draws the particle cloud for a fresh universal portfolio.

    The same (seed, n_samples) always produces the same cloud.
    """
    if n_samples < 1:
        raise InputError("The universal portfolio needs at least one particle")

    size = dim ** order
    rng = np.random.default_rng(seed)
    particles = rng.dirichlet(np.full(size, prior.concentration), size=n_samples)
    particles.setflags(write=False)

    log_weights = np.zeros(n_samples)
    log_weights.setflags(write=False)

    logger.debug("Drew %d particles from Dirichlet(%g) over %d weights", n_samples, prior.concentration, size)

    return UniversalState(
        prior=prior,
        dim=dim,
        order=order,
        particles=particles,
        log_weights=log_weights,
        log_universal_wealth=0.0,
        # A symmetric Dirichlet prior has the simplex centre as its mean.
        current_strategy=uniform_strategy(dim, order),
        workers=workers,
    )


def universal_step(state, halves):
    """Trades B_hat over one period and reweights the particle cloud.

    Args:
        state: the UniversalState before the period
        halves: the period's H return vectors

    Returns:
        The UniversalState after the period

    Raises:
        RuinError if every particle (hence B_hat) loses everything
    """
    if len(halves) != state.order or any(len(vector) != state.dim for vector in halves):
        raise InputError("Period returns do not match the universal portfolio's assets and order")

    period = state.periods + 1
    growth = particle_growth(state.particles, period_tensor(halves), state.workers)

    realized = float(state.normalized_weights @ growth)
    if not realized > 0:
        raise RuinError("The universal portfolio was ruined", period=period)

    with np.errstate(divide="ignore"):
        log_weights = state.log_weights + np.log(growth)
    log_weights.setflags(write=False)

    weights = np.exp(log_weights - logsumexp(log_weights))
    current = MultilinearStrategy(state.order, state.dim, weights @ state.particles)

    updated = UniversalState(
        prior=state.prior,
        dim=state.dim,
        order=state.order,
        particles=state.particles,
        log_weights=log_weights,
        log_universal_wealth=state.log_universal_wealth + math.log(realized),
        current_strategy=current,
        periods=period,
        workers=state.workers,
    )

    ess = updated.ess
    logger.debug("Period %d: universal return %.6g, ESS %.1f", period, realized, ess)
    if ess < ESS_WARNING_FRACTION * updated.n_samples:
        warnings.warn(
            "Effective sample size {:.1f} of {} particles after period {}".format(ess, updated.n_samples, period),
            ApproximationWarning,
        )

    return updated


def universal_wealth_exact_kelly(counts, prior=PriorSpec()):
    """Exact log-wealth of the universal portfolio on a horse-race history.

    Only the counts matter: E_f[prod_i b_i^n_i] under Dirichlet(alpha) is
    Gamma(k alpha) / Gamma(k alpha + T) * prod_i Gamma(alpha + n_i) / Gamma(alpha),
    which for the uniform prior is (k-1)! prod n_i! / (T + k - 1)!.
    """
    alpha = prior.concentration
    size = counts.counts.size
    n = counts.counts.astype(float)

    log_wealth = gammaln(size * alpha) - gammaln(size * alpha + counts.total)
    log_wealth += np.sum(gammaln(alpha + n) - gammaln(alpha))

    return float(log_wealth)


def portfolio_view(state, x=None):
    """The portfolios B_hat asks for within the next period.

    Returns p_hat, the first sub-period portfolio (B_hat summed over all but
    its first index), and for bilinear strategies, once the first-half
    returns x are known, q_hat = B_hat'x / x'B_hat 1 for the second half.
    """
    if x is None:
        weights = state.current_strategy.weights
        return weights.reshape(state.dim, -1).sum(axis=1), None
    return replication_portfolios(state.current_strategy, x)
