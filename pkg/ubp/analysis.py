"""Competitive ratios, their uniform lower bound and excess growth rates.

The competitive ratio R = W_hat / D is the share of the hindsight-optimal
wealth the universal portfolio actually earns. If the prior density never
drops below f, then after T periods

    R >= f / ((T + 1)(T + 2) ... (T + m^H - 1)),

so R shrinks only polynomially and the excess growth rate -log(R) / T
vanishes. All arithmetic here is in the log domain.
"""
import logging
import math
from dataclasses import dataclass

from scipy.special import gammaln

from ubp.errors import InputError
from ubp.hindsight import kelly_hindsight
from ubp.universal import PriorSpec, universal_wealth_exact_kelly


logger = logging.getLogger(__name__)

# Numerical slack when comparing ratios with bounds and with one.
DEFAULT_SLACK = 1e-9

# Width of the Monte Carlo confidence band, in standard errors.
BAND_WIDTH = 3.0


@dataclass(frozen=True)
class RatioReport:
    log_ratio: float
    log_bound: float
    excess_growth_per_period: float
    bound_satisfied: bool
    log_ratio_band: tuple = (0.0, 0.0)
    periods: int = 0


@dataclass(frozen=True)
class ExcessGrowth:
    """Per-period excess growth of the hindsight optimum over the universal portfolio.

    Attributes:
        rate: -log(R) / T
        bound_rate: the worst case allowed by the ratio bound, -log(bound) / T
        asymptote: (m^H - 1) log(T) / T, the leading behaviour of bound_rate
    """

    rate: float
    bound_rate: float = math.nan
    asymptote: float = math.nan


@dataclass(frozen=True)
class DominanceReport:
    """The finite-horizon inequality log(W_hat / S_hat) >= log(bound) + log(D / S*).

    It follows from W_hat >= bound * D and S_hat <= S*, so a failure points at
    an estimation or optimization error.
    """

    log_advantage: float
    log_guarantee: float
    crp_shortfall: float
    holds: bool


def competitive_ratio(log_universal, log_hindsight, slack=DEFAULT_SLACK):
    """log R = log W_hat - log D.

    R cannot exceed one. Values above one by more than `slack` point at an
    optimizer or estimator problem; they are logged and clipped to one.

    Raises:
        InputError if either wealth is not finite (a ruined benchmark cannot be compared)
    """
    if not math.isfinite(log_hindsight):
        raise InputError("The hindsight benchmark is ruined; the competitive ratio is undefined")
    if not math.isfinite(log_universal):
        raise InputError("The universal wealth is not finite; the competitive ratio is undefined")

    log_ratio = log_universal - log_hindsight
    if log_ratio > slack:
        logger.warning("Competitive ratio exp(%.3g) exceeds one; clipping", log_ratio)
    return min(log_ratio, 0.0)


def ratio_lower_bound(dim, order, periods, density_floor):
    """log of f / ((T + 1) ... (T + m^H - 1)).

    A zero density floor makes the bound vacuous and the result is -inf.
    """
    if periods < 0 or density_floor < 0:
        raise InputError("The ratio bound needs T >= 0 and a nonnegative density floor")

    if density_floor == 0:
        logger.debug("Density floor is zero; the ratio bound is vacuous")
        return -math.inf

    return _log_bound(dim, order, periods, math.log(density_floor))


def _log_bound(dim, order, periods, log_density_floor):
    size = dim ** order
    return float(log_density_floor + gammaln(periods + 1) - gammaln(periods + size))


def prior_lower_bound(prior, dim, order, periods):
    """The ratio bound for a Dirichlet prior, with its density floor kept in log form."""
    return _log_bound(dim, order, periods, prior.log_density_floor(dim, order))


def density_floor(prior, dim, order):
    return prior.density_floor(dim, order)


def excess_growth(log_ratio, periods, dim=None, order=None, prior=PriorSpec()):
    """-log(R) / T, alongside the worst case the ratio bound allows.

    The bound columns are only filled in when dim and order are given.
    """
    if periods < 1:
        raise InputError("Excess growth needs at least one period")

    rate = -log_ratio / periods
    if dim is None or order is None:
        return ExcessGrowth(rate=rate)

    size = dim ** order
    return ExcessGrowth(
        rate=rate,
        bound_rate=-prior_lower_bound(prior, dim, order, periods) / periods,
        asymptote=(size - 1) * math.log(periods) / periods,
    )


def ratio_report(log_universal, log_hindsight, dim, order, periods, prior=PriorSpec(),
                 log_universal_se=0.0, slack=DEFAULT_SLACK):
    """Competitive ratio, its bound and the excess growth for one horizon.

    Monte Carlo wealth estimates carry a standard error; the ratio is then
    reported with a band of BAND_WIDTH standard errors, and the bound counts
    as satisfied when the band reaches it.
    """
    log_ratio = competitive_ratio(log_universal, log_hindsight, slack=slack)
    log_bound = prior_lower_bound(prior, dim, order, periods)

    band = (log_ratio - BAND_WIDTH * log_universal_se, min(log_ratio + BAND_WIDTH * log_universal_se, 0.0))
    satisfied = band[1] >= log_bound - slack
    if not satisfied:
        logger.warning("Ratio bound violated after %d periods: log R %.6g < log bound %.6g", periods, log_ratio, log_bound)

    return RatioReport(
        log_ratio=log_ratio,
        log_bound=log_bound,
        excess_growth_per_period=-log_ratio / periods if periods > 0 else 0.0,
        bound_satisfied=satisfied,
        log_ratio_band=band,
        periods=periods,
    )


def kelly_competitive_ratio(counts, prior=PriorSpec()):
    """Exact log R on a horse-race history, from its counts alone."""
    if counts.total == 0:
        return 0.0
    return universal_wealth_exact_kelly(counts, prior) - kelly_hindsight(counts).log_wealth


def dominance_check(log_universal, log_hindsight, log_universal_crp, log_hindsight_crp, log_bound,
                    slack=DEFAULT_SLACK):
    """Checks the H-linear universal portfolio against the 1-linear (CRP) one.

    Args:
        log_universal, log_hindsight: log W_hat and log D for the H-linear class
        log_universal_crp, log_hindsight_crp: log S_hat and log S* for CRPs
        log_bound: the H-linear ratio bound for the same horizon
    """
    advantage = log_universal - log_universal_crp
    guarantee = log_bound + log_hindsight - log_hindsight_crp
    shortfall = log_hindsight_crp - log_universal_crp

    return DominanceReport(
        log_advantage=advantage,
        log_guarantee=guarantee,
        crp_shortfall=shortfall,
        holds=advantage >= guarantee - slack and shortfall >= -slack,
    )
