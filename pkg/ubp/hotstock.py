"""Closed forms for the two-asset "hot stock" market.

Asset 1 doubles in the first half of every period and halves in the second;
asset 2 is cash. Perfect trading (all in the stock, then all in cash) doubles
capital every period, while the best constant-rebalanced portfolio, (1/2, 1/2),
only grows by 9/8. Under the uniform prior the universal bilinear portfolio
has the exact wealth

    W_hat(t) = (2^(t+5) - 12(t+2) - 2^(1-t)) / ((t+1)(t+2)(t+3))

and exact weights b12(t) -> 1, b21(t) ~ 4/(3t), b11(t) = b22(t) ~ 2/t. The
diagonal weights are taken from the sum constraint (1 - b12 - b21) / 2.

Everything is evaluated in factored form, 2^(t+k) times a correction that
stays O(1), so the formulas hold for t in the millions.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from ubp.errors import ConvergenceError, InputError
from ubp.market_data import MarketHistory


logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)
LOG_9_8 = math.log(9.0 / 8.0)

# The exact double sum is only cross-checked up to this many periods.
SERIES_LIMIT = 20


@dataclass(frozen=True, eq=False)
class HotStockReport:
    t: int
    log_universal_wealth: float
    log_hindsight_wealth: float
    log_crp_hindsight_wealth: float
    log_ratio: float
    weights: np.ndarray

    @property
    def universal_wealth(self):
        return _exp(self.log_universal_wealth)

    @property
    def hindsight_wealth(self):
        return _exp(self.log_hindsight_wealth)

    @property
    def crp_hindsight_wealth(self):
        return _exp(self.log_crp_hindsight_wealth)

    @property
    def ratio(self):
        return math.exp(self.log_ratio)


def _exp(log_value):
    return math.exp(log_value) if log_value < 709 else math.inf


def hotstock_history(t):
    """t periods of x = (2, 1), y = (1/2, 1)."""
    if t < 0:
        raise InputError("The number of periods cannot be negative")
    halves = np.tile([[2.0, 1.0], [0.5, 1.0]], (t, 1))
    return MarketHistory(("stock", "cash"), 2, halves)


def log_universal_wealth(t):
    # 2^(t+5) - 12(t+2) - 2^(1-t) = 2^(t+5) (1 - (12(t+2) + 2^(1-t)) 2^-(t+5))
    correction = math.ldexp(12.0 * (t + 2) + math.ldexp(1.0, 1 - t), -(t + 5))
    numerator = (t + 5) * LOG2 + math.log1p(-correction)
    return numerator - math.log((t + 1) * (t + 2) * (t + 3))


def universal_weights(t):
    """B_hat after t periods as a 2x2 array."""
    # Both weights share the denominator 3(t+4)[2^(t+4) - 6(t+2) - 2^-t]; divide through by 2^(t+4).
    tail = math.ldexp(1.0, -t)
    denominator = 3.0 * (t + 4) * (1.0 - math.ldexp(6.0 * (t + 2) + tail, -(t + 4)))

    b12 = ((3 * t - 4) + math.ldexp(18.0 * (t + 4) + tail, -(t + 4))) / denominator
    b21 = (4.0 - math.ldexp(36.0 * (t + 1) + tail * (3 * t + 19), -(t + 4))) / denominator
    diagonal = (1.0 - b12 - b21) / 2

    return np.array([[diagonal, b12], [b21, diagonal]])


def hotstock_closed_forms(t):
    if t < 0:
        raise InputError("The number of periods cannot be negative")

    log_universal = log_universal_wealth(t)
    return HotStockReport(
        t=t,
        log_universal_wealth=log_universal,
        log_hindsight_wealth=t * LOG2,
        log_crp_hindsight_wealth=t * LOG_9_8,
        log_ratio=log_universal - t * LOG2,
        weights=universal_weights(t),
    )


def hotstock_universal_1linear_series(t):
    """The universal constant-rebalanced wealth as an exact rational double sum."""
    total = Fraction(0)
    for k1 in range(t + 1):
        for k2 in range(t - k1 + 1):
            multinomial = math.factorial(t) // (math.factorial(k1) * math.factorial(k2) * math.factorial(t - k1 - k2))
            total += Fraction(multinomial * (-1) ** k2, 2 ** (k1 + k2) * (k1 + 2 * k2 + 1))
    return total


def log_hotstock_universal_1linear(t):
    """log of the integral over c in [0, 1] of ((1 + c)(1 - c/2))^t.

    The integrand peaks at c = 1/2 with value (9/8)^t, which is factored out.
    """
    if t < 0:
        raise InputError("The number of periods cannot be negative")

    def scaled(c):
        return math.exp(t * (math.log1p(c) + math.log1p(-c / 2) - LOG_9_8))

    value, error = quad(scaled, 0.0, 1.0, points=[0.5], epsabs=0.0, epsrel=1e-13, limit=200)
    logger.debug("1-linear quadrature for t=%d: %.16g (error estimate %.3g)", t, value, error)
    return t * LOG_9_8 + math.log(value)


def hotstock_universal_1linear(t):
    """Wealth of the universal constant-rebalanced portfolio after t periods.

    Integrated numerically and, for t up to SERIES_LIMIT, checked against
    the exact double sum.

    Raises:
        ConvergenceError if the two evaluations disagree
    """
    log_wealth = log_hotstock_universal_1linear(t)

    if t <= SERIES_LIMIT:
        exact = float(hotstock_universal_1linear_series(t))
        if abs(math.exp(log_wealth) / exact - 1.0) > 1e-10:
            raise ConvergenceError(
                "1-linear quadrature {!r} disagrees with the exact sum {!r} at t={}".format(math.exp(log_wealth), exact, t)
            )

    return _exp(log_wealth)


def hotstock_trajectory(periods):
    """Wealth and weight curves for t = 0 .. periods.

    Returns:
        Rows of dicts: t, universal bilinear, universal 1-linear, perfect
        trader and best-CRP wealth, and the four universal bilinear weights.
    """
    rows = []
    for t in range(periods + 1):
        report = hotstock_closed_forms(t)
        weights = report.weights
        rows.append({
            "t": t,
            "universal_bilinear_wealth": report.universal_wealth,
            "universal_1linear_wealth": _exp(log_hotstock_universal_1linear(t)),
            "perfect_trader_wealth": report.hindsight_wealth,
            "best_crp_wealth": report.crp_hindsight_wealth,
            "b_1_1": weights[0, 0],
            "b_1_2": weights[0, 1],
            "b_2_1": weights[1, 0],
            "b_2_2": weights[1, 1],
        })
    return rows
