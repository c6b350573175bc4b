"""H-linear trading strategies.

An order-H strategy over m assets is a nonnegative tensor B(i1, ..., iH)
summing to one. Within an investment period split into H sub-periods with
return vectors x^1, ..., x^H, it grows capital by the H-linear form

    sum B(i1, ..., iH) * x^1[i1] * ... * x^H[iH]

H=1 recovers constant-rebalanced portfolios, H=2 bilinear strategies x'By.
Weights are stored flat in row-major order.
"""
import functools
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from ubp.errors import InputError, RuinError


logger = logging.getLogger(__name__)

SUM_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class MultilinearStrategy:
    """An order-H strategy with flat row-major weights of length dim**order.

    Weight sums within SUM_TOLERANCE of one are renormalized; anything further
    off, or any clearly negative weight, is rejected.
    """

    order: int
    dim: int
    weights: np.ndarray

    def __post_init__(self):
        if self.order < 1 or self.dim < 1:
            raise InputError("Strategies need order >= 1 and dim >= 1")

        weights = np.array(self.weights, dtype=float).ravel()
        if weights.size != self.dim ** self.order:
            raise InputError(
                "Expected {} weights for order {} over {} assets, got {}".format(
                    self.dim ** self.order, self.order, self.dim, weights.size
                )
            )

        if not np.all(np.isfinite(weights)) or np.any(weights < -SUM_TOLERANCE):
            raise InputError("Strategy weights must be finite and nonnegative")
        weights = np.clip(weights, 0.0, None)

        total = weights.sum()
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InputError("Strategy weights sum to {!r}, not 1".format(total))

        weights = weights / total
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_tensor(cls, tensor):
        tensor = np.asarray(tensor, dtype=float)
        if tensor.ndim == 0 or len(set(tensor.shape)) != 1:
            raise InputError("Strategy tensors must be cubical")
        return cls(tensor.ndim, tensor.shape[0], tensor.ravel())

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(int(data["order"]), int(data["dim"]), data["weights"])
        except (KeyError, TypeError, ValueError) as e:
            raise InputError("Malformed strategy document: {}".format(e))

    @property
    def tensor(self):
        return self.weights.reshape((self.dim,) * self.order)

    def to_dict(self):
        return {"order": self.order, "dim": self.dim, "weights": self.weights.tolist()}


def uniform_strategy(dim, order):
    """The center of mass of the strategy simplex."""
    size = dim ** order
    return MultilinearStrategy(order, dim, np.full(size, 1.0 / size))


def period_tensor(halves):
    """The flattened outer product x^1 o x^2 o ... o x^H of one period's returns.

    period_growth(B, halves) is the inner product of B.weights with this tensor,
    which lets a whole cloud of strategies be evaluated with one matrix product.
    """
    halves = [np.asarray(vector, dtype=float) for vector in halves]
    return functools.reduce(np.multiply.outer, halves).ravel()


def _check_period(strategy, halves):
    if len(halves) != strategy.order:
        raise InputError(
            "An order-{} strategy needs {} return vectors per period, got {}".format(
                strategy.order, strategy.order, len(halves)
            )
        )
    for vector in halves:
        if len(vector) != strategy.dim:
            raise InputError(
                "Return vector has {} entries but the strategy trades {} assets".format(
                    len(vector), strategy.dim
                )
            )


def period_growth(strategy, halves):
    """The capital growth factor of a strategy over one investment period."""
    _check_period(strategy, halves)
    return float(strategy.weights @ period_tensor(halves))


def wealth(strategy, history):
    """Log of the final wealth of a strategy that starts with $1.

    Returns 0 for an empty history. A period with zero growth ruins the
    strategy and the result is -inf.

    Raises:
        InputError if the history ends in an unfinished period
    """
    if not history.is_complete:
        raise InputError("Pad the unfinished final period before computing wealth")
    if history.dim != strategy.dim or history.order != strategy.order:
        raise InputError("Strategy and history disagree on assets or order")

    log_wealth = 0.0
    for t, halves in enumerate(history.periods()):
        growth = period_growth(strategy, halves)
        if growth <= 0:
            logger.warning("Strategy ruined in period %d", t + 1)
            return -math.inf
        log_wealth += math.log(growth)

    return log_wealth


def embed_crp(portfolio, order):
    """The order-H strategy that rebalances to a fixed portfolio each sub-period."""
    portfolio = _as_portfolio(portfolio)
    tensor = functools.reduce(np.multiply.outer, [portfolio] * order)
    return MultilinearStrategy(order, len(portfolio), tensor.ravel())


def embed_buy_and_hold(portfolio):
    """The bilinear strategy that buys a portfolio and holds it for the whole period."""
    portfolio = _as_portfolio(portfolio)
    return MultilinearStrategy(2, len(portfolio), np.diag(portfolio).ravel())


def _as_portfolio(portfolio):
    portfolio = np.asarray(portfolio, dtype=float)
    if portfolio.ndim != 1 or np.any(portfolio < 0) or abs(portfolio.sum() - 1.0) > SUM_TOLERANCE:
        raise InputError("Portfolios must be nonnegative vectors summing to one")
    return portfolio / portfolio.sum()


def replication_portfolios(strategy, x):
    """The pair of portfolios that replicates a bilinear strategy within a period.

    Hold p = B1 over the first half. Once x is known, rebalance into
    q = B'x / x'B1 for the second half; then (p'x)(q'y) = x'By for every y.

    Returns:
        (p, q) as numpy arrays

    Raises:
        RuinError if the strategy loses everything in the first half (x'B1 = 0)
    """
    if strategy.order != 2:
        raise NotImplementedError("Replication is only defined for bilinear strategies")

    x = np.asarray(x, dtype=float)
    if len(x) != strategy.dim:
        raise InputError("Return vector does not match the strategy's assets")

    matrix = strategy.tensor
    p = matrix.sum(axis=1)
    first_half = float(x @ p)

    if first_half <= 0:
        raise RuinError("First-half ruin leaves the second-half portfolio undefined")

    q = (matrix.T @ x) / first_half
    return p, q


def extremal_decomposition(strategy):
    """Writes a strategy as a convex combination of pure (extremal) strategies.

    Returns:
        A list of (multi-index, weight) pairs, one per nonzero weight, with
        1-based asset indices.
    """
    shape = (strategy.dim,) * strategy.order
    return [
        (tuple(i + 1 for i in np.unravel_index(flat, shape)), float(weight))
        for flat, weight in enumerate(strategy.weights)
        if weight > 0
    ]


def compose_extremal(order, dim, decomposition):
    """Rebuilds a strategy from the output of extremal_decomposition."""
    weights = np.zeros((dim,) * order)
    for index, weight in decomposition:
        weights[tuple(i - 1 for i in index)] += weight
    return MultilinearStrategy(order, dim, weights.ravel())


def multi_indices(dim, order):
    """All 1-based multi-indices in row-major order."""
    return itertools.product(range(1, dim + 1), repeat=order)
