"""The best H-linear strategy in hindsight.

For a complete history the log-wealth of B is sum_t log <B, X_t>, where X_t is
the period tensor of period t. It is concave in B, so the maximizer over the
simplex is found with Frank-Wolfe: the linear oracle on a simplex just picks
the coordinate with the largest gradient, and the Frank-Wolfe gap bounds the
distance to the optimal log-wealth. Away steps let the iterate drop vertices
that carry no weight at the optimum, which the horse-race histories need.

Horse-race (Kelly) histories have the closed form b*_i = n_i / T.
"""
import itertools
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ubp.errors import ConvergenceError, InfeasibleError, InputError, NotKellySequenceError
from ubp.market_data import normalize_half
from ubp.strategy import MultilinearStrategy, period_tensor, uniform_strategy


logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITER = 50000


@dataclass(frozen=True, eq=False)
class HindsightResult:
    strategy: MultilinearStrategy
    log_wealth: float
    iterations: int
    gap_certificate: float
    converged: bool = True


@dataclass(frozen=True, eq=False)
class KellyCounts:
    """How often each extremal strategy was the winner, one count per multi-index."""

    dim: int
    order: int
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64).ravel()
        if counts.size != self.dim ** self.order or np.any(counts < 0):
            raise InputError("Kelly counts need dim**order nonnegative entries")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def tensor(self):
        return self.counts.reshape((self.dim,) * self.order)


def design_matrix(history):
    """One row per complete period: the flattened period tensor."""
    size = history.dim ** history.order
    rows = [period_tensor(halves) for halves in history.periods()]
    return np.array(rows, dtype=float).reshape(len(rows), size)


def _line_search(growth, direction, gamma_max):
    """Exact line search for sum_t log(growth_t + gamma * direction_t) on [0, gamma_max]."""

    def slope(gamma):
        return float(np.sum(direction / (growth + gamma * direction)))

    upper = gamma_max
    falling = direction < 0
    if np.any(falling):
        # Growth hits zero at the first root; stay strictly inside it.
        ruin = float(np.min(-growth[falling] / direction[falling]))
        if ruin <= gamma_max:
            upper = ruin * (1 - 1e-12)

    if slope(upper) >= 0:
        return upper
    if slope(0.0) <= 0:
        return 0.0

    return brentq(slope, 0.0, upper, xtol=1e-15)


def best_in_hindsight(history, order=None, tol=DEFAULT_TOLERANCE, max_iter=DEFAULT_MAX_ITER,
                      start=None, callback=None, strict=False):
    """Maximizes the final wealth over all order-H strategies.

    Args:
        history: a complete MarketHistory
        order: H; defaults to the history's own order
        tol: stop once the Frank-Wolfe gap is at most this
        max_iter: iteration limit
        start: optional warm-start strategy; the uniform strategy otherwise
        callback: called as callback(iteration, log_wealth, gap) every iteration
        strict: raise ConvergenceError instead of returning converged=False

    Returns:
        A HindsightResult whose gap_certificate bounds the shortfall of
        log_wealth from the true optimum.

    Raises:
        InputError if the history ends mid-period
        InfeasibleError if every strategy is ruined
    """
    if order is not None and order != history.order:
        history = history.regroup(order)
    if not history.is_complete:
        raise InputError("Pad the unfinished final period before solving in hindsight")

    A = design_matrix(history)
    size = A.shape[1]
    uniform = uniform_strategy(history.dim, history.order).weights

    weights = np.array(uniform if start is None else start.weights)
    growth = A @ weights

    if start is not None and np.any(growth <= 0):
        weights = 0.5 * weights + 0.5 * uniform
        growth = A @ weights

    if np.any(growth <= 0):
        raise InfeasibleError("Every strategy is ruined by this history")

    objective = float(np.sum(np.log(growth)))
    gap = 0.0
    iteration = 0

    while True:
        gradient = A.T @ (1.0 / growth)
        toward = int(np.argmax(gradient))
        inner = float(gradient @ weights)
        gap = float(gradient[toward]) - inner

        if callback is not None:
            callback(iteration, objective, gap)

        if gap <= tol or iteration >= max_iter:
            break

        iteration += 1

        active = np.flatnonzero(weights > 0)
        away = int(active[np.argmin(gradient[active])])
        away_gap = inner - float(gradient[away])

        if gap >= away_gap or weights[away] >= 1.0:
            direction = -weights
            direction[toward] += 1.0
            gamma_max = 1.0
            step = _line_search(growth, A[:, toward] - growth, gamma_max)
            weights = weights + step * direction
            if step == gamma_max:
                weights = np.zeros(size)
                weights[toward] = 1.0
        else:
            direction = np.array(weights)
            direction[away] -= 1.0
            gamma_max = weights[away] / (1.0 - weights[away])
            step = _line_search(growth, growth - A[:, away], gamma_max)
            weights = weights + step * direction
            if step == gamma_max:
                weights[away] = 0.0

        if step == 0.0:
            logger.debug("Line search stalled at iteration %d with gap %.3g", iteration, gap)
            break

        weights = np.clip(weights, 0.0, None)
        weights /= weights.sum()
        growth = A @ weights

        updated = float(np.sum(np.log(growth)))
        if updated < objective - 1e-12 * (1.0 + abs(objective)):
            raise ConvergenceError(
                "Objective decreased from {!r} to {!r} at iteration {}".format(objective, updated, iteration)
            )
        objective = updated

    converged = gap <= tol
    if not converged:
        logger.warning("Hindsight solve stopped after %d iterations with gap %.3g > %.3g", iteration, gap, tol)
        if strict:
            raise ConvergenceError("Frank-Wolfe gap {:.3g} exceeds tolerance {:.3g}".format(gap, tol))
    else:
        logger.debug("Hindsight solve converged in %d iterations (gap %.3g)", iteration, gap)

    return HindsightResult(
        strategy=MultilinearStrategy(history.order, history.dim, weights),
        log_wealth=objective,
        iterations=iteration,
        gap_certificate=gap,
        converged=converged,
    )


def kelly_counts(history, order=None):
    """Counts which extremal strategy won each period of a horse-race history.

    Every sub-period vector must pay off on exactly one asset (after
    normalization it is a unit basis vector).

    Raises:
        NotKellySequenceError otherwise
    """
    if order is not None and order != history.order:
        history = history.regroup(order)
    if not history.is_complete:
        raise InputError("Kelly counts need complete periods")

    shape = (history.dim,) * history.order
    counts = np.zeros(history.dim ** history.order, dtype=np.int64)

    for t, halves in enumerate(history.periods()):
        winners = []
        for h, vector in enumerate(halves):
            vector = normalize_half(vector)
            if np.count_nonzero(vector) != 1:
                index = t * history.order + h
                raise NotKellySequenceError(
                    "Not a Kelly sequence: several assets pay in sub-period {}".format(index + 1),
                    row=history.source_row(index),
                )
            winners.append(int(np.argmax(vector)))
        counts[np.ravel_multi_index(tuple(winners), shape)] += 1

    return KellyCounts(history.dim, history.order, counts)


def kelly_hindsight(counts):
    """The closed-form hindsight optimum b* = n / T with wealth prod (n/T)^n.

    Raises:
        InputError for an empty count tensor (T = 0)
    """
    total = counts.total
    if total == 0:
        raise InputError("The hindsight optimum is undefined without any periods")

    positive = counts.counts[counts.counts > 0]
    log_wealth = float(np.sum(positive * np.log(positive / total)))

    return HindsightResult(
        strategy=MultilinearStrategy(counts.order, counts.dim, counts.counts / total),
        log_wealth=log_wealth,
        iterations=0,
        gap_certificate=0.0,
    )


def enumerate_kelly_counts(dim, order, total):
    """Every count tensor with the given total (compositions of T into dim**order parts)."""
    size = dim ** order
    for bars in itertools.combinations(range(total + size - 1), size - 1):
        edges = (-1,) + bars + (total + size - 1,)
        yield KellyCounts(dim, order, [edges[i + 1] - edges[i] - 1 for i in range(size)])
