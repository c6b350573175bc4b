"""Deterministic integration of the universal bilinear portfolio over two assets.

With m=2 and H=2 the strategy simplex is the tetrahedron
{b11 + b12 + b21 <= 1, b >= 0} with b22 = 1 - b11 - b12 - b21, and the uniform
prior has density 6. The tetrahedron is mapped onto the unit cube by

    b11 = u,  b12 = (1-u) v,  b21 = (1-u)(1-v) w,  b22 = (1-u)(1-v)(1-w)

with Jacobian (1-u)^2 (1-v), and integrated with composite Gauss-Legendre
rules. The wealth of a strategy after T periods is a polynomial of degree T,
so a rule with enough points per panel is exact; panels are doubled until two
successive rules agree.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ubp.errors import ConvergenceError, InputError
from ubp.hindsight import design_matrix
from ubp.market_data import pad_incomplete
from ubp.strategy import MultilinearStrategy


logger = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-8
DEFAULT_MAX_PANELS = 4
MAX_POINTS = 24


@dataclass(frozen=True, eq=False)
class QuadratureResult:
    """Universal wealth and strategy after every period, from one quadrature rule.

    Attributes:
        log_wealths: log W_hat after 0, 1, ..., T periods
        strategies: (T + 1, 4) array, B_hat after 0, 1, ..., T periods
        converged: whether the last two refinements agreed to rtol
        panels: panels per axis of the final rule
    """

    log_wealths: np.ndarray
    strategies: np.ndarray
    converged: bool
    panels: int
    points: int

    @property
    def log_wealth(self):
        return float(self.log_wealths[-1])

    @property
    def strategy(self):
        return MultilinearStrategy(2, 2, self.strategies[-1])


def tetrahedron_rule(points, panels):
    """Nodes and log-weights integrating 6 * f over the tetrahedron.

    Returns:
        (nodes, log_weights): nodes is (N, 4) with columns b11, b12, b21, b22
    """
    abscissae, weights = np.polynomial.legendre.leggauss(points)
    width = 1.0 / panels
    starts = np.arange(panels) * width

    line = (starts[:, None] + (abscissae[None, :] + 1.0) * width / 2).ravel()
    line_weights = np.tile(weights * width / 2, panels)

    u, v, w = (axis.ravel() for axis in np.meshgrid(line, line, line, indexing="ij"))
    wu, wv, ww = (axis.ravel() for axis in np.meshgrid(line_weights, line_weights, line_weights, indexing="ij"))

    nodes = np.column_stack([
        u,
        (1 - u) * v,
        (1 - u) * (1 - v) * w,
        (1 - u) * (1 - v) * (1 - w),
    ])
    log_weights = math.log(6.0) + np.log(wu * wv * ww * (1 - u) ** 2 * (1 - v))

    return nodes, log_weights


def _integrate(A, points, panels):
    nodes, log_weights = tetrahedron_rule(points, panels)
    log_integrand = np.zeros(len(nodes))

    log_wealths = np.empty(len(A) + 1)
    strategies = np.empty((len(A) + 1, 4))

    for t in range(len(A) + 1):
        if t > 0:
            with np.errstate(divide="ignore"):
                log_integrand += np.log(nodes @ A[t - 1])

        terms = log_weights + log_integrand
        log_wealths[t] = logsumexp(terms)
        for j in range(4):
            strategies[t, j] = math.exp(logsumexp(terms, b=nodes[:, j]) - log_wealths[t])

    return log_wealths, strategies


def quadrature_trajectory(history, rtol=DEFAULT_RTOL, max_panels=DEFAULT_MAX_PANELS, points=None, strict=False):
    """Universal bilinear wealth and weights over two assets under the uniform prior.

    An unfinished final period is padded with all-ones returns.

    Raises:
        InputError unless the history has two assets and order two
        ConvergenceError if strict and the refinement limit is reached
    """
    if history.dim != 2 or history.order != 2:
        raise InputError("Quadrature is only available for two assets and order two")

    A = design_matrix(pad_incomplete(history))
    if points is None:
        points = min(max(8, math.ceil((len(A) + 4) / 2)), MAX_POINTS)

    panels = 1
    previous = _integrate(A, points, panels)

    while True:
        panels *= 2
        current = _integrate(A, points, panels)
        change = float(np.max(np.abs(np.expm1(current[0] - previous[0]))))
        logger.debug("Quadrature with %d points x %d panels: relative change %.3g", points, panels, change)

        converged = change <= rtol
        if converged or panels >= max_panels:
            break
        previous = current

    if not converged:
        logger.warning("Quadrature did not settle within %d panels (relative change %.3g)", panels, change)
        if strict:
            raise ConvergenceError("Quadrature relative change {:.3g} exceeds {:.3g}".format(change, rtol))

    return QuadratureResult(
        log_wealths=current[0],
        strategies=current[1],
        converged=converged,
        panels=panels,
        points=points,
    )


def universal_wealth_quadrature_2x2(history, rtol=DEFAULT_RTOL, max_panels=DEFAULT_MAX_PANELS, strict=False):
    """Final universal bilinear wealth over two assets, uniform prior.

    Returns the QuadratureResult; its `log_wealth` is log W_hat and its
    `converged` flag marks estimates that hit the refinement limit.
    """
    return quadrature_trajectory(history, rtol=rtol, max_panels=max_panels, strict=strict)
