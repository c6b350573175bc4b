import math
import unittest

import numpy as np
from scipy.special import logsumexp

import ubp.quadrature
from ubp.errors import InputError
from ubp.hindsight import KellyCounts
from ubp.hotstock import hotstock_history, log_universal_wealth, universal_weights
from ubp.market_data import MarketHistory
from ubp.universal import universal_wealth_exact_kelly


class TestTetrahedronRule(unittest.TestCase):

    def test_rule_integrates_the_uniform_density(self):
        for panels in (1, 2, 4):
            nodes, log_weights = ubp.quadrature.tetrahedron_rule(8, panels)

            self.assertAlmostEqual(math.exp(logsumexp(log_weights)), 1.0, places=12)
            np.testing.assert_allclose(nodes.sum(axis=1), 1.0, atol=1e-14)
            self.assertTrue(np.all(nodes >= 0))

    def test_rule_matches_dirichlet_moments(self):
        nodes, log_weights = ubp.quadrature.tetrahedron_rule(8, 1)
        weights = np.exp(log_weights)

        # E[b11 b12^2] = 3! 1! 2! / 6! under the uniform prior
        self.assertAlmostEqual(weights @ (nodes[:, 0] * nodes[:, 1] ** 2), 12 / 720, places=13)


class TestQuadratureTrajectory(unittest.TestCase):

    def test_hot_stock_closed_forms(self):
        result = ubp.quadrature.quadrature_trajectory(hotstock_history(12))

        self.assertTrue(result.converged)
        self.assertEqual(len(result.log_wealths), 13)

        for t in range(13):
            self.assertLess(abs(math.expm1(result.log_wealths[t] - log_universal_wealth(t))), 1e-6)
            np.testing.assert_allclose(result.strategies[t], universal_weights(t).ravel(), atol=1e-6)

            # b11 and b22 earn the same in every period
            self.assertAlmostEqual(result.strategies[t][0], result.strategies[t][3], places=12)

    def test_start_is_the_prior_mean(self):
        result = ubp.quadrature.quadrature_trajectory(hotstock_history(0))

        self.assertAlmostEqual(result.log_wealth, 0.0, places=13)
        np.testing.assert_allclose(result.strategy.weights, [0.25] * 4, atol=1e-13)

    def test_kelly_history_matches_exact(self):
        a, b = [1, 0], [0, 1]
        history = MarketHistory(("a", "b"), 2, [a, a, a, b, b, a, b, b, a, b])
        result = ubp.quadrature.universal_wealth_quadrature_2x2(history)

        exact = universal_wealth_exact_kelly(KellyCounts(2, 2, [1, 2, 1, 1]))
        self.assertLess(abs(math.expm1(result.log_wealth - exact)), 1e-9)

    def test_incomplete_period_is_padded(self):
        history = MarketHistory(("stock", "cash"), 2, [[2, 1], [0.5, 1], [2, 1]])
        result = ubp.quadrature.quadrature_trajectory(history)

        self.assertEqual(len(result.log_wealths), 3)
        # Cash-like second half: the stock's first half alone
        padded = MarketHistory(("stock", "cash"), 2, [[2, 1], [0.5, 1], [2, 1], [1, 1]])
        self.assertAlmostEqual(
            result.log_wealth, ubp.quadrature.quadrature_trajectory(padded).log_wealth, places=14
        )

    def test_only_two_by_two(self):
        with self.assertRaises(InputError):
            ubp.quadrature.quadrature_trajectory(MarketHistory(("a", "b", "c"), 2, [[1, 1, 1], [1, 1, 1]]))
        with self.assertRaises(InputError):
            ubp.quadrature.quadrature_trajectory(MarketHistory(("a", "b"), 1, [[1, 1]]))
