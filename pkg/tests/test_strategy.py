import math
import unittest

import numpy as np

import ubp.strategy
from ubp.errors import InputError, RuinError
from ubp.market_data import MarketHistory
from ubp.strategy import MultilinearStrategy


def random_strategy(rng, dim, order):
    return MultilinearStrategy(order, dim, rng.dirichlet(np.ones(dim ** order)))


class TestMultilinearStrategy(unittest.TestCase):

    def test_uniform(self):
        strategy = ubp.strategy.uniform_strategy(3, 2)
        self.assertEqual(strategy.weights.size, 9)
        self.assertAlmostEqual(strategy.weights.sum(), 1.0, places=12)
        self.assertEqual(strategy.tensor.shape, (3, 3))

    def test_validation(self):
        # Wrong length
        with self.assertRaises(InputError):
            MultilinearStrategy(2, 2, [0.5, 0.5])

        # Does not sum to one
        with self.assertRaises(InputError):
            MultilinearStrategy(1, 2, [0.6, 0.5])

        # Negative weight
        with self.assertRaises(InputError):
            MultilinearStrategy(1, 2, [1.5, -0.5])

        # Not finite
        with self.assertRaises(InputError):
            MultilinearStrategy(1, 2, [math.nan, 1.0])

    def test_renormalizes_within_tolerance(self):
        strategy = MultilinearStrategy(1, 2, [0.5, 0.5 + 1e-12])
        self.assertAlmostEqual(strategy.weights.sum(), 1.0, places=15)

    def test_dict_and_tensor_forms(self):
        strategy = MultilinearStrategy.from_tensor([[0.1, 0.2], [0.3, 0.4]])
        self.assertEqual((strategy.order, strategy.dim), (2, 2))

        again = MultilinearStrategy.from_dict(strategy.to_dict())
        np.testing.assert_array_equal(again.weights, strategy.weights)

        with self.assertRaises(InputError):
            MultilinearStrategy.from_dict({"order": 2})
        with self.assertRaises(InputError):
            MultilinearStrategy.from_tensor([[0.5, 0.5]])

    def test_extremal_decomposition(self):
        strategy = MultilinearStrategy(2, 2, [0.0, 0.75, 0.25, 0.0])
        decomposition = ubp.strategy.extremal_decomposition(strategy)

        self.assertEqual(decomposition, [((1, 2), 0.75), ((2, 1), 0.25)])
        np.testing.assert_array_equal(
            ubp.strategy.compose_extremal(2, 2, decomposition).weights, strategy.weights
        )


class TestGrowth(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(2024)

    def test_bilinear_growth(self):
        strategy = MultilinearStrategy.from_tensor([[0.1, 0.2], [0.3, 0.4]])
        x, y = np.array([2.0, 1.0]), np.array([0.5, 1.0])

        self.assertAlmostEqual(ubp.strategy.period_growth(strategy, [x, y]), x @ strategy.tensor @ y, places=14)

    def test_multilinear_in_each_sub_period(self):
        for order in (1, 2, 3):
            strategy = random_strategy(self.rng, 3, order)
            halves = [self.rng.uniform(0.5, 1.5, 3) for _ in range(order)]
            growth = ubp.strategy.period_growth(strategy, halves)

            for h in range(order):
                scaled = list(halves)
                scaled[h] = 2.5 * halves[h]
                self.assertAlmostEqual(ubp.strategy.period_growth(strategy, scaled), 2.5 * growth, places=12)

                # Additive in each argument too
                other = self.rng.uniform(0.5, 1.5, 3)
                summed = list(halves)
                summed[h] = halves[h] + other
                split = list(halves)
                split[h] = other
                self.assertAlmostEqual(
                    ubp.strategy.period_growth(strategy, summed),
                    growth + ubp.strategy.period_growth(strategy, split),
                    places=12,
                )

    def test_linear_in_the_strategy(self):
        for order in (1, 2, 3):
            first, second = random_strategy(self.rng, 3, order), random_strategy(self.rng, 3, order)
            halves = [self.rng.uniform(0.5, 1.5, 3) for _ in range(order)]

            for mix in (0.0, 0.3, 0.5, 1.0):
                combined = MultilinearStrategy(order, 3, mix * first.weights + (1 - mix) * second.weights)
                expected = (mix * ubp.strategy.period_growth(first, halves)
                            + (1 - mix) * ubp.strategy.period_growth(second, halves))
                self.assertAlmostEqual(ubp.strategy.period_growth(combined, halves), expected, places=12)

    def test_crp_embedding(self):
        portfolio = np.array([0.2, 0.5, 0.3])
        for order in (1, 2, 3):
            strategy = ubp.strategy.embed_crp(portfolio, order)
            halves = [self.rng.uniform(0.5, 1.5, 3) for _ in range(order)]

            expected = np.prod([portfolio @ x for x in halves])
            self.assertAlmostEqual(ubp.strategy.period_growth(strategy, halves), expected, places=12)

    def test_buy_and_hold_embedding(self):
        portfolio = np.array([0.6, 0.4])
        strategy = ubp.strategy.embed_buy_and_hold(portfolio)
        x, y = np.array([1.5, 0.8]), np.array([0.9, 1.3])

        self.assertAlmostEqual(ubp.strategy.period_growth(strategy, [x, y]), portfolio @ (x * y), places=14)

        with self.assertRaises(InputError):
            ubp.strategy.embed_buy_and_hold([0.7, 0.7])

    def test_dimension_mismatch(self):
        strategy = ubp.strategy.uniform_strategy(2, 2)
        with self.assertRaises(InputError):
            ubp.strategy.period_growth(strategy, [[1.0, 1.0]])
        with self.assertRaises(InputError):
            ubp.strategy.period_growth(strategy, [[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]])


class TestWealth(unittest.TestCase):

    def test_hot_stock_wealth(self):
        history = MarketHistory(("stock", "cash"), 2, [[2, 1], [0.5, 1]] * 3)
        perfect = MultilinearStrategy(2, 2, [0, 1, 0, 0])
        crp = ubp.strategy.embed_crp([0.5, 0.5], 2)

        self.assertAlmostEqual(ubp.strategy.wealth(perfect, history), 3 * math.log(2), places=12)
        self.assertAlmostEqual(ubp.strategy.wealth(crp, history), 3 * math.log(9 / 8), places=12)

    def test_empty_history(self):
        history = MarketHistory(("a", "b"), 2, np.empty((0, 2)))
        self.assertEqual(ubp.strategy.wealth(ubp.strategy.uniform_strategy(2, 2), history), 0.0)

    def test_ruin(self):
        history = MarketHistory(("a", "b"), 1, [[1, 0]])
        strategy = MultilinearStrategy(1, 2, [0, 1])

        with self.assertLogs("ubp.strategy", level="WARNING"):
            self.assertEqual(ubp.strategy.wealth(strategy, history), -math.inf)

    def test_incomplete_history(self):
        history = MarketHistory(("a", "b"), 2, [[1, 1]])
        with self.assertRaises(InputError):
            ubp.strategy.wealth(ubp.strategy.uniform_strategy(2, 2), history)


class TestReplication(unittest.TestCase):

    def test_functional_equation(self):
        rng = np.random.default_rng(11)
        for _ in range(10000):
            dim = int(rng.integers(2, 5))
            strategy = random_strategy(rng, dim, 2)
            x, y = rng.uniform(0.1, 3.0, dim), rng.uniform(0.1, 3.0, dim)

            p, q = ubp.strategy.replication_portfolios(strategy, x)

            self.assertAlmostEqual(p.sum(), 1.0, places=12)
            self.assertAlmostEqual(q.sum(), 1.0, places=12)
            expected = x @ strategy.tensor @ y
            self.assertLessEqual(abs((p @ x) * (q @ y) - expected), 1e-12 * expected)

    def test_first_half_ruin(self):
        strategy = MultilinearStrategy(2, 2, [0, 1, 0, 0])
        with self.assertRaises(RuinError):
            ubp.strategy.replication_portfolios(strategy, [0.0, 1.0])

    def test_bilinear_only(self):
        with self.assertRaises(NotImplementedError):
            ubp.strategy.replication_portfolios(ubp.strategy.uniform_strategy(2, 3), [1.0, 1.0])
