import math
import unittest

import numpy as np

import ubp.backtest
from ubp.errors import InputError
from ubp.hotstock import hotstock_history, log_hotstock_universal_1linear, log_universal_wealth
from ubp.market_data import MarketHistory
from ubp.universal import PriorSpec


class TestResolveMode(unittest.TestCase):

    def test_modes(self):
        self.assertEqual(ubp.backtest.resolve_mode("auto", 2, 2, PriorSpec()), "quadrature")
        self.assertEqual(ubp.backtest.resolve_mode("auto", 2, 2, PriorSpec(0.5)), "monte-carlo")
        self.assertEqual(ubp.backtest.resolve_mode("auto", 3, 2, PriorSpec()), "monte-carlo")
        self.assertEqual(ubp.backtest.resolve_mode("monte-carlo", 2, 2, PriorSpec()), "monte-carlo")

        with self.assertRaises(InputError):
            ubp.backtest.resolve_mode("quadrature", 3, 2, PriorSpec())
        with self.assertRaises(InputError):
            ubp.backtest.resolve_mode("exact", 2, 2, PriorSpec())


class TestBacktest(unittest.TestCase):

    def test_hot_stock_quadrature(self):
        record = ubp.backtest.run_universal_backtest(hotstock_history(6))

        self.assertEqual(record.meta["mode"], "quadrature")
        self.assertTrue(record.meta["hindsight_converged"])
        self.assertEqual(len(record.periods), 7)

        for period in record.periods:
            self.assertTrue(period.complete)
            self.assertTrue(period.bound_satisfied)
            self.assertLess(abs(period.universal_log_wealth - log_universal_wealth(period.t)), 1e-6)
            self.assertAlmostEqual(period.hindsight_log_wealth, period.t * math.log(2), places=8)
            self.assertGreaterEqual(period.competitive_ratio_log, period.bound_log)

        start = record.periods[0]
        self.assertAlmostEqual(start.universal_log_wealth, 0.0, places=12)
        np.testing.assert_allclose(start.strategy_tensor, [0.25] * 4, atol=1e-12)

    def test_monte_carlo_agrees_with_quadrature(self):
        history = hotstock_history(6)
        exact = ubp.backtest.run_universal_backtest(history)
        sampled = ubp.backtest.run_universal_backtest(history, mode="monte-carlo", n_samples=100000, seed=42)

        self.assertEqual(sampled.meta["mode"], "monte-carlo")
        self.assertEqual(sampled.meta["seed"], 42)

        for mc, quad in zip(sampled.periods, exact.periods):
            self.assertLessEqual(abs(mc.universal_log_wealth - quad.universal_log_wealth),
                                 3 * mc.universal_log_wealth_se + 1e-12)
            self.assertGreater(mc.ess, 0)

    def test_monte_carlo_is_reproducible(self):
        rng = np.random.default_rng(1)
        history = MarketHistory(("a", "b", "c"), 1, rng.uniform(0.8, 1.25, size=(12, 3)))

        first = ubp.backtest.run_universal_backtest(history, n_samples=3000, seed=5)
        second = ubp.backtest.run_universal_backtest(history, n_samples=3000, seed=5)

        self.assertEqual(first.to_dict(), second.to_dict())
        self.assertEqual(first.meta["mode"], "monte-carlo")
        self.assertTrue(all(period.bound_satisfied for period in first.periods))

    def test_incomplete_final_period(self):
        history = MarketHistory(("stock", "cash"), 2, [[2, 1], [0.5, 1]] * 2 + [[2, 1]])
        record = ubp.backtest.run_universal_backtest(history)

        self.assertEqual(len(record.periods), 4)
        self.assertEqual([period.complete for period in record.periods], [True, True, True, False])

    def test_regroup(self):
        record = ubp.backtest.run_universal_backtest(hotstock_history(2), order=1, n_samples=2000)

        self.assertEqual(record.meta["H"], 1)
        self.assertEqual(len(record.periods), 5)
        self.assertAlmostEqual(record.final.hindsight_log_wealth, 2 * math.log(9 / 8), places=8)

    def test_table(self):
        record = ubp.backtest.run_universal_backtest(hotstock_history(2))
        table = record.to_table()

        self.assertEqual(table[0][0], "t")
        self.assertEqual(table[0][-4:], ["b_1_1", "b_1_2", "b_2_1", "b_2_2"])
        self.assertEqual(len(table), 4)
        self.assertTrue(all(len(row) == len(table[0]) for row in table))

    def test_one_linear_reading_of_the_hot_stock(self):
        # Regrouped to H=1 the universal portfolio is the universal CRP
        record = ubp.backtest.run_universal_backtest(hotstock_history(6), order=1, n_samples=100000, seed=42)

        for t in range(0, 13, 2):
            period = record.periods[t]
            expected = log_hotstock_universal_1linear(t // 2)
            self.assertLessEqual(abs(period.universal_log_wealth - expected), 3 * period.universal_log_wealth_se + 1e-12)

    def test_ten_period_hot_stock(self):
        record = ubp.backtest.run_universal_backtest(hotstock_history(10))
        self.assertAlmostEqual(math.exp(record.final.universal_log_wealth), 19.0117, delta=1e-4)


class TestQuadratureConvergence(unittest.TestCase):

    def test_unsettled_quadrature_is_flagged(self):
        rng = np.random.default_rng(150)
        history = MarketHistory(("a", "b"), 2, np.eye(2)[rng.integers(0, 2, size=300)])

        record = ubp.backtest.run_universal_backtest(history, max_panels=2)

        self.assertEqual(record.meta["mode"], "quadrature")
        self.assertIs(record.meta["quadrature_converged"], False)
        self.assertTrue(record.meta["hindsight_converged"])

    def test_flag_on_settled_and_sampled_runs(self):
        exact = ubp.backtest.run_universal_backtest(hotstock_history(4))
        sampled = ubp.backtest.run_universal_backtest(hotstock_history(4), mode="monte-carlo", n_samples=2000)

        self.assertIs(exact.meta["quadrature_converged"], True)
        self.assertIsNone(sampled.meta["quadrature_converged"])
