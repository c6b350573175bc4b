"""Runs the universal portfolio through a history and records how it fares.

Every period records the universal wealth, the hindsight-optimal wealth for
the history so far, their competitive ratio and its lower bound, and the
strategy the universal portfolio will trade next.
"""
import logging
from dataclasses import asdict, dataclass, field

from ubp.analysis import ratio_report
from ubp.errors import InputError, UBPError
from ubp.hindsight import DEFAULT_MAX_ITER, DEFAULT_TOLERANCE, best_in_hindsight
from ubp.market_data import pad_incomplete
from ubp.quadrature import DEFAULT_MAX_PANELS, quadrature_trajectory
from ubp.strategy import multi_indices
from ubp.universal import DEFAULT_SAMPLES, DEFAULT_SEED, PriorSpec, initial_state, universal_step


logger = logging.getLogger(__name__)

MODES = ("auto", "monte-carlo", "quadrature")

# Slack on the average-wealth identity beyond its sampling band.
IDENTITY_SLACK = 1e-9


@dataclass(frozen=True)
class PeriodRecord:
    t: int
    complete: bool
    universal_log_wealth: float
    universal_log_wealth_se: float
    hindsight_log_wealth: float
    hindsight_gap: float
    competitive_ratio_log: float
    bound_log: float
    bound_satisfied: bool
    excess_growth: float
    strategy_tensor: list
    strategy_se: list
    ess: float = None


@dataclass(frozen=True)
class BacktestRecord:
    periods: list
    meta: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.periods[-1]

    def to_dict(self):
        return {"periods": [asdict(period) for period in self.periods], "meta": dict(self.meta)}

    def to_table(self):
        """Header row plus one row per period, strategy entries spread over columns."""
        labels = [
            "b_" + "_".join(str(i) for i in index)
            for index in multi_indices(self.meta["m"], self.meta["H"])
        ]
        header = [
            "t", "complete", "universal_log_wealth", "universal_log_wealth_se",
            "hindsight_log_wealth", "competitive_ratio_log", "bound_log", "bound_satisfied", "ess",
        ] + labels

        rows = [header]
        for period in self.periods:
            rows.append([
                period.t, period.complete, period.universal_log_wealth, period.universal_log_wealth_se,
                period.hindsight_log_wealth, period.competitive_ratio_log, period.bound_log,
                period.bound_satisfied, period.ess,
            ] + list(period.strategy_tensor))
        return rows


def resolve_mode(mode, dim, order, prior):
    """Quadrature when it applies (two assets, order two, uniform prior), Monte Carlo otherwise."""
    if mode not in MODES:
        raise InputError("Unknown backtest mode '{}'".format(mode))

    eligible = dim == 2 and order == 2 and prior.is_uniform
    if mode == "quadrature" and not eligible:
        raise InputError("Quadrature needs two assets, order two and the uniform prior")
    if mode == "auto":
        return "quadrature" if eligible else "monte-carlo"
    return mode


def _monte_carlo_trajectory(history, prior, n_samples, seed, workers):
    """(log wealth, its standard error, strategy, strategy errors, ESS) after each period."""
    state = initial_state(history.dim, history.order, prior, n_samples, seed, workers)
    trajectory = [_snapshot(state)]

    for halves in history.periods():
        state = universal_step(state, halves)

        # The telescoped universal returns must equal the average particle wealth.
        discrepancy = abs(state.log_universal_wealth - state.log_mean_particle_wealth)
        allowed = 3 * state.log_wealth_standard_error + IDENTITY_SLACK * (1 + abs(state.log_universal_wealth))
        if discrepancy > allowed:
            raise UBPError(
                "Average-wealth identity violated in period {}: {:.3g} > {:.3g}".format(state.periods, discrepancy, allowed)
            )

        trajectory.append(_snapshot(state))

    return trajectory


def _snapshot(state):
    return (
        state.log_universal_wealth,
        state.log_wealth_standard_error,
        state.current_strategy.weights.tolist(),
        state.strategy_standard_errors.tolist(),
        state.ess,
    )


def _quadrature_trajectory(history, max_panels):
    """Trajectory rows as for Monte Carlo, plus whether the rule settled."""
    result = quadrature_trajectory(history, max_panels=max_panels)
    if not result.converged:
        logger.warning("Quadrature backtest values are unconverged estimates")

    trajectory = [
        (float(log_wealth), 0.0, strategy.tolist(), [0.0] * 4, None)
        for log_wealth, strategy in zip(result.log_wealths, result.strategies)
    ]
    return trajectory, result.converged


def run_universal_backtest(history, order=None, prior=PriorSpec(), n_samples=DEFAULT_SAMPLES, seed=DEFAULT_SEED,
                           mode="auto", tol=DEFAULT_TOLERANCE, max_iter=DEFAULT_MAX_ITER, workers=1,
                           max_panels=DEFAULT_MAX_PANELS):
    """Trades the universal portfolio through a history, period by period.

    An unfinished final period is padded with all-ones returns and marked
    incomplete. Row t of the record describes the state after t periods;
    row 0 is the starting point (wealth 1, the prior's centre of mass).

    In quadrature mode `meta["quadrature_converged"]` is False when the rule
    hit `max_panels` before settling; it is None in Monte Carlo mode.

    Raises:
        RuinError if the universal portfolio is ruined
    """
    if order is not None and order != history.order:
        history = history.regroup(order)

    complete_periods = history.complete_periods
    history = pad_incomplete(history)
    mode = resolve_mode(mode, history.dim, history.order, prior)

    logger.info(
        "Backtesting %d periods over %d assets, order %d, %s mode",
        history.complete_periods, history.dim, history.order, mode,
    )

    quadrature_converged = None
    if mode == "quadrature":
        trajectory, quadrature_converged = _quadrature_trajectory(history, max_panels)
    else:
        trajectory = _monte_carlo_trajectory(history, prior, n_samples, seed, workers)

    periods = []
    hindsight = None
    converged = True
    for t, (log_wealth, log_wealth_se, strategy, strategy_se, ess) in enumerate(trajectory):
        hindsight = best_in_hindsight(history.prefix(t), tol=tol, max_iter=max_iter,
                                      start=hindsight.strategy if hindsight else None)
        converged = converged and hindsight.converged
        report = ratio_report(log_wealth, hindsight.log_wealth, history.dim, history.order, t,
                              prior=prior, log_universal_se=log_wealth_se + hindsight.gap_certificate)

        periods.append(PeriodRecord(
            t=t,
            complete=t <= complete_periods,
            universal_log_wealth=log_wealth,
            universal_log_wealth_se=log_wealth_se,
            hindsight_log_wealth=hindsight.log_wealth,
            hindsight_gap=hindsight.gap_certificate,
            competitive_ratio_log=report.log_ratio,
            bound_log=report.log_bound,
            bound_satisfied=report.bound_satisfied,
            excess_growth=report.excess_growth_per_period,
            strategy_tensor=strategy,
            strategy_se=strategy_se,
            ess=ess,
        ))

    meta = {
        "m": history.dim,
        "H": history.order,
        "assets": list(history.assets),
        "prior_alpha": prior.concentration,
        "n_samples": n_samples if mode == "monte-carlo" else None,
        "seed": seed if mode == "monte-carlo" else None,
        "mode": mode,
        "log_density_floor": prior.log_density_floor(history.dim, history.order),
        "hindsight_converged": converged,
        "quadrature_converged": quadrature_converged,
    }

    final = periods[-1]
    logger.info(
        "Final log wealth %.6g (hindsight %.6g, log ratio %.6g, bound %.6g)",
        final.universal_log_wealth, final.hindsight_log_wealth, final.competitive_ratio_log, final.bound_log,
    )

    return BacktestRecord(periods=periods, meta=meta)
