import math

import numpy as np
import pytest

from jumphedge.market import derive_params, sample_path
from jumphedge.montecarlo import (
    error_stats,
    martingale_diagnostic,
    minimal_capital_demo,
    path_errors,
    simulate_errors,
)
from jumphedge.payoffs import CallPayoff, CustomPayoff, Envelope, LogPayoff, PowerPayoff, constant_payoff
from jumphedge.strategies import DeltaHedge, Replicating
from jumphedge.valuation import closed_form_value, value

# sigma - log(1 + sigma) at sigma = 0.1 (mpmath)
GAP = 0.004689820195675139956


def test_error_stats_fields():
    s = error_stats(np.array([1.0, 2.0, 3.0, 6.0]), seed=4, intensity=1.5)
    assert s.mean == 3.0
    assert s.std == pytest.approx(math.sqrt(14 / 3))
    assert s.standard_error == pytest.approx(s.std / 2)
    assert s.ci99_high - s.mean == pytest.approx(s.mean - s.ci99_low)
    assert s.ci99_high - s.mean == pytest.approx(2.5758293035489 * s.standard_error)
    assert (s.min, s.max) == (1.0, 6.0)
    assert s.rmse == pytest.approx(math.sqrt(50 / 4))
    assert s.as_dict()["intensity_used"] == 1.5
    with pytest.raises(ValueError):
        error_stats(np.array([]), 0, 1.0)


def test_single_path_stats(params):
    s = simulate_errors(DeltaHedge(), LogPayoff(), params, 1.0, 1, seed=3)
    assert s.n_paths == 1 and s.std == 0.0


def test_input_validation(params):
    with pytest.raises(ValueError):
        simulate_errors(DeltaHedge(), LogPayoff(), params, 1.0, 0, seed=1)
    with pytest.raises(ValueError):
        simulate_errors(DeltaHedge(), LogPayoff(), params, 0.0, 10, seed=1)


def test_delta_log_errors_match_jump_count(params):
    errs = path_errors(DeltaHedge(), LogPayoff(), params, 1.0, 300, seed=12)
    n = np.array([sample_path(12, i, 1.0, 1.0).n_jumps for i in range(300)])
    assert np.max(np.abs(errs - GAP * (n - 1.0))) <= 1e-12


@pytest.mark.slow
def test_risk_neutral_delta_error_is_unbiased(params):
    s = simulate_errors(DeltaHedge(), LogPayoff(), params, 1.0, 100_000, seed=2011)
    assert abs(s.mean) <= 3 * s.standard_error


@pytest.mark.parametrize("payoff", [PowerPayoff(2), PowerPayoff(-1)])
def test_risk_neutral_delta_error_unbiased_power(params, payoff):
    s = simulate_errors(DeltaHedge(), payoff, params, 1.0, 20_000, seed=77)
    assert abs(s.mean) <= 3 * s.standard_error


@pytest.mark.parametrize("lam_real", [0.5, 2.0])
def test_real_world_bias_and_variance(params, lam_real):
    n = 40_000
    s = simulate_errors(DeltaHedge(), LogPayoff(), params, lam_real, n, seed=909)
    expected_mean = GAP * (lam_real - 1.0)
    assert abs(s.mean - expected_mean) <= 3 * s.standard_error
    assert math.copysign(1, s.mean) == math.copysign(1, lam_real - 1.0)
    # sample variance vs GAP^2 lambda' T, with the Poisson fourth moment for its spread
    var = s.std**2
    target = GAP**2 * lam_real
    se_var = GAP**2 * math.sqrt((lam_real + 2 * lam_real**2) / n)
    assert abs(var - target) <= 3 * se_var


@pytest.mark.parametrize("payoff,lam_real", [(LogPayoff(), 2.0), (PowerPayoff(2), 0.5), (PowerPayoff(-1), 1.0)])
def test_replicating_has_no_error(params, payoff, lam_real):
    s = simulate_errors(Replicating(), payoff, params, lam_real, 1_000, seed=5)
    assert s.rmse <= 1e-9
    assert max(abs(s.min), abs(s.max)) <= 1e-9


def test_replicating_call_has_no_error(params):
    s = simulate_errors(Replicating(), CallPayoff(100), params, 1.5, 100, seed=5)
    assert s.rmse <= 1e-8


def test_power_one_martingale(params):
    stats = martingale_diagnostic(PowerPayoff(1), params, [0.25, 0.5, 1.0], 20_000, seed=31)
    for c in stats:
        assert abs(c.mean - 100.0) <= 3 * c.standard_error


def test_power_minus_one_martingale(params):
    target = closed_form_value(PowerPayoff(-1), params, 0.0, 100.0)
    stats = martingale_diagnostic(PowerPayoff(-1), params, [0.5, 1.0], 20_000, seed=32)
    assert [c.t for c in stats] == [0.5, 1.0]
    for c in stats:
        assert abs(c.mean - target) <= 3 * c.standard_error


def test_constant_payoff_diagnostic(params):
    stats = martingale_diagnostic(constant_payoff(7.0), params, [0.0, 0.5, 1.0], 500, seed=1)
    for c in stats:
        # exact up to the certified truncation tolerance
        assert abs(c.mean - 7.0) <= 1e-12 * 7
        assert c.std <= 1e-12
    assert stats[-1].mean == 7.0 and stats[-1].std == 0.0


def test_diagnostic_rejects_bad_checkpoint(params):
    with pytest.raises(ValueError):
        martingale_diagnostic(LogPayoff(), params, [1.5], 10, seed=1)


def test_minimal_capital_at_u0_is_plain_replication(params):
    u0 = value(PowerPayoff(2), params, 0.0, 100.0).value
    a = minimal_capital_demo(PowerPayoff(2), params, u0, 500, seed=8)
    b = simulate_errors(Replicating(), PowerPayoff(2), params, 1.0, 500, seed=8)
    assert a == b


@pytest.mark.parametrize("payoff", [LogPayoff(), PowerPayoff(2), PowerPayoff(-1)])
def test_minimal_capital_burns_excess(params, payoff):
    u0 = value(payoff, params, 0.0, 100.0).value
    s = minimal_capital_demo(payoff, params, u0 + 1.0, 2_000, seed=8)
    assert max(abs(s.min), abs(s.max)) <= 1e-6


def test_minimal_capital_rejects_low_capital(params):
    u0 = value(LogPayoff(), params, 0.0, 100.0).value
    with pytest.raises(ValueError, match="below"):
        minimal_capital_demo(LogPayoff(), params, u0 - 0.01, 10, seed=8)


def test_worker_count_does_not_change_results(params):
    one = simulate_errors(DeltaHedge(), PowerPayoff(2), params, 1.3, 5_000, seed=4, threads=1)
    two = simulate_errors(DeltaHedge(), PowerPayoff(2), params, 1.3, 5_000, seed=4, threads=2)
    assert one == two


def test_unpicklable_payoff_runs_in_process(params):
    f = CustomPayoff(lambda y: np.sqrt(y), Envelope(1.0, 0.5, 0.0))
    s = simulate_errors(Replicating(), f, params, 1.0, 3_000, seed=2, threads=2)
    assert s.rmse <= 1e-8


def test_other_parameters():
    p = derive_params(50.0, 0.4, 3.0, 0.5)
    gap = 0.4 - math.log1p(0.4)
    errs = path_errors(DeltaHedge(), LogPayoff(), p, 3.0, 200, seed=6)
    # error / gap = N_T - lambda T, so adding lambda T = 1.5 gives an integer
    counts = errs / gap + 1.5
    assert np.max(np.abs(counts - np.round(counts))) <= 1e-9
