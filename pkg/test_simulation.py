"""Post-hoc monthly rejection: thresholds, the simulation loop and its summary metrics."""

import logging

import numpy as np
import pytest

from conftest import make_batch, make_stream
from driftgrid.errors import (
    ConfigError,
    InvariantViolation,
    MissingScore,
    NoDefinedMonths,
    OutOfRange,
    QuotaExceedsPool,
    TooFewMonths,
    UnknownRejectedId,
)
from driftgrid.scorers import ScoreRegistry
from driftgrid.simulation import (
    DEFAULT_COVERAGE_GRID,
    MonthOutcome,
    RejectionConfig,
    SimulationTrace,
    aurc_f1_star,
    benefit_fraction,
    concatenate_traces,
    f1_risk_curve,
    mean_retained_f1,
    monthly_f1,
    monthly_fnr,
    ood_threshold,
    rejection_bias,
    rejection_mapd,
    rejection_volatility,
    run_posthoc_simulation,
    softmax_thresholds,
)


def _trace(rejections, rho=400, f1_pairs=None, batch_size=1000):
    f1_pairs = f1_pairs or [(None, None)] * len(rejections)
    months = tuple(
        MonthOutcome(i + 1, batch_size, r, retained, base)
        for i, (r, (retained, base)) in enumerate(zip(rejections, f1_pairs))
    )
    return SimulationTrace(rho, "cutoff", "msp_u", months)


def _random_stream(rng, months=6, size=30):
    rows = []
    for _ in range(months):
        y_true = rng.integers(0, 2, size)
        y_pred = np.where(rng.random(size) < 0.8, y_true, 1 - y_true)
        rows.append(list(zip(rng.random(size).tolist(), y_true.tolist(), y_pred.tolist())))
    return make_stream(rows)


# Threshold subroutines

def test_ood_threshold_fixtures():
    assert ood_threshold([0.9, 0.7, 0.5, 0.3], 2) == 0.7
    assert ood_threshold([0.9, 0.7, 0.5, 0.3], 4) == 0.3
    assert ood_threshold([0.5, 0.5, 0.5], 1) == 0.5


def test_ood_threshold_bounds():
    with pytest.raises(QuotaExceedsPool):
        ood_threshold([0.1, 0.2], 3)
    with pytest.raises(OutOfRange):
        ood_threshold([0.1, 0.2], 0)


def test_softmax_thresholds_fixtures():
    assert softmax_thresholds([0.2, 0.9, 0.6, 0.4], 2) == (0.6, 0.9)
    assert softmax_thresholds([0.2, 0.9, 0.6, 0.4], 0) == (1.0, 0.0)
    assert softmax_thresholds([0.2, 0.9, 0.6, 0.4], 4) == (0.2, 0.9)
    with pytest.raises(QuotaExceedsPool):
        softmax_thresholds([0.2], 2)


def test_thresholds_match_naive_selection():
    rng = np.random.default_rng(7)
    for trial in range(1000):
        n = int(rng.integers(1, 40))
        if trial % 10 == 0:
            pool = [0.5] * n
        else:
            pool = (rng.integers(0, 10, n) / 10.0).tolist()
        T = int(rng.integers(1, n + 1))
        naive = sorted(pool, reverse=True)
        c = ood_threshold(pool, T)
        assert c == naive[T - 1]
        assert softmax_thresholds(pool, T) == (min(naive[:T]), max(naive[:T]))
        # Strict rule: fewer than T pool samples are above c, at least T minus the ties at c
        above = sum(1 for s in pool if s > c)
        assert T - pool.count(c) <= above < T
        if len(set(pool)) == 1:
            assert above == 0


# Per-month metrics

def test_monthly_f1_fixtures():
    batch = make_batch(0, [(0.1, 1, 1), (0.2, 1, 0), (0.3, 0, 0)])
    assert monthly_f1(batch) == pytest.approx(2 / 3, abs=1e-12)
    assert monthly_f1(batch, {"m0-1"}) == 1.0
    assert monthly_f1(batch, {"m0-0", "m0-1"}) is None
    assert monthly_f1(batch, set(batch.sample_ids)) is None
    assert monthly_fnr(batch) == 0.5


def test_monthly_f1_unknown_id():
    with pytest.raises(UnknownRejectedId):
        monthly_f1(make_batch(0, [(0.1, 1, 1)]), {"nope"})


# Simulation loop

def test_hand_trace_cutoff(hand_stream):
    trace = run_posthoc_simulation(hand_stream, RejectionConfig(1))
    (month,) = trace.months
    assert month.quota == 2
    assert month.pool_size == 3
    assert month.threshold_low == 0.2
    assert month.threshold_high is None
    assert month.rejections == 2
    assert month.rejected_ids == ("m1-0", "m1-2")
    assert month.retained_count == 1
    assert month.retained_f1 == 1.0
    assert month.baseline_f1 == pytest.approx(0.5)


def test_hand_trace_band(hand_stream):
    (month,) = run_posthoc_simulation(hand_stream, RejectionConfig(1, method="band")).months
    assert (month.threshold_low, month.threshold_high) == (0.2, 0.9)
    # 0.95 lies above the band, only 0.5 falls inside it
    assert month.rejected_ids == ("m1-2",)


def test_identical_scores_never_reject():
    stream = make_stream([[(0.4, 1, 1), (0.4, 0, 1)]] * 4)
    trace = run_posthoc_simulation(stream, RejectionConfig(1))
    assert trace.realized_rejections == [0, 0, 0]


def test_saturation_rejects_everything():
    stream = make_stream([[(0.1, 1, 1), (0.9, 0, 0)], [(0.5, 1, 1), (0.95, 1, 0)]])
    (month,) = run_posthoc_simulation(stream, RejectionConfig(10)).months
    assert month.capped
    assert month.quota == 2
    assert month.rejections == 2
    assert month.retained_f1 is None


def test_capping_is_logged(caplog):
    stream = make_stream([[(0.1, 1, 1)], [(0.5, 1, 1)]])
    with caplog.at_level(logging.WARNING, logger="driftgrid"):
        run_posthoc_simulation(stream, RejectionConfig(3))
    assert "capped" in caplog.text


def test_empty_month_is_kept_in_trace():
    stream = make_stream([[(0.1, 1, 1), (0.2, 1, 1)], [], [(0.9, 1, 0), (0.05, 1, 1)]])
    trace = run_posthoc_simulation(stream, RejectionConfig(1))
    empty, last = trace.months
    assert empty.batch_size == 0 and empty.rejections == 0
    assert empty.retained_f1 is None and empty.realized_fraction is None
    assert last.pool_size == 2


def test_pool_holds_all_previous_months():
    stream = _random_stream(np.random.default_rng(1))
    trace = run_posthoc_simulation(stream, RejectionConfig(2))
    scores = [[r.score("msp_u") for r in b.records] for b in stream.batches]
    for i, month in enumerate(trace.months, start=1):
        pool = [s for month_scores in scores[:i] for s in month_scores]
        assert month.pool_size == len(pool)
        assert month.threshold_low == ood_threshold(pool, (i + 1) * 2)
        assert month.rejections == sum(1 for s in scores[i] if s > month.threshold_low)
        assert month.retained_count + month.rejections == month.batch_size


def test_window_limits_pool():
    stream = _random_stream(np.random.default_rng(2))
    trace = run_posthoc_simulation(stream, RejectionConfig(1, window=2))
    assert [m.pool_size for m in trace.months] == [30, 60, 60, 60, 60]
    assert [m.quota for m in trace.months] == [2, 3, 3, 3, 3]


def test_raising_rho_never_lowers_rejections():
    stream = _random_stream(np.random.default_rng(3))
    previous = None
    for rho in range(1, 12):
        realized = run_posthoc_simulation(stream, RejectionConfig(rho)).realized_rejections
        if previous is not None:
            assert all(a >= b for a, b in zip(realized, previous))
        previous = realized


def test_simulation_is_deterministic():
    stream = _random_stream(np.random.default_rng(4))
    cfg = RejectionConfig(3, method="band")
    assert run_posthoc_simulation(stream, cfg) == run_posthoc_simulation(stream, cfg)


def test_confidence_scores_are_flipped():
    # margin: the small margins are the uncertain ones
    stream = make_stream([[(2.0, 1, 1), (0.2, 1, 1), (1.0, 1, 1)], [(0.1, 1, 0), (3.0, 1, 1)]], score="margin")
    (month,) = run_posthoc_simulation(stream, RejectionConfig(1, score_name="margin")).months
    assert month.threshold_low == -1.0
    assert month.rejected_ids == ("m1-0",)


def test_simulation_errors(hand_stream):
    with pytest.raises(TooFewMonths):
        run_posthoc_simulation(make_stream([[(0.1, 1, 1)]]), RejectionConfig(1))
    with pytest.raises(MissingScore):
        run_posthoc_simulation(hand_stream, RejectionConfig(1, score_name="cade_ood"))


def test_rejection_config_validation():
    with pytest.raises(OutOfRange):
        RejectionConfig(0)
    with pytest.raises(ConfigError):
        RejectionConfig(1, method="median")
    with pytest.raises(ConfigError):
        RejectionConfig(1, coverage_grid=(0.5, 0.2, 1.0))
    with pytest.raises(OutOfRange):
        RejectionConfig(1, coverage_grid=(0.0, 1.0))
    assert len(DEFAULT_COVERAGE_GRID) == 20
    assert DEFAULT_COVERAGE_GRID[0] == 0.05 and DEFAULT_COVERAGE_GRID[-1] == 1.0


def test_outcome_invariant():
    with pytest.raises(InvariantViolation):
        MonthOutcome(1, 3, 4, None, None)


# Summary metrics

def test_benefit_fraction_two_of_four():
    trace = _trace([0] * 4, f1_pairs=[(0.9, 0.8), (0.7, 0.8), (0.95, 0.9), (0.8, 0.8)])
    assert benefit_fraction(trace) == pytest.approx(50.0, abs=1e-12)


def test_benefit_fraction_edges():
    assert benefit_fraction(_trace([0, 0], f1_pairs=[(0.8, 0.8), (0.5, 0.5)])) == 0.0
    assert benefit_fraction(_trace([0, 0], f1_pairs=[(0.9, 0.8), (0.6, 0.5)])) == 100.0
    # Undefined months drop out of numerator and denominator
    assert benefit_fraction(_trace([0, 0, 0], f1_pairs=[(0.9, 0.8), (None, 0.5), (0.4, 0.5)])) == 50.0
    with pytest.raises(NoDefinedMonths):
        benefit_fraction(_trace([0], f1_pairs=[(None, 0.5)]))


def test_rejection_bias_fixtures():
    assert rejection_bias(_trace([450, 350, 400]), 400) == pytest.approx(0.0, abs=1e-12)
    assert rejection_bias(_trace([400, 400]), 400) == 0.0
    assert rejection_bias(_trace([900, 900]), 400) == pytest.approx(500.0, abs=1e-12)


def test_rejection_volatility_fixtures():
    assert rejection_volatility(_trace([0, 100])) == pytest.approx(50.0, abs=1e-12)
    assert rejection_volatility(_trace([7, 7, 7])) == 0.0
    assert rejection_volatility(_trace([42])) == 0.0


def test_rejection_stats_skip_empty_months():
    months = (MonthOutcome(1, 500, 450, None, None), MonthOutcome(2, 0, 0, None, None),
              MonthOutcome(3, 500, 350, None, None))
    trace = SimulationTrace(400, "cutoff", "msp_u", months)
    assert rejection_bias(trace, 400) == 0.0
    assert rejection_volatility(trace) == pytest.approx(50.0)
    assert rejection_mapd(trace, 400) == pytest.approx(12.5)


def test_mean_retained_f1_and_concatenation():
    a = _trace([1, 2], f1_pairs=[(0.5, 0.4), (None, 0.4)])
    b = _trace([3], f1_pairs=[(1.0, 0.9)])
    assert mean_retained_f1(a) == 0.5
    joined = concatenate_traces([a, b])
    assert joined.realized_rejections == [1, 2, 3]
    assert mean_retained_f1(joined) == 0.75
    with pytest.raises(ConfigError):
        concatenate_traces([a, _trace([1], rho=5)])


# AURC[F1]*

def test_full_coverage_point_is_the_baseline():
    stream = _random_stream(np.random.default_rng(5))
    curve = f1_risk_curve(stream, RejectionConfig(1, coverage_grid=(0.5, 1.0)))
    coverage, f1_hat, risk = curve[-1]
    baseline = [monthly_f1(b) for b in stream.batches[1:]]
    assert coverage == 1.0
    assert f1_hat == pytest.approx(np.mean([v for v in baseline if v is not None]), abs=1e-12)
    assert risk == pytest.approx(1.0 - f1_hat)


def test_constant_f1_curve_integrates_to_its_risk():
    # Identical scores never pass the strict cut-off, so every coverage keeps the baseline F1 of 2/3
    stream = make_stream([[(0.3, 1, 1), (0.3, 1, 0), (0.3, 0, 0)]] * 3)
    assert aurc_f1_star(stream, RejectionConfig(1)) == pytest.approx(100.0 / 3.0, abs=1e-9)


def test_oracle_scores_beat_random_scores():
    rng = np.random.default_rng(6)
    oracle_rows, random_rows = [], []
    for _ in range(8):
        y_true = rng.integers(0, 2, 50)
        wrong = rng.random(50) < 0.2
        y_pred = np.where(wrong, 1 - y_true, y_true)
        oracle_u = np.where(wrong, 0.9 + 0.1 * rng.random(50), 0.9 * rng.random(50))
        random_u = rng.random(50)
        oracle_rows.append(list(zip(oracle_u.tolist(), y_true.tolist(), y_pred.tolist())))
        random_rows.append(list(zip(random_u.tolist(), y_true.tolist(), y_pred.tolist())))
    cfg = RejectionConfig(1)
    assert aurc_f1_star(make_stream(oracle_rows), cfg) < aurc_f1_star(make_stream(random_rows), cfg)


def test_aurc_f1_star_grid_must_end_at_one(hand_stream):
    with pytest.raises(ConfigError):
        aurc_f1_star(hand_stream, RejectionConfig(1, coverage_grid=(0.5, 0.9)))
    with pytest.raises(ConfigError):
        aurc_f1_star(hand_stream, RejectionConfig(1, coverage_grid=(1.0,)))


def test_registry_orientation_override():
    stream = make_stream([[(0.1, 1, 1), (0.9, 1, 1), (0.6, 1, 1)], [(0.05, 1, 0), (0.8, 1, 1)]], score="hcc")
    registry = ScoreRegistry()
    registry.register("hcc", False)
    (month,) = run_posthoc_simulation(stream, RejectionConfig(1, score_name="hcc"), registry).months
    assert month.rejected_ids == ("m1-0",)
