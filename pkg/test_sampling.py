"""Label-budget selection schemes."""

import numpy as np
import pytest

from conftest import make_batch
from driftgrid.errors import (
    BadFoldAssignment,
    BudgetExceedsPool,
    FoldTooSmall,
    InvariantViolation,
    MissingScore,
    SingleClassInput,
)
from driftgrid.sampling import (
    SelectionResult,
    apportion,
    contiguous_fold_assignment,
    fold_shares,
    select_uncertain,
    stratified_fold_assignment,
    stratk_sample,
    uncertainty_fold_sample,
)


def _pool(n_malware, n_benign):
    return [(f"s{i}", 1 if i < n_malware else 0) for i in range(n_malware + n_benign)]


# Monthly query

def test_top_two():
    batch = make_batch(3, [(0.9, 1, 1), (0.1, 1, 1), (0.5, 0, 0)])
    result = select_uncertain(batch, "msp_u", 2)
    assert result.selected_ids == ("m3-0", "m3-2")
    assert result.scheme == "top-uncertain"


def test_budget_covers_batch():
    batch = make_batch(0, [(0.2, 1, 1), (0.4, 0, 0)])
    assert set(select_uncertain(batch, "msp_u", 5).selected_ids) == {"m0-0", "m0-1"}


def test_ties_follow_input_order():
    batch = make_batch(0, [(0.5, 1, 1), (0.5, 1, 1), (0.5, 0, 0)])
    assert select_uncertain(batch, "msp_u", 1).selected_ids == ("m0-0",)


def test_prefix_of_full_sort():
    rng = np.random.default_rng(0)
    values = rng.random(40)
    batch = make_batch(0, [(v, 1, 1) for v in values.tolist()])
    expected = [f"m0-{i}" for i in sorted(range(40), key=lambda i: (-values[i], i))]
    for B in (1, 7, 40):
        assert list(select_uncertain(batch, "msp_u", B).selected_ids) == expected[:B]


def test_confidence_score_selects_smallest_margin():
    batch = make_batch(0, [(2.0, 1, 1), (0.1, 1, 1), (0.7, 1, 1)], score="margin")
    assert select_uncertain(batch, "margin", 1).selected_ids == ("m0-1",)


def test_missing_score():
    with pytest.raises(MissingScore):
        select_uncertain(make_batch(0, [(0.2, 1, 1)]), "cade_ood", 1)


# Stratified subsample

def test_apportion_rules():
    assert apportion({1: 90, 0: 10}, 10) == {1: 9, 0: 1}
    assert apportion({1: 3, 0: 1}, 2) == {1: 2, 0: 0}
    assert sum(apportion({1: 7, 0: 6}, 5).values()) == 5


def test_stratk_ninety_ten():
    pool = _pool(90, 10)
    result = stratk_sample(pool, 10, seed=1)
    labels = dict(pool)
    assert len(result) == 10
    assert sum(labels[s] for s in result.selected_ids) == 9
    assert result.seed == 1


def test_stratk_whole_pool_and_order():
    pool = _pool(3, 2)
    assert stratk_sample(pool, 5, seed=0).selected_ids == tuple(s for s, _ in pool)
    ids = stratk_sample(_pool(30, 30), 12, seed=4).selected_ids
    assert list(ids) == sorted(ids, key=lambda s: int(s[1:]))


def test_stratk_three_to_one():
    result = stratk_sample(_pool(3, 1), 2, seed=0)
    assert all(s in {"s0", "s1", "s2"} for s in result.selected_ids)


def test_stratk_seeds():
    pool = _pool(60, 40)
    labels = dict(pool)
    first = stratk_sample(pool, 25, seed=7)
    assert stratk_sample(pool, 25, seed=7) == first
    other = stratk_sample(pool, 25, seed=8)
    assert sum(labels[s] for s in other.selected_ids) == sum(labels[s] for s in first.selected_ids)
    assert other.selected_ids != first.selected_ids


def test_stratk_errors():
    with pytest.raises(BudgetExceedsPool):
        stratk_sample(_pool(2, 2), 5, seed=0)
    with pytest.raises(SingleClassInput):
        stratk_sample(_pool(4, 0), 2, seed=0)


# Fold-based subsample

def test_fold_shares():
    assert fold_shares(4, 2) == [2, 2]
    assert fold_shares(7, 3) == [3, 2, 2]
    assert fold_shares(0, 6) == [0] * 6


def test_two_folds_of_three():
    pool = [("a", 0.1), ("b", 0.9), ("c", 0.5), ("d", 0.3), ("e", 0.2), ("f", 0.8)]
    folds = contiguous_fold_assignment([s for s, _ in pool], 2)
    assert folds == {"a": 0, "b": 0, "c": 0, "d": 1, "e": 1, "f": 1}
    result = uncertainty_fold_sample(pool, 4, 2, folds)
    assert result.selected_ids == ("b", "c", "f", "d")


def test_uneven_budget_goes_to_low_folds():
    pool = [(f"s{i}", float(i)) for i in range(9)]
    folds = contiguous_fold_assignment([s for s, _ in pool], 3)
    assert uncertainty_fold_sample(pool, 5, 3, folds).selected_ids == ("s2", "s1", "s5", "s4", "s8")


def test_zero_budget():
    pool = [(f"s{i}", 0.5) for i in range(12)]
    folds = contiguous_fold_assignment([s for s, _ in pool])
    assert len(uncertainty_fold_sample(pool, 0, 6, folds)) == 0


def test_fold_errors():
    pool = [("a", 0.1), ("b", 0.9), ("c", 0.5)]
    with pytest.raises(BadFoldAssignment):
        uncertainty_fold_sample(pool, 2, 2, {"a": 0, "b": 1})
    with pytest.raises(BadFoldAssignment):
        uncertainty_fold_sample(pool, 2, 2, {"a": 0, "b": 1, "c": 2})
    with pytest.raises(FoldTooSmall):
        uncertainty_fold_sample(pool, 3, 2, {"a": 0, "b": 1, "c": 1})


def test_stratified_folds_deal_round_robin():
    pool = [("m1", 1), ("b1", 0), ("m2", 1), ("m3", 1), ("b2", 0)]
    assert stratified_fold_assignment(pool, 2) == {"b1": 0, "b2": 1, "m1": 0, "m2": 1, "m3": 0}


def test_selection_result_rejects_duplicates():
    with pytest.raises(InvariantViolation):
        SelectionResult(("a", "a"), "stratk", 2)
