"""Label-budget sample selection.

Three schemes: the monthly query of the most uncertain samples, a
label-stratified random subsample of an initial pool, and a per-fold
top-uncertainty subsample driven by externally computed fold scores.
Random draws use numpy's PCG64 generator seeded from the run seed.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    BadFoldAssignment,
    BudgetExceedsPool,
    FoldTooSmall,
    InvariantViolation,
    OutOfRange,
    SingleClassInput,
)
from .scorers.orientation import ScoreRegistry
from .stream_model import MonthBatch


logger = logging.getLogger(__name__)

SCHEMES = ("top-uncertain", "stratk", "uncertainty-folds")
DEFAULT_FOLDS = 6


@dataclass(frozen=True)
class SelectionResult:
    """Selected sample ids plus what produced them."""
    selected_ids: Tuple[str, ...]
    scheme: str
    budget: int
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "selected_ids", tuple(self.selected_ids))
        if len(set(self.selected_ids)) != len(self.selected_ids):
            raise InvariantViolation(f"{self.scheme} selection contains duplicate ids")

    def __len__(self) -> int:
        return len(self.selected_ids)


def _top_uncertain(ids: Sequence[str], uncertainty: np.ndarray, count: int) -> List[str]:
    # Stable sort on the negated values keeps input order among ties
    order = np.argsort(-uncertainty, kind="stable")[:count]
    return [ids[i] for i in order]


def select_uncertain(batch: MonthBatch, score_name: str, B: int,
                     registry: Optional[ScoreRegistry] = None) -> SelectionResult:
    """Query the B most uncertain records of a month, most uncertain first.

    Raises:
        MissingScore: If a record lacks score_name
    """
    if B < 1:
        raise OutOfRange(f"budget must be a positive integer, got {B}")
    registry = registry or ScoreRegistry()
    uncertainty = registry.uncertainties(score_name, [r.score(score_name) for r in batch.records])
    selected = _top_uncertain(batch.sample_ids, uncertainty, min(B, len(batch)))
    return SelectionResult(tuple(selected), "top-uncertain", B)


def apportion(class_counts: Mapping[int, int], budget: int) -> Dict[int, int]:
    """Largest-remainder split of budget proportional to class_counts.

    Leftover units go by largest remainder, then larger class, then larger label.
    """
    total = sum(class_counts.values())
    shares = {label: budget * n // total for label, n in class_counts.items()}
    remainders = {label: budget * n % total for label, n in class_counts.items()}
    leftover = budget - sum(shares.values())
    order = sorted(class_counts, key=lambda label: (-remainders[label], -class_counts[label], -label))
    for label in order[:leftover]:
        shares[label] += 1
    return shares


def stratk_sample(pool: Sequence[Tuple[str, int]], B0: int, seed: int) -> SelectionResult:
    """Label-stratified random subsample of B0 ids, returned in pool order.

    Raises:
        BudgetExceedsPool: If B0 > len(pool)
        SingleClassInput: If the pool lacks one of the classes
    """
    if B0 < 0:
        raise OutOfRange(f"budget must be non-negative, got {B0}")
    if B0 > len(pool):
        raise BudgetExceedsPool(B0, len(pool))
    members: Dict[int, List[int]] = {0: [], 1: []}
    for position, (_, label) in enumerate(pool):
        if label not in members:
            raise OutOfRange(f"label must be 0 or 1, got {label!r}")
        members[label].append(position)
    if not members[0] or not members[1]:
        raise SingleClassInput("stratified sampling needs both classes in the pool")

    counts = apportion({label: len(positions) for label, positions in members.items()}, B0)
    rng = np.random.default_rng(seed)
    chosen = set()
    for label in sorted(members):
        positions = members[label]
        picks = rng.choice(len(positions), size=counts[label], replace=False)
        chosen.update(positions[i] for i in picks)
    logger.debug("stratk: %d malware + %d benign from %d", counts[1], counts[0], len(pool))
    return SelectionResult(tuple(pool[i][0] for i in sorted(chosen)), "stratk", B0, seed)


def contiguous_fold_assignment(ids: Sequence[str], k: int = DEFAULT_FOLDS) -> Dict[str, int]:
    """Split ids into k contiguous folds in input order, larger folds first."""
    if k < 1:
        raise OutOfRange(f"fold count must be at least 1, got {k}")
    assignment = {}
    for fold, chunk in enumerate(np.array_split(np.arange(len(ids)), k)):
        for i in chunk:
            assignment[ids[i]] = fold
    return assignment


def stratified_fold_assignment(pool: Sequence[Tuple[str, int]], k: int = DEFAULT_FOLDS) -> Dict[str, int]:
    """Deal each class round-robin over k folds, continuing the rotation across classes."""
    if k < 1:
        raise OutOfRange(f"fold count must be at least 1, got {k}")
    assignment = {}
    turn = 0
    for label in sorted({label for _, label in pool}):
        for sample_id, sample_label in pool:
            if sample_label == label:
                assignment[sample_id] = turn % k
                turn += 1
    return assignment


def fold_shares(B0: int, k: int) -> List[int]:
    """B0 split over k folds; the +1 shares go to the lowest fold indices."""
    base, extra = divmod(B0, k)
    return [base + 1 if fold < extra else base for fold in range(k)]


def uncertainty_fold_sample(
    pool: Sequence[Tuple[str, float]],
    B0: int,
    k: int,
    fold_assignment: Mapping[str, int],
) -> SelectionResult:
    """Take the most uncertain samples of each fold and concatenate in fold order.

    Args:
        pool: (sample_id, fold_uncertainty) pairs; the uncertainty comes from a
            model that did not see the sample's fold
        B0: Total budget
        k: Number of folds
        fold_assignment: sample_id -> fold index in [0, k)

    Raises:
        BadFoldAssignment: If an id is unassigned, assigned out of range or repeated
        FoldTooSmall: If a fold holds fewer samples than its share
    """
    if k < 1:
        raise OutOfRange(f"fold count must be at least 1, got {k}")
    if B0 < 0:
        raise OutOfRange(f"budget must be non-negative, got {B0}")
    if B0 > len(pool):
        raise BudgetExceedsPool(B0, len(pool))

    folds: List[List[Tuple[str, float]]] = [[] for _ in range(k)]
    seen = set()
    for sample_id, uncertainty in pool:
        if sample_id in seen:
            raise BadFoldAssignment(f"sample '{sample_id}' appears twice in the pool")
        seen.add(sample_id)
        fold = fold_assignment.get(sample_id)
        if fold is None:
            raise BadFoldAssignment(f"sample '{sample_id}' has no fold")
        if not 0 <= fold < k:
            raise BadFoldAssignment(f"sample '{sample_id}' assigned to fold {fold}, expected 0..{k - 1}")
        folds[fold].append((sample_id, uncertainty))

    selected: List[str] = []
    for fold, (members, share) in enumerate(zip(folds, fold_shares(B0, k))):
        if len(members) < share:
            raise FoldTooSmall(fold, len(members), share)
        ids = [sample_id for sample_id, _ in members]
        uncertainty = np.array([u for _, u in members], dtype=float)
        selected.extend(_top_uncertain(ids, uncertainty, share))
    return SelectionResult(tuple(selected), "uncertainty-folds", B0)
