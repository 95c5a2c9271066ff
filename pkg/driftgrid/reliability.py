"""Ranking-quality metrics: risk-coverage curves, AURC and AUROC.

Samples are ordered from most to least confident (ascending uncertainty,
ties broken by original index). The RC curve records, for every prefix k,
coverage k/n and risk = errors in the prefix / k; AURC is the mean of the
prefix risks.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from .errors import EmptyInput, SingleClassInput
from .scorers.orientation import ScoreRegistry
from .stream_model import TemporalStream


@dataclass(frozen=True, eq=False)
class RCCurve:
    """Risk-coverage curve over n samples.

    Attributes:
        coverages: k/n for k = 1..n, strictly increasing, ends at 1.0
        risks: 0/1 error rate of each prefix
        aurc: Mean of the prefix risks, in [0, 1]
        n: Sample count
    """
    coverages: np.ndarray
    risks: np.ndarray
    aurc: float
    n: int

    @property
    def points(self) -> Sequence[Tuple[float, float]]:
        return list(zip(self.coverages.tolist(), self.risks.tolist()))

    @property
    def aurc_percent(self) -> float:
        return 100.0 * self.aurc


def _prefix_risks(errors_in_order: np.ndarray) -> np.ndarray:
    n = errors_in_order.size
    return np.cumsum(errors_in_order, dtype=np.int64) / np.arange(1, n + 1, dtype=np.int64)


def rc_curve(records: Sequence[Tuple[float, bool]]) -> RCCurve:
    """Build the risk-coverage curve from (uncertainty, correct) pairs.

    Raises:
        EmptyInput: If records is empty
    """
    if len(records) == 0:
        raise EmptyInput("rc_curve needs at least one record")
    uncertainty = np.array([u for u, _ in records], dtype=float)
    correct = np.array([bool(c) for _, c in records], dtype=bool)
    order = np.argsort(uncertainty, kind="stable")
    risks = _prefix_risks(~correct[order])
    n = correct.size
    coverages = np.arange(1, n + 1, dtype=np.int64) / n
    return RCCurve(coverages, risks, math.fsum(risks.tolist()) / n, n)


def aurc(curve: RCCurve) -> float:
    """Raw AURC in [0, 1]; multiply by 100 for the tabulated form."""
    return curve.aurc


def oracle_aurc(correct: Sequence[bool]) -> float:
    """AURC of the perfect ranking, every error ranked least confident."""
    correct = np.asarray(correct, dtype=bool)
    if correct.size == 0:
        raise EmptyInput("oracle_aurc needs at least one record")
    ordered = np.sort(~correct, kind="stable")
    return math.fsum(_prefix_risks(ordered).tolist()) / correct.size


def excess_aurc(curve: RCCurve, correct: Sequence[bool]) -> float:
    """AURC above the oracle ranking of the same errors (E-AURC)."""
    return curve.aurc - oracle_aurc(correct)


def auroc(scores: Sequence[Tuple[float, int]]) -> float:
    """Probability that a random positive outscores a random negative.

    Mann-Whitney form with average ranks, i.e. half credit per tied pair.

    Raises:
        SingleClassInput: If either class is absent
    """
    values = np.array([s for s, _ in scores], dtype=float)
    labels = np.array([y for _, y in scores], dtype=int)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClassInput("auroc needs at least one positive and one negative")
    ranks = rankdata(values, method="average")
    u_statistic = float(np.sum(ranks[labels == 1])) - n_pos * (n_pos + 1) / 2.0
    return u_statistic / (n_pos * n_neg)


def stream_rc_curve(stream: TemporalStream, score_name: str, registry: Optional[ScoreRegistry] = None) -> RCCurve:
    """RC curve over every record of a stream, using the canonical uncertainty of score_name."""
    registry = registry or ScoreRegistry()
    orientation = registry.get(score_name)
    records = stream.records
    uncertainty = [r.score(score_name) if orientation.higher_means_more_uncertain else -r.score(score_name)
                   for r in records]
    return rc_curve(list(zip(uncertainty, (r.correct for r in records))))


def stream_auroc(stream: TemporalStream) -> Optional[float]:
    """AUROC of prob_positive over the stream, None when undefined.

    Undefined when any record lacks prob_positive or only one class is present.
    """
    records = stream.records
    if not records or any(r.prob_positive is None for r in records):
        return None
    try:
        return auroc([(r.prob_positive, r.y_true) for r in records])
    except SingleClassInput:
        return None
