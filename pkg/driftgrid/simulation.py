"""Post-hoc selective classification over a temporal stream.

Month 1 seeds an unlabeled calibration pool with its scores. For every later
month i a rejection threshold is fitted on the pool so that roughly T = i*rho
pool samples would be rejected, the month's own scores are tested against it,
and the month's scores join the pool afterwards. Retained and baseline F1 are
recorded per month; the summary metrics (BF*, rejection bias and volatility,
AURC[F1]*) are computed from the resulting trace.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .errors import (
    ConfigError,
    InvariantViolation,
    NoDefinedMonths,
    OutOfRange,
    QuotaExceedsPool,
    TooFewMonths,
    UnknownRejectedId,
)
from .scorers.orientation import ScoreRegistry
from .stream_model import MonthBatch, TemporalStream


logger = logging.getLogger(__name__)

REJECTION_METHODS = ("cutoff", "band")
DEFAULT_COVERAGE_GRID = tuple(round(0.05 * k, 2) for k in range(1, 21))
DEFAULT_RHO_SWEEP = tuple(range(100, 1501, 100))


@dataclass(frozen=True)
class RejectionConfig:
    """How a simulation rejects samples.

    Attributes:
        quota_rho: Target monthly rejections
        method: "cutoff" (reject s > c) or "band" (reject l <= s <= u)
        score_name: Score column used as uncertainty
        coverage_grid: Target coverages for AURC[F1]*
        window: Months kept in the calibration pool, None = all past months
    """
    quota_rho: int
    method: str = "cutoff"
    score_name: str = "msp_u"
    coverage_grid: Tuple[float, ...] = DEFAULT_COVERAGE_GRID
    window: Optional[int] = None

    def __post_init__(self):
        if int(self.quota_rho) != self.quota_rho or self.quota_rho < 1:
            raise OutOfRange(f"quota_rho must be a positive integer, got {self.quota_rho!r}")
        if self.method not in REJECTION_METHODS:
            raise ConfigError(f"unknown rejection method '{self.method}', expected one of {REJECTION_METHODS}")
        grid = tuple(float(c) for c in self.coverage_grid)
        if not grid or any(not 0.0 < c <= 1.0 for c in grid):
            raise OutOfRange(f"coverage grid values must lie in (0, 1], got {grid}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"coverage grid must be strictly ascending, got {grid}")
        if self.window is not None and self.window < 1:
            raise OutOfRange(f"window must be at least 1 month, got {self.window}")
        object.__setattr__(self, "quota_rho", int(self.quota_rho))
        object.__setattr__(self, "coverage_grid", grid)


@dataclass(frozen=True)
class MonthOutcome:
    """What happened in one simulated month.

    For the cutoff method only threshold_low is set (the cut-off c); for the
    band method both bounds are set. Thresholds are None when no threshold was
    fitted (empty pool or zero quota).
    """
    month_index: int
    batch_size: int
    rejections: int
    retained_f1: Optional[float]
    baseline_f1: Optional[float]
    threshold_low: Optional[float] = None
    threshold_high: Optional[float] = None
    quota: int = 0
    pool_size: int = 0
    capped: bool = False
    retained_fnr: Optional[float] = None
    baseline_fnr: Optional[float] = None
    rejected_ids: Tuple[str, ...] = ()

    def __post_init__(self):
        if not 0 <= self.rejections <= self.batch_size:
            raise InvariantViolation(
                f"month {self.month_index}: {self.rejections} rejections out of {self.batch_size} arrivals"
            )

    @property
    def retained_count(self) -> int:
        return self.batch_size - self.rejections

    @property
    def realized_fraction(self) -> Optional[float]:
        if self.batch_size == 0:
            return None
        return self.rejections / self.batch_size


@dataclass(frozen=True)
class SimulationTrace:
    """Per-month outcomes of one simulation run (months 2..N)."""
    rho: int
    method: str
    score_name: str
    months: Tuple[MonthOutcome, ...]
    dataset_name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "months", tuple(self.months))

    def __len__(self) -> int:
        return len(self.months)

    @property
    def realized_rejections(self) -> List[int]:
        return [m.rejections for m in self.months]

    @property
    def retained_f1(self) -> List[Optional[float]]:
        return [m.retained_f1 for m in self.months]

    @property
    def baseline_f1(self) -> List[Optional[float]]:
        return [m.baseline_f1 for m in self.months]

    @property
    def delta_f1(self) -> List[Optional[float]]:
        return [
            None if m.retained_f1 is None or m.baseline_f1 is None else m.retained_f1 - m.baseline_f1
            for m in self.months
        ]


# Threshold subroutines

def _descending(pool: Sequence[float]) -> np.ndarray:
    return -np.sort(-np.asarray(pool, dtype=float), kind="stable")


def ood_threshold(pool: Sequence[float], T: int) -> float:
    """Cut-off c such that the T largest pool scores sit at or above it.

    Returns the T-th largest pool value; downstream rejection is s > c.

    Raises:
        QuotaExceedsPool: If T > len(pool)
    """
    if T < 1:
        raise OutOfRange(f"quota must be at least 1, got {T}")
    if T > len(pool):
        raise QuotaExceedsPool(T, len(pool))
    return float(_descending(pool)[T - 1])


def softmax_thresholds(pool: Sequence[float], T: int) -> Tuple[float, float]:
    """Band (lower, upper) spanning the T largest pool scores.

    T = 0 gives the empty band (1.0, 0.0). Downstream rejection is l <= s <= u.

    Raises:
        QuotaExceedsPool: If T > len(pool)
    """
    if T < 0:
        raise OutOfRange(f"quota must be non-negative, got {T}")
    if T > len(pool):
        raise QuotaExceedsPool(T, len(pool))
    if T == 0:
        return 1.0, 0.0
    top = _descending(pool)[:T]
    return float(top.min()), float(top.max())


# Per-month classification metrics

def _f1_from_arrays(y_true: np.ndarray, y_pred: np.ndarray) -> Optional[float]:
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    if y_true.size == 0 or tp + fp + fn == 0:
        return None
    return 2 * tp / (2 * tp + fp + fn)


def _fnr_from_arrays(y_true: np.ndarray, y_pred: np.ndarray) -> Optional[float]:
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    if tp + fn == 0:
        return None
    return fn / (tp + fn)


def _retained_arrays(batch: MonthBatch, rejected: Set[str]) -> Tuple[np.ndarray, np.ndarray]:
    ids = set(batch.sample_ids)
    for sample_id in sorted(rejected):
        if sample_id not in ids:
            raise UnknownRejectedId(sample_id)
    kept = [r for r in batch.records if r.sample_id not in rejected]
    return (np.array([r.y_true for r in kept], dtype=int),
            np.array([r.y_pred for r in kept], dtype=int))


def monthly_f1(batch: MonthBatch, rejected: Set[str] = frozenset()) -> Optional[float]:
    """F1 (positive = malware) over the non-rejected records of a month.

    Returns None when nothing is retained or TP + FP + FN = 0.

    Raises:
        UnknownRejectedId: If a rejected id is not in the batch
    """
    return _f1_from_arrays(*_retained_arrays(batch, set(rejected)))


def monthly_fnr(batch: MonthBatch, rejected: Set[str] = frozenset()) -> Optional[float]:
    """FN / (FN + TP) over the non-rejected records, None without positives."""
    return _fnr_from_arrays(*_retained_arrays(batch, set(rejected)))


# Simulation engine

@dataclass
class _MonthArrays:
    month_index: int
    ids: Tuple[str, ...]
    uncertainty: np.ndarray
    y_true: np.ndarray
    y_pred: np.ndarray
    baseline_f1: Optional[float] = field(init=False)
    baseline_fnr: Optional[float] = field(init=False)

    def __post_init__(self):
        self.baseline_f1 = _f1_from_arrays(self.y_true, self.y_pred)
        self.baseline_fnr = _fnr_from_arrays(self.y_true, self.y_pred)


def _month_arrays(stream: TemporalStream, score_name: str, registry: ScoreRegistry) -> List[_MonthArrays]:
    months = []
    for batch in stream.batches:
        raw = [r.score(score_name) for r in batch.records]
        months.append(_MonthArrays(
            batch.month_index,
            tuple(batch.sample_ids),
            registry.uncertainties(score_name, raw),
            np.array([r.y_true for r in batch.records], dtype=int),
            np.array([r.y_pred for r in batch.records], dtype=int),
        ))
    return months


# (months in pool, pool size) -> requested quota T
QuotaRule = Callable[[int, int], int]


def _simulate(months: List[_MonthArrays], method: str, quota_rule: QuotaRule,
              window: Optional[int], cap_warning: bool) -> List[MonthOutcome]:
    if len(months) < 2:
        raise TooFewMonths(f"simulation needs at least 2 months, stream has {len(months)}")

    history = [months[0].uncertainty]
    outcomes = []
    for month in months[1:]:
        pool_months = history if window is None else history[-window:]
        pool = np.concatenate(pool_months)
        requested = quota_rule(len(pool_months), pool.size)
        quota = min(requested, pool.size)
        capped = quota < requested
        if capped and cap_warning:
            logger.warning("month %d: quota %d exceeds calibration pool of %d, capped",
                           month.month_index, requested, pool.size)

        low: Optional[float] = None
        high: Optional[float] = None
        if method == "cutoff":
            if quota >= 1:
                low = ood_threshold(pool, quota)
                mask = month.uncertainty > low
            else:
                mask = np.zeros(month.uncertainty.size, dtype=bool)
        else:
            low, high = softmax_thresholds(pool, quota)
            mask = (month.uncertainty >= low) & (month.uncertainty <= high)
        logger.debug("month %d: T=%d pool=%d thresholds=(%s, %s) rejected=%d",
                     month.month_index, quota, pool.size, low, high, int(mask.sum()))

        kept = ~mask
        outcomes.append(MonthOutcome(
            month_index=month.month_index,
            batch_size=len(month.ids),
            rejections=int(mask.sum()),
            retained_f1=_f1_from_arrays(month.y_true[kept], month.y_pred[kept]),
            baseline_f1=month.baseline_f1,
            threshold_low=low,
            threshold_high=high,
            quota=quota,
            pool_size=int(pool.size),
            capped=capped,
            retained_fnr=_fnr_from_arrays(month.y_true[kept], month.y_pred[kept]),
            baseline_fnr=month.baseline_fnr,
            rejected_ids=tuple(sid for sid, rejected in zip(month.ids, mask) if rejected),
        ))
        history.append(month.uncertainty)
    return outcomes


def run_posthoc_simulation(stream: TemporalStream, cfg: RejectionConfig,
                           registry: Optional[ScoreRegistry] = None) -> SimulationTrace:
    """Run the month-by-month rejection protocol.

    The quota for month i is i * rho with an unbounded pool. With a rolling
    window of k pool months it is (k + 1) * rho, which reduces to the same
    rule while the pool is still growing. Quotas larger than the pool are
    capped and logged.

    Raises:
        MissingScore: If a record lacks cfg.score_name
        TooFewMonths: If the stream has fewer than 2 months
    """
    registry = registry or ScoreRegistry()
    months = _month_arrays(stream, cfg.score_name, registry)
    rho = cfg.quota_rho

    def quota_rule(pool_months: int, pool_size: int) -> int:
        return (pool_months + 1) * rho

    outcomes = _simulate(months, cfg.method, quota_rule, cfg.window, cap_warning=True)
    return SimulationTrace(rho, cfg.method, cfg.score_name, tuple(outcomes), stream.dataset_name)


# Summary metrics

def benefit_fraction(trace: SimulationTrace) -> float:
    """Percentage of months where rejection strictly improved F1.

    Months with an undefined F1 on either side are left out.

    Raises:
        NoDefinedMonths: If no month has both F1 values defined
    """
    pairs = [(m.retained_f1, m.baseline_f1) for m in trace.months
             if m.retained_f1 is not None and m.baseline_f1 is not None]
    if not pairs:
        raise NoDefinedMonths("no month has both retained and baseline F1 defined")
    return 100.0 * sum(1 for retained, base in pairs if retained > base) / len(pairs)


def _counted_rejections(trace: SimulationTrace) -> np.ndarray:
    # Months without arrivals cannot meet any quota and are not counted
    counted = [m.rejections for m in trace.months if m.batch_size > 0]
    return np.array(counted, dtype=float)


def rejection_bias(trace: SimulationTrace, rho: int) -> float:
    """Mean signed deviation of realized rejections from rho (positive = over-rejection)."""
    realized = _counted_rejections(trace)
    if realized.size == 0:
        return 0.0
    return float(np.mean(realized - rho))


def rejection_volatility(trace: SimulationTrace) -> float:
    """Population standard deviation of realized rejections."""
    realized = _counted_rejections(trace)
    if realized.size == 0:
        return 0.0
    return float(np.std(realized))


def rejection_mapd(trace: SimulationTrace, rho: int) -> float:
    """Mean absolute percentage deviation of realized rejections from rho."""
    realized = _counted_rejections(trace)
    if realized.size == 0:
        return 0.0
    return float(100.0 * np.mean(np.abs(realized - rho)) / rho)


def mean_retained_f1(trace: SimulationTrace) -> Optional[float]:
    """Mean post-rejection F1 over months where it is defined."""
    values = [v for v in trace.retained_f1 if v is not None]
    if not values:
        return None
    return math.fsum(values) / len(values)


def concatenate_traces(traces: Sequence[SimulationTrace]) -> SimulationTrace:
    """Pool the months of several runs (e.g. seeds) into one trace.

    Metrics over the result are computed across all concatenated months rather
    than averaged per run.
    """
    if not traces:
        raise ConfigError("concatenate_traces needs at least one trace")
    first = traces[0]
    for trace in traces[1:]:
        if (trace.rho, trace.method, trace.score_name) != (first.rho, first.method, first.score_name):
            raise ConfigError("cannot concatenate traces with different rho, method or score")
    months = tuple(m for trace in traces for m in trace.months)
    return SimulationTrace(first.rho, first.method, first.score_name, months, first.dataset_name)


def _coverage_quota(coverage: float) -> QuotaRule:
    def quota_rule(pool_months: int, pool_size: int) -> int:
        # Round first so e.g. (1 - 0.95) * 100 does not ceil to 6
        return math.ceil(round((1.0 - coverage) * pool_size, 9))
    return quota_rule


def f1_risk_curve(stream: TemporalStream, cfg: RejectionConfig,
                  registry: Optional[ScoreRegistry] = None) -> List[Tuple[float, float, float]]:
    """(coverage, mean retained F1, 1 - F1) for every coverage of cfg.coverage_grid.

    At target coverage c each month rejects against a quota of
    ceil((1 - c) * |pool|) pool samples.

    Raises:
        NoDefinedMonths: If some coverage leaves no month with a defined F1
    """
    registry = registry or ScoreRegistry()
    months = _month_arrays(stream, cfg.score_name, registry)
    curve = []
    for coverage in cfg.coverage_grid:
        outcomes = _simulate(months, cfg.method, _coverage_quota(coverage), cfg.window, cap_warning=False)
        values = [m.retained_f1 for m in outcomes if m.retained_f1 is not None]
        if not values:
            raise NoDefinedMonths(f"no month has a defined retained F1 at coverage {coverage}")
        f1_hat = math.fsum(values) / len(values)
        curve.append((coverage, f1_hat, 1.0 - f1_hat))
    return curve


def aurc_f1_star(stream: TemporalStream, cfg: RejectionConfig,
                 registry: Optional[ScoreRegistry] = None) -> float:
    """Area under the 1 - F1 risk curve over the coverage grid, normalized by its span, in percent."""
    grid = cfg.coverage_grid
    if len(grid) < 2 or grid[-1] != 1.0:
        raise ConfigError(f"AURC[F1]* needs a grid of at least 2 coverages ending at 1.0, got {grid}")
    curve = f1_risk_curve(stream, cfg, registry)
    coverages = np.array([c for c, _, _ in curve])
    risks = np.array([r for _, _, r in curve])
    return float(100.0 * trapezoid(risks, coverages) / (coverages[-1] - coverages[0]))
