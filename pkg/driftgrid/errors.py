"""Error hierarchy for driftgrid.

Every input or domain error derives from ``DriftGridError`` (a ``ValueError``),
so callers that only care about "bad input" can catch one type. The CLI maps
``DriftGridError`` to exit code 1 and ``InvariantViolation`` to exit code 2.
"""

from typing import Optional


class DriftGridError(ValueError):
    """Base class for all input and domain errors."""


class InvariantViolation(RuntimeError):
    """An internal invariant failed; this is a bug, not bad input."""


# Stream ingestion

class MalformedRecord(DriftGridError):
    """A stream or embedding line could not be parsed.

    Attributes:
        line: 1-based line number in the source
        reason: What was wrong with it
    """

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class EmptyStream(DriftGridError):
    """The source contained no records."""


class DuplicateSampleId(DriftGridError):
    def __init__(self, sample_id: str, month_index: int, line: Optional[int] = None):
        self.sample_id = sample_id
        self.month_index = month_index
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}duplicate sample_id '{sample_id}' in month {month_index}")


class NonMonotoneMonths(DriftGridError):
    def __init__(self, month_index: int, previous: int, line: Optional[int] = None):
        self.month_index = month_index
        self.previous = previous
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}month {month_index} appears after month {previous}")


class MonthGap(DriftGridError):
    """Batches skip a month; empty months must be explicit empty batches."""

    def __init__(self, month_index: int, previous: int):
        self.month_index = month_index
        self.previous = previous
        super().__init__(f"month {month_index} follows month {previous}, missing months need empty batches")


class DimensionMismatch(DriftGridError):
    """A vector does not have the expected length.

    Attributes:
        row: Row identifier (line number or sample_id), if known
        expected: Expected dimension
        actual: Actual dimension
    """

    def __init__(self, expected: int, actual: int, row=None):
        self.row = row
        self.expected = expected
        self.actual = actual
        where = f"row {row}: " if row is not None else ""
        super().__init__(f"{where}expected dimension {expected}, got {actual}")


class NonFiniteValue(DriftGridError):
    def __init__(self, row, value: str):
        self.row = row
        self.value = value
        super().__init__(f"row {row}: non-finite value '{value}'")


# Scorers

class OutOfRange(DriftGridError):
    pass


class ClassTooSmall(DriftGridError):
    def __init__(self, class_label: int, size: int):
        self.class_label = class_label
        self.size = size
        super().__init__(f"class {class_label} has {size} sample(s), need at least 2")


class DegenerateMad(DriftGridError):
    def __init__(self, class_label: int):
        self.class_label = class_label
        super().__init__(f"class {class_label}: MAD is 0 (all centroid distances identical)")


class DegenerateHyperplane(DriftGridError):
    pass


class MissingEmbedding(DriftGridError):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"no embedding for sample '{sample_id}'")


class UnknownScoreName(DriftGridError):
    def __init__(self, score_name: str):
        self.score_name = score_name
        super().__init__(f"no orientation registered for score '{score_name}'")


# Metrics

class EmptyInput(DriftGridError):
    pass


class SingleClassInput(DriftGridError):
    pass


class QuotaExceedsPool(DriftGridError):
    def __init__(self, quota: int, pool_size: int):
        self.quota = quota
        self.pool_size = pool_size
        super().__init__(f"quota {quota} exceeds calibration pool of {pool_size}")


class MissingScore(DriftGridError):
    def __init__(self, sample_id: str, score_name: str):
        self.sample_id = sample_id
        self.score_name = score_name
        super().__init__(f"sample '{sample_id}' has no score '{score_name}'")


class TooFewMonths(DriftGridError):
    pass


class UnknownRejectedId(DriftGridError):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"rejected id '{sample_id}' is not in the batch")


class NoDefinedMonths(DriftGridError):
    pass


class AllUndefined(DriftGridError):
    pass


class TooFewPoints(DriftGridError):
    pass


class UnrankableMethod(DriftGridError):
    def __init__(self, method_id: str, pillar: str):
        self.method_id = method_id
        self.pillar = pillar
        super().__init__(f"method '{method_id}' has an undefined '{pillar}' pillar")


# Sampling

class BudgetExceedsPool(DriftGridError):
    def __init__(self, budget: int, pool_size: int):
        self.budget = budget
        self.pool_size = pool_size
        super().__init__(f"budget {budget} exceeds pool of {pool_size}")


class FoldTooSmall(DriftGridError):
    def __init__(self, fold: int, size: int, share: int):
        self.fold = fold
        self.size = size
        self.share = share
        super().__init__(f"fold {fold} has {size} sample(s), needs {share}")


class BadFoldAssignment(DriftGridError):
    pass


# Configuration / orchestration

class ConfigError(DriftGridError):
    pass


class ReportIoError(DriftGridError):
    pass


class EvaluationError(DriftGridError):
    """A (stream, score, rho) combination failed.

    Attributes:
        stream: Dataset name of the failing stream
        score_name: Score column being evaluated
        rho: Rejection quota, or None for stream-level failures
    """

    def __init__(self, stream: str, score_name: str, rho: Optional[int], cause: Exception):
        self.stream = stream
        self.score_name = score_name
        self.rho = rho
        self.cause = cause
        combo = f"stream '{stream}', score '{score_name}'"
        if rho is not None:
            combo += f", rho={rho}"
        super().__init__(f"{combo}: {cause}")
