"""Shared builders for the driftgrid tests."""

from typing import Mapping, Optional, Sequence, Tuple

import pytest

from driftgrid.stream_model import MonthBatch, SampleRecord, TemporalStream


def make_record(sample_id: str, month: int = 0, y_true: int = 1, y_pred: int = 1,
                prob: Optional[float] = None, **scores: float) -> SampleRecord:
    return SampleRecord(sample_id, month, y_true, y_pred, prob, scores)


def make_batch(month: int, rows: Sequence[Tuple[float, int, int]], score: str = "msp_u") -> MonthBatch:
    """Batch from (score, y_true, y_pred) rows; ids are m<month>-<i>."""
    return MonthBatch(month, tuple(
        SampleRecord(f"m{month}-{i}", month, y_true, y_pred, scores={score: value})
        for i, (value, y_true, y_pred) in enumerate(rows)
    ))


def make_stream(months: Sequence[Sequence[Tuple[float, int, int]]], name: str = "toy",
                metadata: Optional[Mapping[str, str]] = None, score: str = "msp_u") -> TemporalStream:
    return TemporalStream(name, tuple(make_batch(i, rows, score) for i, rows in enumerate(months)), metadata or {})


@pytest.fixture
def hand_stream() -> TemporalStream:
    """Two months worked out by hand: month 0 calibrates, month 1 rejects 0.95 and 0.5 at rho=1."""
    return make_stream([
        [(0.9, 1, 1), (0.1, 1, 1), (0.2, 0, 0)],
        [(0.95, 1, 0), (0.05, 1, 1), (0.5, 0, 1)],
    ])
