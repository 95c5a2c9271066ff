"""Synthetic drifting prediction streams with a known-quality uncertainty score.

Each month holds a fixed number of samples, a fixed malware share and exactly
round(error_rate * month_size) misclassified samples. Two scorers shape the
msp_u uncertainty:

- ``oracle``: errors draw U from [0.9, 1.0), correct predictions from [0, 0.9),
  so every error outranks every correct prediction.
- ``null``: U is uniform on [0, 1) regardless of correctness.

prob_positive is set so that the MSP uncertainty of the record equals U and
its side agrees with y_pred. An optional upward shift from ``shift_month`` on
mimics a month whose score distribution moves past the calibrated threshold.
"""

import logging
from typing import Optional

import numpy as np

from .errors import ConfigError, OutOfRange
from .scorers.msp import msp_uncertainty_array
from .stream_model import MonthBatch, SampleRecord, TemporalStream


logger = logging.getLogger(__name__)

SYNTHETIC_SCORERS = ("oracle", "null")
ERROR_BAND = 0.9


def _month_uncertainty(rng: np.random.Generator, errors: np.ndarray, scorer: str) -> np.ndarray:
    if scorer == "null":
        return rng.uniform(0.0, 1.0, errors.size)
    return np.where(errors, rng.uniform(ERROR_BAND, 1.0, errors.size), rng.uniform(0.0, ERROR_BAND, errors.size))


def generate_drift_stream(
    months: int = 24,
    month_size: int = 200,
    error_rate: float = 0.1,
    scorer: str = "oracle",
    seed: int = 0,
    malware_ratio: float = 0.9,
    shift_month: Optional[int] = None,
    shift: float = 0.0,
) -> TemporalStream:
    """Generate a synthetic stream carrying prob_positive and an msp_u score.

    Args:
        months: Number of months
        month_size: Samples per month
        error_rate: Fraction of misclassified samples per month
        scorer: "oracle" or "null"
        seed: Generator seed
        malware_ratio: Fraction of y_true = 1 per month
        shift_month: First month whose uncertainty is shifted, None for no shift
        shift: Constant added to U from shift_month on (clipped to [0, 1])

    Returns:
        Stream with months 0..months-1
    """
    if scorer not in SYNTHETIC_SCORERS:
        raise ConfigError(f"unknown synthetic scorer '{scorer}', expected one of {SYNTHETIC_SCORERS}")
    if months < 1 or month_size < 1:
        raise OutOfRange(f"need at least one month of one sample, got {months} x {month_size}")
    for name, value in (("error_rate", error_rate), ("malware_ratio", malware_ratio)):
        if not 0.0 <= value <= 1.0:
            raise OutOfRange(f"{name} must be in [0, 1], got {value}")

    rng = np.random.default_rng(seed)
    n_malware = int(round(malware_ratio * month_size))
    n_errors = int(round(error_rate * month_size))
    batches = []
    for month in range(months):
        y_true = np.zeros(month_size, dtype=int)
        y_true[:n_malware] = 1
        rng.shuffle(y_true)
        errors = np.zeros(month_size, dtype=bool)
        errors[rng.choice(month_size, size=n_errors, replace=False)] = True
        y_pred = np.where(errors, 1 - y_true, y_true)

        uncertainty = _month_uncertainty(rng, errors, scorer)
        if shift_month is not None and month >= shift_month:
            uncertainty = np.clip(uncertainty + shift, 0.0, 1.0)
        half_width = 0.5 * (1.0 - uncertainty)
        prob = np.where(y_pred == 1, 0.5 + half_width, 0.5 - half_width)
        msp_u = msp_uncertainty_array(prob)

        records = tuple(
            SampleRecord(
                sample_id=f"m{month:03d}-{i:05d}",
                month_index=month,
                y_true=int(y_true[i]),
                y_pred=int(y_pred[i]),
                prob_positive=float(prob[i]),
                scores={"msp_u": float(msp_u[i])},
            )
            for i in range(month_size)
        )
        batches.append(MonthBatch(month, records))

    metadata = {"method": scorer, "seed": str(seed)}
    if shift_month is not None:
        metadata["shift_month"] = str(shift_month)
        metadata["shift"] = repr(float(shift))
    logger.info("generated %d x %d synthetic stream (scorer=%s, seed=%d)", months, month_size, scorer, seed)
    return TemporalStream(f"synthetic-{seed}", tuple(batches), metadata)
