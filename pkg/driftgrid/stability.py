"""Temporal stability of a monthly metric series.

Undefined months (None) are skipped everywhere: spreads use the defined
values only and trend pairs with an undefined endpoint do not count.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import kendalltau

from .errors import AllUndefined, ConfigError, TooFewPoints


TAU_VARIANTS = ("a", "b")


@dataclass(frozen=True)
class MonthlySeries:
    """One value per month, in month order; None marks an undefined month."""
    values: Sequence[Optional[float]]
    label: str = "f1"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(None if v is None else float(v) for v in self.values))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def defined(self) -> np.ndarray:
        return np.array([v for v in self.values if v is not None], dtype=float)


def _defined_or_raise(series: MonthlySeries) -> np.ndarray:
    values = series.defined
    if values.size == 0:
        raise AllUndefined(f"series '{series.label}' has no defined values")
    return values


def f1_volatility(series: MonthlySeries) -> float:
    """Population standard deviation of the defined values."""
    return float(np.std(_defined_or_raise(series)))


def mann_kendall_tau(series: MonthlySeries, variant: str = "a") -> float:
    """Mann-Kendall trend statistic in [-1, 1].

    Variant "a" is S / (n(n-1)/2) with ties contributing 0. Variant "b" uses
    the tie-corrected denominator; a constant series yields 0 for both.

    Raises:
        TooFewPoints: If fewer than 2 values are defined
    """
    if variant not in TAU_VARIANTS:
        raise ConfigError(f"unknown tau variant '{variant}', expected one of {TAU_VARIANTS}")
    x = series.defined
    n = x.size
    if n < 2:
        raise TooFewPoints(f"series '{series.label}' needs at least 2 defined values, has {n}")

    if variant == "b":
        tau = kendalltau(np.arange(n), x, variant="b").statistic
        return 0.0 if np.isnan(tau) else float(tau)

    i, j = np.triu_indices(n, k=1)
    s = int(np.sum(np.sign(x[j] - x[i])))
    return s / (n * (n - 1) / 2)


def coefficient_of_variation(series: MonthlySeries) -> Optional[float]:
    """Population std over mean of the defined values, None for a zero mean."""
    values = _defined_or_raise(series)
    mean = float(np.mean(values))
    if mean == 0.0:
        return None
    return float(np.std(values)) / mean


def max_drawdown(series: MonthlySeries) -> float:
    """Largest drop from a running peak to a later value (0 for non-decreasing series)."""
    values = _defined_or_raise(series)
    peaks = np.maximum.accumulate(values)
    return float(np.max(peaks - values))
