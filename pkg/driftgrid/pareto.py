"""Pareto analysis over four aggregated pillars.

Pillar orientations: f1_mean higher is better, f1_volatility lower, aurc
lower, tau higher. A vector is dominated when another one is at least as
good on every pillar and strictly better on at least one.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import pandas as pd

from .errors import ConfigError, EmptyInput, OutOfRange, UnrankableMethod


logger = logging.getLogger(__name__)

PILLARS = ("f1_mean", "f1_volatility", "aurc", "tau")
# +1: higher is better, -1: lower is better
PILLAR_ORIENTATION = {"f1_mean": 1, "f1_volatility": -1, "aurc": -1, "tau": 1}
PILLAR_COLUMNS = ("method_id", "dataset", "f1", "sigma_f1", "aurc", "tau")


@dataclass(frozen=True)
class PillarVector:
    f1_mean: float
    f1_volatility: float
    aurc: float
    tau: float
    method_id: str = ""

    def __post_init__(self):
        if not -1.0 <= self.tau <= 1.0:
            raise OutOfRange(f"tau must be in [-1, 1], got {self.tau}")

    def oriented(self) -> Tuple[float, ...]:
        """Pillars flipped so that larger is better on every axis."""
        return tuple(PILLAR_ORIENTATION[p] * getattr(self, p) for p in PILLARS)


def _is_undefined(value) -> bool:
    return value is None or (isinstance(value, float) and math.isnan(value))


def aggregate_pillars(per_dataset: Sequence[Tuple[Optional[float], ...]], method_id: str) -> PillarVector:
    """Arithmetic mean of each pillar across datasets.

    Raises:
        EmptyInput: If per_dataset is empty
        UnrankableMethod: If any pillar value is undefined
    """
    if not per_dataset:
        raise EmptyInput(f"method '{method_id}' has no dataset rows")
    columns = list(zip(*per_dataset))
    if len(columns) != len(PILLARS):
        raise ConfigError(f"expected {len(PILLARS)} pillar values per dataset, got {len(columns)}")
    means = []
    for pillar, values in zip(PILLARS, columns):
        if any(_is_undefined(v) for v in values):
            raise UnrankableMethod(method_id, pillar)
        means.append(math.fsum(values) / len(values))
    return PillarVector(*means, method_id=method_id)


def dominates(a: PillarVector, b: PillarVector) -> bool:
    """True if a is at least as good as b on all pillars and strictly better on one."""
    better_or_equal = True
    strictly_better = False
    for x, y in zip(a.oriented(), b.oriented()):
        if x < y:
            better_or_equal = False
            break
        if x > y:
            strictly_better = True
    return better_or_equal and strictly_better


def pareto_front(entries: Sequence[PillarVector]) -> List[Tuple[str, bool]]:
    """Flag each entry as non-dominated (True) or dominated (False), in input order."""
    flags = []
    for i, entry in enumerate(entries):
        dominated = any(dominates(other, entry) for j, other in enumerate(entries) if i != j)
        flags.append((entry.method_id, not dominated))
    logger.debug("Pareto front size: %d / %d", sum(f for _, f in flags), len(flags))
    return flags


def read_pillar_table(path: Union[str, Path]) -> pd.DataFrame:
    """Load per-dataset pillar rows (method_id,dataset,f1,sigma_f1,aurc,tau)."""
    try:
        table = pd.read_csv(path, dtype={"method_id": str, "dataset": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigError(f"cannot read pillar table {path}: {e}") from e
    missing = [c for c in PILLAR_COLUMNS if c not in table.columns]
    if missing:
        raise ConfigError(f"pillar table {path} lacks column(s) {', '.join(missing)}")
    return table


def pareto_from_table(table: pd.DataFrame) -> List[Tuple[str, Optional[bool]]]:
    """Aggregate a per-dataset pillar table per method and flag the front.

    Methods with an undefined pillar get a None flag and do not take part in
    the dominance comparison. Output is sorted by method_id.

    Raises:
        ConfigError: If methods were evaluated on different dataset sets
    """
    vectors: List[PillarVector] = []
    unrankable: List[str] = []
    datasets = None
    for method_id, rows in table.groupby("method_id", sort=True):
        method_datasets = sorted(rows["dataset"].astype(str))
        if datasets is None:
            datasets = method_datasets
        elif method_datasets != datasets:
            raise ConfigError(f"method '{method_id}' covers datasets {method_datasets}, expected {datasets}")
        per_dataset = [tuple(None if pd.isna(v) else float(v) for v in row)
                       for row in rows[["f1", "sigma_f1", "aurc", "tau"]].itertuples(index=False)]
        try:
            vectors.append(aggregate_pillars(per_dataset, str(method_id)))
        except UnrankableMethod as e:
            logger.warning("%s; excluded from the Pareto front", e)
            unrankable.append(str(method_id))

    flags = dict(pareto_front(vectors))
    result: List[Tuple[str, Optional[bool]]] = [(m, flags[m]) for m in flags]
    result.extend((m, None) for m in unrankable)
    return sorted(result, key=lambda item: item[0])
