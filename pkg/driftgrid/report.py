"""Metric tables and machine-readable run outputs.

All floats are written with 6 decimals; undefined values are empty CSV cells
and JSON nulls.
"""

import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from .errors import InvariantViolation, ReportIoError
from .simulation import SimulationTrace


logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.6f"
DECIMALS = 6


@dataclass(frozen=True)
class MetricsReport:
    """One row of the evaluation table: a (method, dataset, score, rho) combination.

    Percentages (f1_mean, fnr_mean, bf_star) are in [0, 100]; aurc and
    aurc_f1_star are in percentage points. None marks an undefined metric.
    Reports pooled over n_seeds > 1 streams average the stream-level metrics
    and compute the rejection metrics on the concatenated seed traces.
    """
    method_id: str
    dataset_name: str
    score_name: str
    rho: int
    monthly_budget: Optional[int] = None
    initial_budget: Optional[int] = None
    # baseline
    f1_mean: Optional[float] = None
    fnr_mean: Optional[float] = None
    auroc: Optional[float] = None
    # reliability
    aurc: Optional[float] = None
    aurc_f1_star: Optional[float] = None
    # stability
    sigma_f1: Optional[float] = None
    tau: Optional[float] = None
    bf_star: Optional[float] = None
    delta_rej: Optional[float] = None
    sigma_rej: Optional[float] = None
    pareto_flag: Optional[bool] = None
    # extras
    e_aurc: Optional[float] = None
    cv_f1: Optional[float] = None
    max_drawdown: Optional[float] = None
    mean_retained_f1: Optional[float] = None
    rej_mapd: Optional[float] = None
    n_seeds: int = 1

    def __post_init__(self):
        for name in ("f1_mean", "fnr_mean", "bf_star"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 100.0:
                raise InvariantViolation(f"{name} must be a percentage, got {value}")
        if self.auroc is not None and not 0.0 <= self.auroc <= 1.0:
            raise InvariantViolation(f"auroc must be in [0, 1], got {self.auroc}")
        if self.tau is not None and not -1.0 <= self.tau <= 1.0:
            raise InvariantViolation(f"tau must be in [-1, 1], got {self.tau}")

    @property
    def sort_key(self) -> Tuple[str, str, str, int]:
        return (self.method_id, self.dataset_name, self.score_name, self.rho)


COLUMNS = tuple(f.name for f in fields(MetricsReport))


def _flag(value: Optional[bool]) -> str:
    if value is None:
        return ""
    return "true" if value else "false"


def reports_frame(reports: Sequence[MetricsReport]) -> pd.DataFrame:
    """Reports as a DataFrame with one row per report, columns in table order."""
    rows = []
    for report in reports:
        row = asdict(report)
        row["pareto_flag"] = _flag(report.pareto_flag)
        rows.append(row)
    frame = pd.DataFrame(rows, columns=list(COLUMNS))
    for column in ("rho", "monthly_budget", "initial_budget"):
        frame[column] = frame[column].astype("Int64")
    return frame


def render_table(reports: Sequence[MetricsReport]) -> str:
    """CSV text with one row per report; empty input gives the header only."""
    return reports_frame(reports).to_csv(index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")


def _rounded(value):
    if isinstance(value, float):
        return round(value, DECIMALS)
    return value


def reports_json(reports: Sequence[MetricsReport]) -> str:
    payload = [{k: _rounded(v) for k, v in asdict(report).items()} for report in reports]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def trace_frame(trace: SimulationTrace) -> pd.DataFrame:
    """Per-month simulation trace, one row per simulated month."""
    rows = [{
        "month": m.month_index,
        "threshold_low": m.threshold_low,
        "threshold_high": m.threshold_high,
        "rejections": m.rejections,
        "retained_f1": m.retained_f1,
        "baseline_f1": m.baseline_f1,
        "quota": m.quota,
        "pool_size": m.pool_size,
        "capped": "true" if m.capped else "false",
        "batch_size": m.batch_size,
        "realized_fraction": m.realized_fraction,
    } for m in trace.months]
    columns = ["month", "threshold_low", "threshold_high", "rejections", "retained_f1", "baseline_f1",
               "quota", "pool_size", "capped", "batch_size", "realized_fraction"]
    frame = pd.DataFrame(rows, columns=columns)
    for column in ("threshold_low", "threshold_high", "retained_f1", "baseline_f1", "realized_fraction"):
        frame[column] = frame[column].astype(float)
    return frame


def render_trace(trace: SimulationTrace) -> str:
    return trace_frame(trace).to_csv(index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")


def render_f1_risk_curve(curve: Sequence[Tuple[float, float, float]]) -> str:
    frame = pd.DataFrame(list(curve), columns=["coverage", "f1", "risk"])
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def simulation_summary(summary: Dict[str, Optional[float]]) -> str:
    return json.dumps({k: _rounded(v) for k, v in summary.items()}, indent=2, sort_keys=True) + "\n"


def write_text(path: Union[str, Path], text: str) -> Path:
    """Write a report file, creating parent directories.

    Raises:
        ReportIoError: If the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            f.write(text)
    except OSError as e:
        raise ReportIoError(f"cannot write {path}: {e}") from e
    logger.info("wrote %s", path)
    return path


def write_reports(reports: Sequence[MetricsReport], out_dir: Union[str, Path],
                  formats: Sequence[str]) -> List[Path]:
    """Write metrics.csv and/or metrics.json into out_dir."""
    out_dir = Path(out_dir)
    written = []
    if "csv" in formats:
        written.append(write_text(out_dir / "metrics.csv", render_table(reports)))
    if "json" in formats:
        written.append(write_text(out_dir / "metrics.json", reports_json(reports)))
    return written
