"""SVG figures: risk-coverage curves and monthly rejection traces.

Figures are built on ``matplotlib.figure.Figure`` directly (no pyplot state)
so concurrent runs can plot safely. A fixed SVG hash salt and a dropped Date
field make repeated renders byte-identical.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib
from matplotlib.figure import Figure
import numpy as np

from .errors import EmptyInput, ReportIoError
from .reliability import RCCurve
from .simulation import SimulationTrace


logger = logging.getLogger(__name__)

_SVG_RC = {"svg.hashsalt": "driftgrid", "svg.fonttype": "path"}


def _as_array(values: Sequence[Optional[float]]) -> np.ndarray:
    # Undefined months become NaN, which matplotlib draws as gaps
    return np.array([np.nan if v is None else v for v in values], dtype=float)


def rc_figure(curve: RCCurve, title: str = "") -> Figure:
    fig = Figure(figsize=(5, 4))
    ax = fig.add_subplot(1, 1, 1)
    ax.plot(curve.coverages, curve.risks, color="tab:blue", lw=1.5, label=f"AURC = {curve.aurc_percent:.2f}")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("Coverage")
    ax.set_ylabel("Risk")
    ax.grid(True, lw=0.3)
    ax.legend(loc="upper left")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def temporal_figure(trace: SimulationTrace, rho: int, title: str = "") -> Figure:
    """Three stacked panels: F1 per month, rejections against the quota, F1 gain."""
    months = np.array([m.month_index for m in trace.months])
    fig = Figure(figsize=(7, 8))
    f1_ax, rej_ax, delta_ax = fig.subplots(3, 1, sharex=True)

    f1_ax.plot(months, _as_array(trace.retained_f1), marker="o", ms=3, label="with rejection")
    f1_ax.plot(months, _as_array(trace.baseline_f1), ls="--", color="grey", label="no rejection")
    f1_ax.set_ylabel("F1")
    f1_ax.legend(loc="lower left")

    rej_ax.plot(months, np.array(trace.realized_rejections, dtype=float), marker="o", ms=3, label="rejected")
    rej_ax.axhline(rho, color="tab:red", ls=":", label=f"quota = {rho}")
    rej_ax.set_ylabel("Rejections")
    rej_ax.legend(loc="upper left")

    delta_ax.plot(months, _as_array(trace.delta_f1), marker="o", ms=3, color="tab:green")
    delta_ax.axhline(0.0, color="grey", lw=0.5)
    delta_ax.set_ylabel("F1 gain")
    delta_ax.set_xlabel("Month")

    for ax in (f1_ax, rej_ax, delta_ax):
        ax.grid(True, lw=0.3)
    if title:
        f1_ax.set_title(title)
    fig.tight_layout()
    return fig


def save_svg(fig: Figure, path: Union[str, Path]) -> Path:
    """Write a figure as a standalone SVG.

    Raises:
        ReportIoError: If the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with matplotlib.rc_context(_SVG_RC):
            fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise ReportIoError(f"cannot write {path}: {e}") from e
    logger.info("wrote %s", path)
    return path


def render_rc_svg(curve: RCCurve, path: Union[str, Path], title: str = "") -> Path:
    return save_svg(rc_figure(curve, title), path)


def render_temporal_svg(trace: SimulationTrace, rho: int, path: Union[str, Path], title: str = "") -> Path:
    if not trace.months:
        raise EmptyInput("cannot plot an empty simulation trace")
    return save_svg(temporal_figure(trace, rho, title), path)
