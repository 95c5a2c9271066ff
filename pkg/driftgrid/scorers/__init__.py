"""Native confidence and uncertainty functions."""

from .cade import (
    MAD_SCALE,
    OOD_THRESHOLD,
    CadeClassStats,
    cade_ood_score,
    fit_cade_stats,
    is_ood,
    read_train_labels,
)
from .margin import Hyperplane, load_hyperplane, margin_confidence
from .msp import msp_uncertainty, msp_uncertainty_array
from .orientation import (
    BUILTIN_ORIENTATIONS,
    EXTERNAL_PREFIX,
    ScoreOrientation,
    ScoreRegistry,
    resolve_score_name,
    to_uncertainty,
)
from .pipeline import SCORER_NAMES, score_stream

__all__ = [
    "BUILTIN_ORIENTATIONS",
    "CadeClassStats",
    "EXTERNAL_PREFIX",
    "Hyperplane",
    "MAD_SCALE",
    "OOD_THRESHOLD",
    "SCORER_NAMES",
    "ScoreOrientation",
    "ScoreRegistry",
    "cade_ood_score",
    "fit_cade_stats",
    "is_ood",
    "load_hyperplane",
    "margin_confidence",
    "msp_uncertainty",
    "msp_uncertainty_array",
    "read_train_labels",
    "resolve_score_name",
    "score_stream",
    "to_uncertainty",
]
