"""Signed distance to a linear separating hyperplane."""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from ..errors import DegenerateHyperplane, DimensionMismatch, DriftGridError


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """Linear decision function f(x) = w.x + b.

    Attributes:
        weights: Weight vector w, must have non-zero norm
        bias: Intercept b
    """
    weights: np.ndarray
    bias: float = 0.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size == 0 or not np.all(np.isfinite(w)):
            raise DegenerateHyperplane("weights must be a non-empty finite vector")
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            raise DegenerateHyperplane("weight vector has zero norm")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "_norm", norm)

    @property
    def dimension(self) -> int:
        return self.weights.size

    @property
    def norm(self) -> float:
        return self._norm


def margin_confidence(h: Hyperplane, x) -> float:
    """Signed Euclidean distance of x to the hyperplane, f(x) / ||w||.

    The sign tells the side; the magnitude is the confidence.

    Raises:
        DimensionMismatch: If x and w differ in length
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != h.dimension:
        raise DimensionMismatch(h.dimension, x.size)
    return float((np.dot(h.weights, x) + h.bias) / h.norm)


def load_hyperplane(path: Union[str, Path]) -> Hyperplane:
    """Load ``{"weights": [...], "bias": b}`` from a JSON file."""
    try:
        with open(path, "r") as f:
            data = json.load(f)
        return Hyperplane(np.asarray(data["weights"], dtype=float), float(data.get("bias", 0.0)))
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise DriftGridError(f"cannot load hyperplane from {path}: {e}") from e
