"""Score orientation registry.

Native scores come in two conventions: uncertainties (higher = less sure, e.g.
MSP uncertainty, CADE OOD score, HCC pseudo-loss) and confidences (higher =
more sure, e.g. hyperplane margin). Everything downstream works on canonical
uncertainty, so each score name must have exactly one registered orientation.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

import numpy as np

from ..errors import ConfigError, UnknownScoreName


EXTERNAL_PREFIX = "external:"


@dataclass(frozen=True)
class ScoreOrientation:
    """How to read one named score."""
    name: str
    higher_means_more_uncertain: bool
    description: str = ""


BUILTIN_ORIENTATIONS = {
    "msp_u": ScoreOrientation("msp_u", True, "MSP uncertainty, 1 at p=0.5"),
    "cade_ood": ScoreOrientation("cade_ood", True, "CADE centroid/MAD deviation"),
    "margin": ScoreOrientation("margin", False, "absolute distance to the separating hyperplane"),
}


def to_uncertainty(score: float, orientation: ScoreOrientation) -> float:
    """Map a raw score to canonical uncertainty (higher = more uncertain).

    Identity for uncertainty-oriented scores, negation for confidences.
    """
    return score if orientation.higher_means_more_uncertain else -score


class ScoreRegistry:
    """Orientations for every score name a run uses.

    Each run owns its registry, so registering an external column in one run
    does not leak into another.
    """

    def __init__(self, orientations: Optional[Iterable[ScoreOrientation]] = None):
        self._orientations: Dict[str, ScoreOrientation] = dict(BUILTIN_ORIENTATIONS)
        for orientation in orientations or ():
            self.register(orientation.name, orientation.higher_means_more_uncertain, orientation.description)

    def register(self, name: str, higher_means_more_uncertain: bool, description: str = "") -> ScoreOrientation:
        """Register (or re-register) a score orientation."""
        if not name:
            raise ConfigError("score name must not be empty")
        orientation = ScoreOrientation(name, higher_means_more_uncertain, description)
        self._orientations[name] = orientation
        return orientation

    def get(self, name: str) -> ScoreOrientation:
        try:
            return self._orientations[name]
        except KeyError:
            raise UnknownScoreName(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self._orientations

    def names(self) -> List[str]:
        return sorted(self._orientations)

    def to_uncertainty(self, name: str, score: float) -> float:
        return to_uncertainty(score, self.get(name))

    def uncertainties(self, name: str, scores) -> np.ndarray:
        """Vectorized to_uncertainty over an array of raw scores."""
        values = np.asarray(scores, dtype=float)
        return values if self.get(name).higher_means_more_uncertain else -values


def resolve_score_name(spec: str, registry: ScoreRegistry) -> str:
    """Turn a scorer spec ("msp_u", "external:hcc", ...) into a stream score name.

    External columns are registered as "higher is more uncertain" (pseudo-loss
    convention) unless the registry already knows them.
    """
    if spec.startswith(EXTERNAL_PREFIX):
        column = spec[len(EXTERNAL_PREFIX):]
        if not column:
            raise ConfigError(f"external scorer needs a column name: '{spec}'")
        if column not in registry:
            registry.register(column, True, "external score column")
        return column
    registry.get(spec)
    return spec
