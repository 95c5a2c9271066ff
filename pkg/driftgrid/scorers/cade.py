"""CADE-style OOD score: robust deviation of the distance to each class centroid.

For each class i the training embeddings give a centroid c_i, the median
distance d~_i of members to c_i, and MAD_i, the scaled median absolute
deviation of those distances. A sample x scores

    A_i(x) = |d_i(x) - d~_i| / MAD_i,    score(x) = min_i A_i(x)

and is flagged OOD when the score exceeds 3.5.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.stats import median_abs_deviation

from ..errors import ClassTooSmall, DegenerateMad, DimensionMismatch, DriftGridError, OutOfRange
from ..stream_model import EmbeddingTable, read_id_table


MAD_SCALE = 1.4826
OOD_THRESHOLD = 3.5


@dataclass(frozen=True, eq=False)
class CadeClassStats:
    """Centroid and distance spread of one class in latent space."""
    class_label: int
    centroid: np.ndarray
    median_distance: float
    mad: float

    def __post_init__(self):
        centroid = np.array(self.centroid, dtype=float).ravel()
        centroid.flags.writeable = False
        object.__setattr__(self, "centroid", centroid)
        if self.median_distance < 0:
            raise OutOfRange(f"median distance must be non-negative, got {self.median_distance}")
        if not self.mad > 0:
            raise DegenerateMad(self.class_label)

    @property
    def dimension(self) -> int:
        return self.centroid.size

    def deviation(self, x: np.ndarray) -> float:
        """A_i(x) for this class."""
        distance = float(np.linalg.norm(x - self.centroid))
        return abs(distance - self.median_distance) / self.mad


def fit_cade_stats(
    embeddings: EmbeddingTable,
    labeled_ids: Sequence[Tuple[str, int]],
    mad_scale: float = MAD_SCALE,
) -> List[CadeClassStats]:
    """Fit per-class centroid, median distance and scaled MAD.

    Args:
        embeddings: Latent vectors of the training samples
        labeled_ids: (sample_id, class_label) pairs
        mad_scale: Consistency factor applied to the raw MAD

    Returns:
        One CadeClassStats per class, ordered by class label

    Raises:
        ClassTooSmall: A class has fewer than 2 members
        DegenerateMad: All distances of a class are identical
    """
    members: Dict[int, List[np.ndarray]] = {}
    for sample_id, label in labeled_ids:
        if label not in (0, 1):
            raise OutOfRange(f"class label must be 0 or 1, got {label!r}")
        members.setdefault(int(label), []).append(embeddings.vector(sample_id))
    if not members:
        raise ClassTooSmall(1, 0)

    stats = []
    for label in sorted(members):
        points = np.vstack(members[label])
        if len(points) < 2:
            raise ClassTooSmall(label, len(points))
        centroid = points.mean(axis=0)
        distances = np.linalg.norm(points - centroid, axis=1)
        median_distance = float(np.median(distances))
        mad = mad_scale * float(median_abs_deviation(distances, scale=1.0))
        if mad == 0.0:
            raise DegenerateMad(label)
        stats.append(CadeClassStats(label, centroid, median_distance, mad))
    return stats


def cade_ood_score(x_embedding, stats: Sequence[CadeClassStats]) -> float:
    """Minimum normalized centroid-distance deviation over classes.

    Raises:
        DimensionMismatch: If x and a centroid differ in length
    """
    if not stats:
        raise DriftGridError("cade_ood_score needs at least one class")
    x = np.asarray(x_embedding, dtype=float).ravel()
    for s in stats:
        if s.dimension != x.size:
            raise DimensionMismatch(s.dimension, x.size)
    return min(s.deviation(x) for s in stats)


def is_ood(score: float, threshold: float = OOD_THRESHOLD) -> bool:
    return score > threshold


def read_train_labels(path: Union[str, Path]) -> List[Tuple[str, int]]:
    """(sample_id, class label) pairs from a ``sample_id,label`` CSV."""
    frame = read_id_table(path, ["label"], "training labels", int_columns=["label"])
    return list(zip(frame["sample_id"], (int(v) for v in frame["label"])))
