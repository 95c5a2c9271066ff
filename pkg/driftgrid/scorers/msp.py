"""Maximum-softmax-probability uncertainty for binary classifiers."""

import math

import numpy as np

from ..errors import OutOfRange


def msp_uncertainty(prob_positive: float) -> float:
    """Proximity of the top-class probability to maximal uncertainty.

    U = 1 - |max(p, 1-p) - 0.5| / 0.5, so U(0.5) = 1 and U(0) = U(1) = 0.

    Args:
        prob_positive: Classifier's malware probability

    Returns:
        Uncertainty in [0, 1]

    Raises:
        OutOfRange: If p is not a finite value in [0, 1]
    """
    p = float(prob_positive)
    if not math.isfinite(p) or not 0.0 <= p <= 1.0:
        raise OutOfRange(f"probability must be in [0, 1], got {prob_positive!r}")
    kappa = max(p, 1.0 - p)
    return 1.0 - abs(kappa - 0.5) / 0.5


def msp_uncertainty_array(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if not np.all(np.isfinite(p)) or np.any((p < 0.0) | (p > 1.0)):
        raise OutOfRange("probabilities must be finite values in [0, 1]")
    kappa = np.maximum(p, 1.0 - p)
    return 1.0 - np.abs(kappa - 0.5) / 0.5
