"""Apply a named scorer to every record of a stream."""

import logging
from typing import Optional, Sequence

from ..errors import ConfigError, DriftGridError, MissingScore
from ..stream_model import EmbeddingTable, SampleRecord, TemporalStream
from .cade import CadeClassStats, cade_ood_score
from .margin import Hyperplane, margin_confidence
from .msp import msp_uncertainty
from .orientation import EXTERNAL_PREFIX, ScoreRegistry, resolve_score_name


logger = logging.getLogger(__name__)

SCORER_NAMES = ("msp_u", "margin", "cade_ood")


def score_stream(
    stream: TemporalStream,
    scorer: str,
    registry: Optional[ScoreRegistry] = None,
    embeddings: Optional[EmbeddingTable] = None,
    cade_stats: Optional[Sequence[CadeClassStats]] = None,
    hyperplane: Optional[Hyperplane] = None,
) -> TemporalStream:
    """Compute a scorer over the stream and store it under its canonical name.

    Args:
        stream: Input stream (left unchanged)
        scorer: "msp_u", "margin", "cade_ood" or "external:<column>"
        registry: Orientation registry; external columns get registered here
        embeddings: Latent vectors, needed by "margin" and "cade_ood"
        cade_stats: Fitted class statistics, needed by "cade_ood"
        hyperplane: Linear model, needed by "margin"

    Returns:
        New stream whose records carry the score
    """
    registry = registry or ScoreRegistry()

    if scorer.startswith(EXTERNAL_PREFIX):
        column = resolve_score_name(scorer, registry)
        for record in stream.records:
            if column not in record.scores:
                raise MissingScore(record.sample_id, column)
        return stream

    if scorer == "msp_u":
        def compute(record: SampleRecord) -> float:
            if record.prob_positive is None:
                raise DriftGridError(f"sample '{record.sample_id}' has no prob_positive for msp_u")
            return msp_uncertainty(record.prob_positive)
    elif scorer == "margin":
        if hyperplane is None or embeddings is None:
            raise ConfigError("margin scorer needs a hyperplane and embeddings")

        def compute(record: SampleRecord) -> float:
            return abs(margin_confidence(hyperplane, embeddings.vector(record.embedding_key)))
    elif scorer == "cade_ood":
        if not cade_stats or embeddings is None:
            raise ConfigError("cade_ood scorer needs fitted class statistics and embeddings")

        def compute(record: SampleRecord) -> float:
            return cade_ood_score(embeddings.vector(record.embedding_key), cade_stats)
    else:
        raise ConfigError(f"unknown scorer '{scorer}', expected one of {SCORER_NAMES} or external:<column>")

    registry.get(scorer)
    scored = stream.map_records(lambda r: r.with_scores(**{scorer: compute(r)}))
    logger.info("scored %d records of '%s' with %s", scored.n_records, stream.dataset_name, scorer)
    return scored
