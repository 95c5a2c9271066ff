"""Native scorers and the uncertainty orientation registry."""

import json
import math

import numpy as np
import pytest

from conftest import make_record, make_stream
from driftgrid.errors import (
    ClassTooSmall,
    ConfigError,
    DegenerateHyperplane,
    DegenerateMad,
    DimensionMismatch,
    MissingScore,
    OutOfRange,
    UnknownScoreName,
)
from driftgrid.scorers import (
    CadeClassStats,
    Hyperplane,
    ScoreOrientation,
    ScoreRegistry,
    cade_ood_score,
    fit_cade_stats,
    is_ood,
    load_hyperplane,
    margin_confidence,
    msp_uncertainty,
    msp_uncertainty_array,
    resolve_score_name,
    score_stream,
    to_uncertainty,
)
from driftgrid.stream_model import EmbeddingTable, MonthBatch, TemporalStream


# MSP

@pytest.mark.parametrize("p, expected", [(0.5, 1.0), (1.0, 0.0), (0.0, 0.0), (0.75, 0.5)])
def test_msp_fixtures(p, expected):
    assert msp_uncertainty(p) == pytest.approx(expected, abs=1e-12)


def test_msp_symmetric_and_peaked():
    for p in np.linspace(0.0, 1.0, 101):
        assert msp_uncertainty(p) == pytest.approx(msp_uncertainty(1.0 - p), abs=1e-12)
        if p != 0.5:
            assert msp_uncertainty(p) < 1.0


@pytest.mark.parametrize("p", [-0.1, 1.01, float("nan")])
def test_msp_out_of_range(p):
    with pytest.raises(OutOfRange):
        msp_uncertainty(p)


def test_msp_array_matches_scalar():
    probs = [0.0, 0.1, 0.5, 0.62, 1.0]
    np.testing.assert_allclose(msp_uncertainty_array(probs), [msp_uncertainty(p) for p in probs], atol=1e-15)
    with pytest.raises(OutOfRange):
        msp_uncertainty_array([0.2, 2.0])


# Margin

@pytest.mark.parametrize("bias, x, expected", [(0.0, (0, 0), 0.0), (0.0, (1, 0), 0.6), (-5.0, (1, 0), -0.4)])
def test_margin_fixtures(bias, x, expected):
    assert margin_confidence(Hyperplane(np.array([3.0, 4.0]), bias), x) == pytest.approx(expected, abs=1e-12)


def test_margin_scale_invariant():
    x = (0.3, -1.7)
    base = margin_confidence(Hyperplane(np.array([3.0, 4.0]), -5.0), x)
    scaled = margin_confidence(Hyperplane(np.array([30.0, 40.0]), -50.0), x)
    assert scaled == pytest.approx(base, abs=1e-12)


def test_margin_errors():
    with pytest.raises(DimensionMismatch):
        margin_confidence(Hyperplane(np.array([3.0, 4.0])), (1.0, 2.0, 3.0))
    with pytest.raises(DegenerateHyperplane):
        Hyperplane(np.zeros(2))


def test_load_hyperplane(tmp_path):
    path = tmp_path / "h.json"
    path.write_text(json.dumps({"weights": [3, 4], "bias": -5}))
    h = load_hyperplane(path)
    assert h.norm == 5.0
    assert h.bias == -5.0


# CADE

def _table(points):
    return EmbeddingTable(2, {f"p{i}": p for i, p in enumerate(points)})


def test_cade_two_points_is_degenerate():
    table = _table([(0, 0), (2, 0)])
    with pytest.raises(DegenerateMad):
        fit_cade_stats(table, [("p0", 1), ("p1", 1)])


def test_cade_square_is_degenerate():
    table = _table([(0, 0), (2, 0), (0, 2), (2, 2)])
    with pytest.raises(DegenerateMad):
        fit_cade_stats(table, [(f"p{i}", 0) for i in range(4)])


def test_cade_triangle_matches_brute_force():
    points = [(0.0, 0.0), (4.0, 0.0), (0.0, 2.0)]
    (stats,) = fit_cade_stats(_table(points), [(f"p{i}", 1) for i in range(3)])
    centroid = (4.0 / 3.0, 2.0 / 3.0)
    distances = sorted(math.dist(p, centroid) for p in points)
    deviations = sorted(abs(d - distances[1]) for d in distances)
    np.testing.assert_allclose(stats.centroid, centroid, atol=1e-12)
    assert stats.median_distance == pytest.approx(distances[1], abs=1e-12)
    assert stats.mad == pytest.approx(1.4826 * deviations[1], abs=1e-12)


def test_cade_class_too_small():
    table = _table([(0, 0), (4, 0), (0, 2), (5, 5)])
    with pytest.raises(ClassTooSmall):
        fit_cade_stats(table, [("p0", 0), ("p1", 0), ("p2", 0), ("p3", 1)])


def test_cade_zero_deviation():
    stats = [CadeClassStats(0, np.zeros(2), 2.0, 0.5), CadeClassStats(1, np.array([10.0, 0.0]), 1.0, 1.0)]
    assert cade_ood_score((2.0, 0.0), stats) == 0.0


def test_cade_single_class_not_ood():
    stats = [CadeClassStats(1, np.zeros(2), 2.0, 0.5)]
    score = cade_ood_score((3.0, 0.0), stats)
    assert score == pytest.approx(2.0, abs=1e-12)
    assert not is_ood(score)


def test_cade_min_over_classes_is_ood():
    # x is at distance 5 from both centroids: A_0 = |5 - 1| / 1 = 4.0, A_1 = |5 - 3.2| / 0.5 = 3.6
    stats = [CadeClassStats(0, np.zeros(2), 1.0, 1.0), CadeClassStats(1, np.array([8.0, 0.0]), 3.2, 0.5)]
    x = (4.0, 3.0)
    score = cade_ood_score(x, stats)
    assert score == pytest.approx(3.6, abs=1e-12)
    assert is_ood(score)
    assert cade_ood_score(x, list(reversed(stats))) == score


def test_cade_dimension_mismatch_and_bad_stats():
    with pytest.raises(DimensionMismatch):
        cade_ood_score((1.0, 2.0, 3.0), [CadeClassStats(0, np.zeros(2), 1.0, 1.0)])
    with pytest.raises(DegenerateMad):
        CadeClassStats(0, np.zeros(2), 1.0, 0.0)


# Orientation

def test_to_uncertainty():
    assert to_uncertainty(0.7, ScoreOrientation("u", True)) == 0.7
    assert to_uncertainty(0.7, ScoreOrientation("k", False)) == -0.7


def test_confidence_ranking_reverses():
    registry = ScoreRegistry()
    margins = [0.1, 0.4, 0.9, 2.0]
    uncertainty = registry.uncertainties("margin", margins)
    assert list(np.argsort(uncertainty)) == [3, 2, 1, 0]


def test_unknown_score_name():
    with pytest.raises(UnknownScoreName):
        ScoreRegistry().get("hcc")


def test_external_columns_register_per_registry():
    first = ScoreRegistry()
    assert resolve_score_name("external:hcc", first) == "hcc"
    assert first.get("hcc").higher_means_more_uncertain
    assert "hcc" not in ScoreRegistry()
    with pytest.raises(ConfigError):
        resolve_score_name("external:", first)


# Pipeline

def test_score_stream_msp_from_probabilities():
    records = (make_record("a", prob=0.5), make_record("b", prob=1.0))
    stream = TemporalStream("s", (MonthBatch(0, records),))
    scored = score_stream(stream, "msp_u")
    assert [r.score("msp_u") for r in scored.records] == [1.0, 0.0]
    assert "msp_u" not in stream.records[0].scores


def test_score_stream_margin_stores_absolute_distance():
    table = EmbeddingTable(2, {"a": (1.0, 0.0), "b": (0.0, 0.0)})
    stream = TemporalStream("s", (MonthBatch(0, (make_record("a"), make_record("b"))),))
    scored = score_stream(stream, "margin", embeddings=table, hyperplane=Hyperplane(np.array([3.0, 4.0]), -5.0))
    assert [r.score("margin") for r in scored.records] == pytest.approx([0.4, 1.0])


def test_score_stream_cade():
    table = EmbeddingTable(1, {"a": (3.0,)})
    stream = TemporalStream("s", (MonthBatch(0, (make_record("a"),)),))
    stats = [CadeClassStats(1, np.zeros(1), 2.0, 0.5)]
    scored = score_stream(stream, "cade_ood", embeddings=table, cade_stats=stats)
    assert scored.records[0].score("cade_ood") == pytest.approx(2.0)


def test_score_stream_external_requires_column():
    stream = make_stream([[(0.1, 1, 1)]], score="hcc")
    registry = ScoreRegistry()
    assert score_stream(stream, "external:hcc", registry) is stream
    with pytest.raises(MissingScore):
        score_stream(stream, "external:other", registry)


def test_score_stream_configuration_errors():
    stream = make_stream([[(0.1, 1, 1)]])
    with pytest.raises(ConfigError):
        score_stream(stream, "margin")
    with pytest.raises(ConfigError):
        score_stream(stream, "entropy")
