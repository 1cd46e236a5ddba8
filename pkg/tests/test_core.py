import numpy as np
import pytest

from morphlab import (
    Embedding,
    MadScoreSet,
    MatedMorph,
    MatedScoreSet,
    MetricCell,
    MetricsReport,
    MorphCode,
    MorphPair,
    SubjectMeta,
    SubjectScores,
    validate_embedding_set,
)
from morphlab.core import meta_table
from morphlab.errors import (
    DimensionMismatch,
    LambdaOutOfRange,
    NonFiniteValue,
    SchemaError,
)


def test_validate_accepts_well_formed_set():
    embs = [
        Embedding("a", "s1", [1.0, 2.0, 3.0, 4.0]),
        Embedding("b", "s2", [0.5, 0.5, 0.5, 0.5]),
    ]
    assert validate_embedding_set(embs) == tuple(embs)


def test_validate_rejects_mixed_dimensions():
    embs = [
        Embedding("a", "s1", [1.0, 2.0, 3.0, 4.0]),
        Embedding("b", "s2", [1.0, 2.0, 3.0, 4.0, 5.0]),
    ]
    with pytest.raises(DimensionMismatch) as err:
        validate_embedding_set(embs)
    assert "b" in str(err.value)


def test_validate_rejects_nan():
    embs = [
        Embedding("a", "s1", [1.0, 2.0]),
        Embedding("bad", "s2", [float("nan"), 0.0]),
    ]
    with pytest.raises(NonFiniteValue) as err:
        validate_embedding_set(embs)
    assert "bad" in str(err.value)


def test_validate_rejects_empty_collection():
    with pytest.raises(SchemaError):
        validate_embedding_set([])


def test_embedding_values_are_immutable():
    e = Embedding("a", "s1", [1.0, 2.0])
    with pytest.raises(ValueError):
        e.values[0] = 5.0


def test_morph_code_shape_must_match_flat_length():
    MorphCode([1.0], [1.0, 2.0, 3.0, 4.0, 5.0, 6.0], (2, 3))
    with pytest.raises(SchemaError):
        MorphCode([1.0], [1.0, 2.0, 3.0], (2, 3))
    with pytest.raises(NonFiniteValue):
        MorphCode([np.inf], [1.0], (1,))


def test_morph_pair_invariants():
    MorphPair("a", "b", 0.5)
    with pytest.raises(SchemaError):
        MorphPair("a", "a", 0.5)
    with pytest.raises(LambdaOutOfRange):
        MorphPair("a", "b", 1.5)


def test_subject_meta_rejects_unknown_categories():
    SubjectMeta("s1", "female", "neutral")
    with pytest.raises(SchemaError):
        SubjectMeta("s1", "unknown", "neutral")
    with pytest.raises(SchemaError):
        SubjectMeta("s1", "male", "frowning")


def test_meta_table_rejects_duplicates():
    metas = [SubjectMeta("s1", "female", "neutral"), SubjectMeta("s1", "male", "smiling")]
    with pytest.raises(SchemaError):
        meta_table(metas)


def test_mated_validate_needs_two_subjects_and_probes():
    good = MatedScoreSet(
        (
            MatedMorph(
                "m0",
                (SubjectScores("s0", (0.5,)), SubjectScores("s1", (0.4, 0.6))),
            ),
        )
    )
    good.validate()
    with pytest.raises(SchemaError):
        MatedScoreSet((MatedMorph("m0", (SubjectScores("s0", (0.5,)),)),)).validate()
    with pytest.raises(SchemaError):
        MatedScoreSet(
            (MatedMorph("m0", (SubjectScores("s0", ()), SubjectScores("s1", (0.4,)))),)
        ).validate()
    with pytest.raises(NonFiniteValue):
        MatedScoreSet(
            (
                MatedMorph(
                    "m0",
                    (SubjectScores("s0", (float("nan"),)), SubjectScores("s1", (0.4,))),
                ),
            )
        ).validate()


def test_mad_validate_rejects_empty_lists():
    MadScoreSet((0.1,), (0.9,)).validate()
    with pytest.raises(SchemaError):
        MadScoreSet((0.1,), ()).validate()
    with pytest.raises(SchemaError):
        MadScoreSet((0.1,), (0.9,), polarity="sideways")


def test_metric_cell_value_range():
    MetricCell("m", "t", "MMPMR", "MMPMR100", 0.5)
    with pytest.raises(SchemaError):
        MetricCell("m", "t", "MMPMR", "MMPMR100", 1.5)


def test_report_rejects_duplicate_keys():
    cell = MetricCell("m", "t", "MMPMR", "MMPMR100", 0.5)
    with pytest.raises(SchemaError):
        MetricsReport(kind="vulnerability", cells=(cell, cell))
