"""Round-trip and error-reporting tests for the canonical file formats."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from morphlab import (
    Embedding,
    MadScoreSet,
    MatedMorph,
    MatedScoreSet,
    MetricCell,
    MetricsReport,
    MorphCode,
    MorphPair,
    NonMatedScoreSet,
    Provenance,
    SubjectMeta,
    SubjectScores,
)
from morphlab import fileio
from morphlab.errors import ParseError, SchemaError

finite_floats = st.floats(
    allow_nan=False, allow_infinity=False, width=64, min_value=-1e12, max_value=1e12
)
ids = st.text(
    alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd"), whitelist_characters="_-."),
    min_size=1,
    max_size=12,
)


def test_embedding_roundtrip_small(tmp_path):
    embs = (
        Embedding("a", "s1", [1.0, -2.5, 3e-8]),
        Embedding("b", "s1", [0.1, 0.2, 0.3]),
        Embedding("c", "s2", [9.0, 8.0, 7.0]),
    )
    path = tmp_path / "emb.tsv"
    fileio.save_embeddings(path, embs)
    assert fileio.load_embeddings(path) == embs


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.tuples(ids, ids, st.lists(finite_floats, min_size=3, max_size=3)),
        min_size=1,
        max_size=8,
    )
)
def test_embedding_roundtrip_property(tmp_path_factory, rows):
    embs = tuple(Embedding(f"{i}_{r[0]}", r[1], r[2]) for i, r in enumerate(rows))
    path = tmp_path_factory.mktemp("emb") / "emb.tsv"
    fileio.save_embeddings(path, embs)
    loaded = fileio.load_embeddings(path)
    assert loaded == embs


def test_embedding_malformed_row_reports_line_and_column(tmp_path):
    path = tmp_path / "emb.tsv"
    path.write_text(
        "morphlab-embeddings-v1\tdim=4\n"
        "a\ts1\t1.0\t2.0\t3.0\t4.0\n"
        "b\ts1\t1.0\t2.0\t3.0\n",
        encoding="utf-8",
    )
    with pytest.raises(ParseError) as err:
        fileio.load_embeddings(path)
    assert err.value.line == 3


def test_embedding_bad_float_reports_column(tmp_path):
    path = tmp_path / "emb.tsv"
    path.write_text(
        "morphlab-embeddings-v1\tdim=2\n"
        "a\ts1\t1.0\toops\n",
        encoding="utf-8",
    )
    with pytest.raises(ParseError) as err:
        fileio.load_embeddings(path)
    assert err.value.line == 2
    assert err.value.column == len("a\ts1\t1.0\t") + 1


def test_wrong_format_token_rejected(tmp_path):
    path = tmp_path / "emb.tsv"
    path.write_text("something-else\tdim=2\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        fileio.load_embeddings(path)
    assert err.value.line == 1


def test_meta_roundtrip(tmp_path):
    metas = (
        SubjectMeta("s1", "female", "neutral"),
        SubjectMeta("s2", "male", "smiling"),
    )
    path = tmp_path / "meta.tsv"
    fileio.save_meta(path, metas)
    assert fileio.load_meta(path) == metas


def test_meta_missing_field_is_schema_error(tmp_path):
    path = tmp_path / "meta.tsv"
    path.write_text("morphlab-meta-v1\nsubject=s1\tgender=female\n", encoding="utf-8")
    with pytest.raises(SchemaError) as err:
        fileio.load_meta(path)
    assert "expression" in str(err.value)


def test_pairs_roundtrip(tmp_path):
    pairs = (
        MorphPair("a", "b", 0.5, 0.9375),
        MorphPair("a", "c", 0.25, -0.125),
    )
    path = tmp_path / "pairs.tsv"
    fileio.save_pairs(path, pairs)
    assert fileio.load_pairs(path) == pairs


@settings(max_examples=60, deadline=None)
@given(st.lists(finite_floats, min_size=1, max_size=40))
def test_nonmated_roundtrip_property(tmp_path_factory, scores):
    path = tmp_path_factory.mktemp("nm") / "scores.tsv"
    original = NonMatedScoreSet(tuple(scores))
    fileio.save_nonmated(path, original)
    assert fileio.load_nonmated(path) == original


def test_mated_roundtrip(tmp_path):
    mated = MatedScoreSet(
        (
            MatedMorph(
                "m0",
                (SubjectScores("s0", (0.5, 0.25)), SubjectScores("s1", (0.75, 0.125))),
            ),
            MatedMorph(
                "m1",
                (SubjectScores("s2", (0.9,)), SubjectScores("s3", (0.8,))),
            ),
        )
    )
    path = tmp_path / "mated.tsv"
    fileio.save_mated(path, mated)
    assert fileio.load_mated(path) == mated


def test_mated_loader_requires_two_subjects(tmp_path):
    path = tmp_path / "mated.tsv"
    path.write_text("morphlab-mated-v1\nm0\ts0\t0.5\n", encoding="utf-8")
    with pytest.raises(SchemaError):
        fileio.load_mated(path)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.lists(st.lists(finite_floats, min_size=1, max_size=4), min_size=2, max_size=4),
        min_size=1,
        max_size=5,
    )
)
def test_mated_roundtrip_property(tmp_path_factory, structure):
    mated = MatedScoreSet(
        tuple(
            MatedMorph(
                f"m{i}",
                tuple(
                    SubjectScores(f"s{j}", tuple(scores))
                    for j, scores in enumerate(subjects)
                ),
            )
            for i, subjects in enumerate(structure)
        )
    )
    path = tmp_path_factory.mktemp("mated") / "mated.tsv"
    fileio.save_mated(path, mated)
    assert fileio.load_mated(path) == mated


@settings(max_examples=40, deadline=None)
@given(
    st.lists(finite_floats, min_size=1, max_size=20),
    st.lists(finite_floats, min_size=1, max_size=20),
    st.sampled_from(["higher_is_attack", "higher_is_bonafide"]),
)
def test_mad_roundtrip_property(tmp_path_factory, bona_fide, attack, polarity):
    scores = MadScoreSet(tuple(bona_fide), tuple(attack), polarity)
    path = tmp_path_factory.mktemp("mad") / "mad.tsv"
    fileio.save_mad(path, scores)
    assert fileio.load_mad(path) == scores


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
            finite_floats,
        ),
        min_size=1,
        max_size=10,
    )
)
def test_pairs_roundtrip_property(tmp_path_factory, rows):
    pairs = tuple(
        MorphPair(f"a{i}", f"b{i}", lam, sim) for i, (lam, sim) in enumerate(rows)
    )
    path = tmp_path_factory.mktemp("pairs") / "pairs.tsv"
    fileio.save_pairs(path, pairs)
    assert fileio.load_pairs(path) == pairs


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.sampled_from(["female", "male"]), st.sampled_from(["neutral", "smiling"])
        ),
        min_size=1,
        max_size=12,
    )
)
def test_meta_roundtrip_property(tmp_path_factory, rows):
    metas = tuple(
        SubjectMeta(f"s{i}", gender, expression)
        for i, (gender, expression) in enumerate(rows)
    )
    path = tmp_path_factory.mktemp("meta") / "meta.tsv"
    fileio.save_meta(path, metas)
    assert fileio.load_meta(path) == metas


def test_mad_roundtrip_and_empty_attack_schema_error(tmp_path):
    scores = MadScoreSet((0.125, 0.5), (0.75,), "higher_is_bonafide")
    path = tmp_path / "mad.tsv"
    fileio.save_mad(path, scores)
    assert fileio.load_mad(path) == scores

    empty = tmp_path / "empty.tsv"
    empty.write_text(
        "morphlab-mad-v1\tpolarity=higher_is_attack\nbonafide\t0.5\n", encoding="utf-8"
    )
    with pytest.raises(SchemaError):
        fileio.load_mad(empty)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(finite_floats, min_size=2, max_size=9),
    st.lists(finite_floats, min_size=6, max_size=6),
    st.sampled_from([(6,), (2, 3), (3, 2), (1, 6)]),
)
def test_morph_code_roundtrip_property(tmp_path_factory, semantic, stochastic, shape):
    code = MorphCode(semantic, stochastic, shape)
    path = tmp_path_factory.mktemp("code") / "c.code"
    fileio.save_morph_code(path, code)
    assert fileio.load_morph_code(path) == code


def test_vector_roundtrip_exact(tmp_path):
    values = np.array([math.pi, -1e-300, 1e300, 0.1])
    path = tmp_path / "v.vec"
    fileio.save_vector(path, values)
    assert np.array_equal(fileio.load_vector(path), values)


def test_report_roundtrip(tmp_path):
    report = MetricsReport(
        kind="mad",
        cells=(
            MetricCell("MAD/SMDD", "MorphDiffusion", "EER", "", 0.085, threshold=0.5),
            MetricCell(
                "MAD/SMDD", "MorphDiffusion", "APCER", "BPCER10.00%", 0.074,
                threshold=0.4, achieved_rate=0.1, flags=("degenerate_threshold",),
            ),
        ),
        provenance=Provenance(
            inputs=(("scores.tsv", "sha256:abc"),),
            tool="morphlab 0.1.0",
            parameters=(("bpcer_targets", "0.1"),),
        ),
    )
    path = tmp_path / "rep.json"
    fileio.save_report(path, report)
    assert fileio.load_report(path) == report


def test_report_missing_field_is_schema_error(tmp_path):
    path = tmp_path / "rep.json"
    path.write_text('{"format": "morphlab-report-v1", "kind": "mad"}', encoding="utf-8")
    with pytest.raises(SchemaError) as err:
        fileio.load_report(path)
    assert "cells" in str(err.value)


def test_report_bad_json_is_parse_error(tmp_path):
    path = tmp_path / "rep.json"
    path.write_text("{nope", encoding="utf-8")
    with pytest.raises(ParseError):
        fileio.load_report(path)


def test_float_formatting_is_lossless():
    for x in [0.1, 1 / 3, math.pi, 1e-308, -1e308, 123456789.123456789]:
        assert float(fileio.fmt_float(x)) == x
