"""Canonical file formats: tab-separated score/vector files and JSON reports.

Every tabular format starts with a header line carrying a format-version
token plus key=value fields; records follow one per line. Floats are written
in decimal with 17 significant digits so that save followed by load is exact
for IEEE doubles. Reports are canonical JSON; the text rendering in
``report`` is derived from it.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .core import (
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
    POLARITIES,
)
from .errors import ParseError, SchemaError

EMBEDDINGS_TOKEN = "morphlab-embeddings-v1"
META_TOKEN = "morphlab-meta-v1"
PAIRS_TOKEN = "morphlab-pairs-v1"
NONMATED_TOKEN = "morphlab-nonmated-v1"
MATED_TOKEN = "morphlab-mated-v1"
MAD_TOKEN = "morphlab-mad-v1"
MORPHCODE_TOKEN = "morphlab-morphcode-v1"
VECTOR_TOKEN = "morphlab-vector-v1"
REPORT_TOKEN = "morphlab-report-v1"


def fmt_float(x: float) -> str:
    """Decimal rendering with 17 significant digits (lossless for doubles)."""
    return format(float(x), ".17g")


def sha256_file(path) -> str:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return f"sha256:{digest}"


def _column_of(fields: list[str], index: int) -> int:
    # 1-based character column of the start of fields[index] in the raw line
    return 1 + sum(len(fields[j]) + 1 for j in range(index))


def _read_lines(path) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    return lines


def _parse_float(path, lineno: int, fields: list[str], index: int) -> float:
    tok = fields[index]
    try:
        return float(tok)
    except ValueError:
        raise ParseError(path, lineno, _column_of(fields, index), f"not a float: {tok!r}") from None


def _parse_header(path, lines: list[str], token: str) -> dict[str, str]:
    if not lines:
        raise ParseError(path, 1, 1, "empty file")
    fields = lines[0].split("\t")
    if fields[0] != token:
        raise ParseError(path, 1, 1, f"expected format token {token!r}, got {fields[0]!r}")
    header: dict[str, str] = {}
    for i, tok in enumerate(fields[1:], start=1):
        if "=" not in tok:
            raise ParseError(path, 1, _column_of(fields, i), f"expected key=value, got {tok!r}")
        key, value = tok.split("=", 1)
        header[key] = value
    return header


def _record_lines(path, lines: list[str]):
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            raise ParseError(path, lineno, 1, "unexpected empty line")
        yield lineno, line.split("\t")


def _header_int(path, header: dict[str, str], key: str) -> int:
    if key not in header:
        raise SchemaError(f"{path}: header is missing the {key!r} field")
    try:
        value = int(header[key])
    except ValueError:
        raise ParseError(path, 1, 1, f"header field {key!r} is not an integer") from None
    if value < 1:
        raise SchemaError(f"{path}: header field {key!r} must be positive")
    return value


# -- embeddings ---------------------------------------------------------------


def save_embeddings(path, embeddings) -> None:
    embeddings = tuple(embeddings)
    if not embeddings:
        raise SchemaError("refusing to save an empty embedding set")
    dim = embeddings[0].dim
    rows = [f"{EMBEDDINGS_TOKEN}\tdim={dim}"]
    for e in embeddings:
        rows.append("\t".join([e.id, e.subject_id] + [fmt_float(v) for v in e.values]))
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_embeddings(path) -> tuple[Embedding, ...]:
    lines = _read_lines(path)
    header = _parse_header(path, lines, EMBEDDINGS_TOKEN)
    dim = _header_int(path, header, "dim")
    out = []
    for lineno, fields in _record_lines(path, lines):
        if len(fields) != dim + 2:
            raise ParseError(
                path, lineno, _column_of(fields, min(len(fields), dim + 1)),
                f"expected {dim + 2} fields (id, subject, {dim} floats), got {len(fields)}",
            )
        values = [_parse_float(path, lineno, fields, i) for i in range(2, dim + 2)]
        out.append(Embedding(id=fields[0], subject_id=fields[1], values=values))
    if not out:
        raise SchemaError(f"{path}: embedding file contains no records")
    return tuple(out)


# -- subject metadata ---------------------------------------------------------


def save_meta(path, metas) -> None:
    rows = [META_TOKEN]
    for m in metas:
        rows.append(f"subject={m.subject_id}\tgender={m.gender}\texpression={m.expression}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_meta(path) -> tuple[SubjectMeta, ...]:
    lines = _read_lines(path)
    _parse_header(path, lines, META_TOKEN)
    out = []
    seen = set()
    for lineno, fields in _record_lines(path, lines):
        record: dict[str, str] = {}
        for i, tok in enumerate(fields):
            if "=" not in tok:
                raise ParseError(path, lineno, _column_of(fields, i), f"expected key=value, got {tok!r}")
            key, value = tok.split("=", 1)
            record[key] = value
        for key in ("subject", "gender", "expression"):
            if key not in record:
                raise SchemaError(f"{path}:{lineno}: record is missing the {key!r} field")
        if record["subject"] in seen:
            raise SchemaError(f"{path}:{lineno}: duplicate metadata for subject {record['subject']!r}")
        seen.add(record["subject"])
        out.append(SubjectMeta(record["subject"], record["gender"], record["expression"]))
    return tuple(out)


# -- morph pairs --------------------------------------------------------------


def save_pairs(path, pairs) -> None:
    rows = [f"{PAIRS_TOKEN}\tcols=4"]
    for p in pairs:
        rows.append("\t".join([p.source_a, p.source_b, fmt_float(p.lam), fmt_float(p.similarity)]))
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_pairs(path) -> tuple[MorphPair, ...]:
    lines = _read_lines(path)
    _parse_header(path, lines, PAIRS_TOKEN)
    out = []
    for lineno, fields in _record_lines(path, lines):
        if len(fields) != 4:
            raise ParseError(path, lineno, 1, f"expected 4 fields, got {len(fields)}")
        lam = _parse_float(path, lineno, fields, 2)
        sim = _parse_float(path, lineno, fields, 3)
        out.append(MorphPair(fields[0], fields[1], lam, sim))
    return tuple(out)


# -- score sets ---------------------------------------------------------------


def save_nonmated(path, scores: NonMatedScoreSet) -> None:
    rows = [f"{NONMATED_TOKEN}\tcols=1"]
    rows.extend(fmt_float(s) for s in scores.scores)
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_nonmated(path) -> NonMatedScoreSet:
    lines = _read_lines(path)
    _parse_header(path, lines, NONMATED_TOKEN)
    scores = []
    for lineno, fields in _record_lines(path, lines):
        if len(fields) != 1:
            raise ParseError(path, lineno, 1, f"expected 1 field, got {len(fields)}")
        scores.append(_parse_float(path, lineno, fields, 0))
    return NonMatedScoreSet(tuple(scores)).validate()


def save_mated(path, scores: MatedScoreSet) -> None:
    rows = [MATED_TOKEN]
    for morph in scores.morphs:
        for subject in morph.subjects:
            rows.append(
                "\t".join([morph.morph_id, subject.subject_id]
                          + [fmt_float(s) for s in subject.scores])
            )
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_mated(path) -> MatedScoreSet:
    lines = _read_lines(path)
    _parse_header(path, lines, MATED_TOKEN)
    by_morph: dict[str, list[SubjectScores]] = {}
    for lineno, fields in _record_lines(path, lines):
        if len(fields) < 3:
            raise ParseError(
                path, lineno, 1,
                f"expected morph id, subject id and at least one score, got {len(fields)} fields",
            )
        morph_id, subject_id = fields[0], fields[1]
        scores = tuple(_parse_float(path, lineno, fields, i) for i in range(2, len(fields)))
        subjects = by_morph.setdefault(morph_id, [])
        if any(s.subject_id == subject_id for s in subjects):
            raise SchemaError(
                f"{path}:{lineno}: duplicate subject {subject_id!r} for morph {morph_id!r}"
            )
        subjects.append(SubjectScores(subject_id, scores))
    morphs = tuple(MatedMorph(mid, tuple(subs)) for mid, subs in by_morph.items())
    return MatedScoreSet(morphs).validate()


def save_mad(path, scores: MadScoreSet) -> None:
    rows = [f"{MAD_TOKEN}\tpolarity={scores.polarity}"]
    rows.extend(f"bonafide\t{fmt_float(s)}" for s in scores.bona_fide)
    rows.extend(f"attack\t{fmt_float(s)}" for s in scores.attack)
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_mad(path) -> MadScoreSet:
    lines = _read_lines(path)
    header = _parse_header(path, lines, MAD_TOKEN)
    if "polarity" not in header:
        raise SchemaError(f"{path}: header is missing the 'polarity' field")
    if header["polarity"] not in POLARITIES:
        raise SchemaError(f"{path}: unknown polarity {header['polarity']!r}")
    bona_fide, attack = [], []
    for lineno, fields in _record_lines(path, lines):
        if len(fields) != 2:
            raise ParseError(path, lineno, 1, f"expected label and score, got {len(fields)} fields")
        score = _parse_float(path, lineno, fields, 1)
        if fields[0] == "bonafide":
            bona_fide.append(score)
        elif fields[0] == "attack":
            attack.append(score)
        else:
            raise ParseError(path, lineno, 1, f"unknown sample label {fields[0]!r}")
    return MadScoreSet(tuple(bona_fide), tuple(attack), header["polarity"]).validate()


# -- latent codes and toy image vectors ---------------------------------------


def save_morph_code(path, code: MorphCode) -> None:
    shape = "x".join(str(n) for n in code.stochastic_shape)
    rows = [
        f"{MORPHCODE_TOKEN}\tsemantic_dim={code.semantic_dim}\tstochastic_shape={shape}",
        "\t".join(["semantic"] + [fmt_float(v) for v in code.semantic]),
        "\t".join(["stochastic"] + [fmt_float(v) for v in code.stochastic]),
    ]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_morph_code(path) -> MorphCode:
    lines = _read_lines(path)
    header = _parse_header(path, lines, MORPHCODE_TOKEN)
    sem_dim = _header_int(path, header, "semantic_dim")
    if "stochastic_shape" not in header:
        raise SchemaError(f"{path}: header is missing the 'stochastic_shape' field")
    try:
        shape = tuple(int(n) for n in header["stochastic_shape"].split("x"))
    except ValueError:
        raise ParseError(path, 1, 1, "stochastic_shape must be INTxINTx...") from None
    records = dict()
    for lineno, fields in _record_lines(path, lines):
        if fields[0] not in ("semantic", "stochastic") or fields[0] in records:
            raise ParseError(path, lineno, 1, f"unexpected record {fields[0]!r}")
        records[fields[0]] = [_parse_float(path, lineno, fields, i) for i in range(1, len(fields))]
    for key in ("semantic", "stochastic"):
        if key not in records:
            raise SchemaError(f"{path}: file is missing the {key!r} record")
    if len(records["semantic"]) != sem_dim:
        raise SchemaError(
            f"{path}: semantic record has {len(records['semantic'])} values, header says {sem_dim}"
        )
    if len(records["stochastic"]) != math.prod(shape):
        raise SchemaError(
            f"{path}: stochastic record has {len(records['stochastic'])} values, "
            f"shape {header['stochastic_shape']} needs {math.prod(shape)}"
        )
    return MorphCode(records["semantic"], records["stochastic"], shape)


def save_vector(path, values) -> None:
    arr = np.asarray(values, dtype=np.float64)
    rows = [
        f"{VECTOR_TOKEN}\tdim={arr.size}",
        "\t".join(["values"] + [fmt_float(v) for v in arr]),
    ]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_vector(path) -> np.ndarray:
    lines = _read_lines(path)
    header = _parse_header(path, lines, VECTOR_TOKEN)
    dim = _header_int(path, header, "dim")
    records = list(_record_lines(path, lines))
    if len(records) != 1 or records[0][1][0] != "values":
        raise SchemaError(f"{path}: expected exactly one 'values' record")
    lineno, fields = records[0]
    if len(fields) != dim + 1:
        raise ParseError(path, lineno, 1, f"expected {dim} values, got {len(fields) - 1}")
    return np.array([_parse_float(path, lineno, fields, i) for i in range(1, dim + 1)])


# -- metric reports (canonical JSON) ------------------------------------------


def report_to_json(report: MetricsReport) -> str:
    cells = []
    for c in report.cells:
        entry: dict = {
            "model": c.model,
            "morph_type": c.morph_type,
            "metric": c.metric,
            "operating_point": c.operating_point,
            "value": c.value,
        }
        if c.threshold is not None:
            entry["threshold"] = c.threshold
        if c.achieved_rate is not None:
            entry["achieved_rate"] = c.achieved_rate
        if c.flags:
            entry["flags"] = list(c.flags)
        cells.append(entry)
    doc = {
        "format": REPORT_TOKEN,
        "kind": report.kind,
        "cells": cells,
        "provenance": {
            "inputs": [list(pair) for pair in report.provenance.inputs],
            "tool": report.provenance.tool,
            "parameters": [list(pair) for pair in report.provenance.parameters],
        },
    }
    return json.dumps(doc, indent=2) + "\n"


def save_report(path, report: MetricsReport) -> None:
    Path(path).write_text(report_to_json(report), encoding="utf-8")


def load_report(path) -> MetricsReport:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, e.colno, e.msg) from None
    if not isinstance(doc, dict) or doc.get("format") != REPORT_TOKEN:
        raise SchemaError(f"{path}: not a {REPORT_TOKEN} document")
    for key in ("kind", "cells", "provenance"):
        if key not in doc:
            raise SchemaError(f"{path}: document is missing the {key!r} field")
    cells = []
    for i, entry in enumerate(doc["cells"]):
        for key in ("model", "morph_type", "metric", "operating_point", "value"):
            if key not in entry:
                raise SchemaError(f"{path}: cell {i} is missing the {key!r} field")
        cells.append(
            MetricCell(
                model=entry["model"],
                morph_type=entry["morph_type"],
                metric=entry["metric"],
                operating_point=entry["operating_point"],
                value=entry["value"],
                threshold=entry.get("threshold"),
                achieved_rate=entry.get("achieved_rate"),
                flags=tuple(entry.get("flags", ())),
            )
        )
    prov = doc["provenance"]
    provenance = Provenance(
        inputs=tuple((n, d) for n, d in prov.get("inputs", [])),
        tool=prov.get("tool", ""),
        parameters=tuple((k, v) for k, v in prov.get("parameters", [])),
    )
    return MetricsReport(kind=doc["kind"], cells=tuple(cells), provenance=provenance)
