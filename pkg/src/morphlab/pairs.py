"""Morph pair selection: split by gender/expression, rank by cosine similarity.

Pairs are unordered, cross-subject only, and ranked most-similar first with a
deterministic lexicographic tie-break on the (lower id, higher id) tuple.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import Embedding, MorphPair, SubjectMeta, GENDERS, EXPRESSIONS, meta_table
from .errors import (
    DimensionMismatch,
    InsufficientSubjects,
    InvalidParameter,
    MissingMetadata,
    SchemaError,
    ZeroVector,
)

DEFAULT_TOP_K = 250

SPLIT_KEYS = tuple((g, e) for g in GENDERS for e in EXPRESSIONS)


def cosine_similarity(a, b) -> float:
    """Cosine similarity of two embeddings (or raw vectors), clamped to [-1, 1]."""
    u = np.asarray(getattr(a, "values", a), dtype=np.float64)
    v = np.asarray(getattr(b, "values", b), dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionMismatch(f"vector shapes differ: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity is undefined for zero vectors")
    return min(1.0, max(-1.0, float(np.dot(u, v)) / (nu * nv)))


def partition_by_metadata(
    embeddings: Sequence[Embedding],
    meta: Iterable[SubjectMeta] | Mapping[str, SubjectMeta],
) -> dict[tuple[str, str], tuple[Embedding, ...]]:
    """Partition embeddings into the four (gender, expression) splits.

    Every embedding lands in exactly one split; all four split keys are
    present even when empty. Raises MissingMetadata listing every subject id
    that lacks a metadata entry.
    """
    table = dict(meta) if isinstance(meta, Mapping) else meta_table(meta)
    missing = sorted({e.subject_id for e in embeddings if e.subject_id not in table})
    if missing:
        raise MissingMetadata(missing)
    splits: dict[tuple[str, str], list[Embedding]] = {key: [] for key in SPLIT_KEYS}
    for e in embeddings:
        m = table[e.subject_id]
        splits[(m.gender, m.expression)].append(e)
    return {key: tuple(members) for key, members in splits.items()}


def select_top_pairs(split: Sequence[Embedding], k: int = DEFAULT_TOP_K) -> list[MorphPair]:
    """Rank all cross-subject pairs of a split and keep the k most similar.

    Returns at most k MorphPair records in descending similarity order. Ties
    are broken by the lexicographic order of the (lower id, higher id) tuple,
    and a pair of images of one subject is never produced.
    """
    if k < 1:
        raise InvalidParameter(f"k must be at least 1, got {k}")
    split = tuple(split)
    ids = [e.id for e in split]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise SchemaError(f"duplicate image ids in split: {', '.join(dupes)}")
    if len({e.subject_id for e in split}) < 2:
        raise InsufficientSubjects(
            f"need at least 2 distinct subjects to form pairs, got "
            f"{len({e.subject_id for e in split})}"
        )
    scored = []
    for e1, e2 in combinations(split, 2):
        if e1.subject_id == e2.subject_id:
            continue
        a, b = (e1, e2) if e1.id <= e2.id else (e2, e1)
        scored.append((cosine_similarity(a, b), a.id, b.id))
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [MorphPair(a, b, similarity=sim) for sim, a, b in scored[:k]]
