"""Shared domain types and their validation.

All types are immutable after construction and safe to share across threads.
Score-set records are deliberately permissive at construction time: metric
operations raise EmptyScoreSet / UnevenProbeCounts on operational
preconditions, while the file loaders enforce the structural invariants
(SchemaError / NonFiniteValue) on everything they read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    LambdaOutOfRange,
    NonFiniteValue,
    SchemaError,
)

GENDERS = ("female", "male")
EXPRESSIONS = ("neutral", "smiling")

HIGHER_IS_ATTACK = "higher_is_attack"
HIGHER_IS_BONAFIDE = "higher_is_bonafide"
POLARITIES = (HIGHER_IS_ATTACK, HIGHER_IS_BONAFIDE)


def _as_readonly_vector(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise SchemaError(f"{what} must be a non-empty 1-D vector, got shape {arr.shape}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Embedding:
    """A fixed-dimension feature vector labelled with image and subject ids."""

    id: str
    subject_id: str
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly_vector(self.values, "embedding values"))

    @property
    def dim(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Embedding):
            return NotImplemented
        return (
            self.id == other.id
            and self.subject_id == other.subject_id
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True)
class SubjectMeta:
    """Gender and expression attributes for one subject id."""

    subject_id: str
    gender: str
    expression: str

    def __post_init__(self):
        if self.gender not in GENDERS:
            raise SchemaError(f"unknown gender {self.gender!r} for subject {self.subject_id!r}")
        if self.expression not in EXPRESSIONS:
            raise SchemaError(
                f"unknown expression {self.expression!r} for subject {self.subject_id!r}"
            )


def meta_table(metas: Iterable[SubjectMeta]) -> dict[str, SubjectMeta]:
    """Index metadata by subject id, rejecting duplicate entries."""
    table: dict[str, SubjectMeta] = {}
    for meta in metas:
        if meta.subject_id in table:
            raise SchemaError(f"duplicate metadata entry for subject {meta.subject_id!r}")
        table[meta.subject_id] = meta
    return table


@dataclass(frozen=True, eq=False)
class MorphCode:
    """Paired semantic and (flattened) stochastic latent of one image.

    ``stochastic_shape`` records the original tensor shape; its product must
    equal the flattened stochastic length. All components must be finite.
    """

    semantic: np.ndarray
    stochastic: np.ndarray
    stochastic_shape: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "semantic", _as_readonly_vector(self.semantic, "semantic latent"))
        object.__setattr__(
            self, "stochastic", _as_readonly_vector(self.stochastic, "stochastic latent")
        )
        shape = tuple(int(n) for n in self.stochastic_shape)
        object.__setattr__(self, "stochastic_shape", shape)
        if any(n <= 0 for n in shape):
            raise SchemaError(f"stochastic shape must be positive, got {shape}")
        if math.prod(shape) != self.stochastic.size:
            raise SchemaError(
                f"stochastic shape {shape} is inconsistent with flattened "
                f"length {self.stochastic.size}"
            )
        if not np.isfinite(self.semantic).all():
            raise NonFiniteValue("semantic latent contains non-finite components")
        if not np.isfinite(self.stochastic).all():
            raise NonFiniteValue("stochastic latent contains non-finite components")

    @property
    def semantic_dim(self) -> int:
        return int(self.semantic.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MorphCode):
            return NotImplemented
        return (
            self.stochastic_shape == other.stochastic_shape
            and np.array_equal(self.semantic, other.semantic)
            and np.array_equal(self.stochastic, other.stochastic)
        )


@dataclass(frozen=True)
class MorphPair:
    """Two source image ids selected for morphing, with weight and similarity."""

    source_a: str
    source_b: str
    lam: float = 0.5
    similarity: float = 0.0

    def __post_init__(self):
        if self.source_a == self.source_b:
            raise SchemaError(f"pair sources must differ, got {self.source_a!r} twice")
        if not 0.0 <= self.lam <= 1.0:
            raise LambdaOutOfRange(f"lambda must lie in [0, 1], got {self.lam}")


@dataclass(frozen=True)
class SubjectScores:
    """Probe scores of one contributing subject against one morph."""

    subject_id: str
    scores: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))


@dataclass(frozen=True)
class MatedMorph:
    """All contributing subjects' probe scores for one morph."""

    morph_id: str
    subjects: tuple[SubjectScores, ...]

    def __post_init__(self):
        object.__setattr__(self, "subjects", tuple(self.subjects))


@dataclass(frozen=True)
class MatedScoreSet:
    """Mated comparison scores: per morph, per contributing subject, per probe."""

    morphs: tuple[MatedMorph, ...]

    def __post_init__(self):
        object.__setattr__(self, "morphs", tuple(self.morphs))

    def validate(self) -> "MatedScoreSet":
        """Enforce structural invariants, raising SchemaError / NonFiniteValue."""
        if not self.morphs:
            raise SchemaError("mated score set contains no morphs")
        for morph in self.morphs:
            if len(morph.subjects) < 2:
                raise SchemaError(
                    f"morph {morph.morph_id!r} has {len(morph.subjects)} contributing "
                    "subjects, need at least 2"
                )
            for subject in morph.subjects:
                if not subject.scores:
                    raise SchemaError(
                        f"morph {morph.morph_id!r} subject {subject.subject_id!r} "
                        "has no probe scores"
                    )
                if not all(math.isfinite(s) for s in subject.scores):
                    raise NonFiniteValue(
                        f"non-finite score for morph {morph.morph_id!r} "
                        f"subject {subject.subject_id!r}"
                    )
        return self


@dataclass(frozen=True)
class NonMatedScoreSet:
    """Impostor similarity scores between unrelated subjects."""

    scores: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))

    def validate(self) -> "NonMatedScoreSet":
        if not self.scores:
            raise SchemaError("non-mated score set is empty")
        if not all(math.isfinite(s) for s in self.scores):
            raise NonFiniteValue("non-mated score set contains non-finite values")
        return self


@dataclass(frozen=True)
class MadScoreSet:
    """Detection scores for bona fide and attack samples.

    ``polarity`` declares the score convention explicitly; it is never
    inferred from the data.
    """

    bona_fide: tuple[float, ...]
    attack: tuple[float, ...]
    polarity: str = HIGHER_IS_ATTACK

    def __post_init__(self):
        object.__setattr__(self, "bona_fide", tuple(float(s) for s in self.bona_fide))
        object.__setattr__(self, "attack", tuple(float(s) for s in self.attack))
        if self.polarity not in POLARITIES:
            raise SchemaError(f"unknown score polarity {self.polarity!r}")

    def validate(self) -> "MadScoreSet":
        if not self.bona_fide:
            raise SchemaError("MAD score set has an empty bona fide list")
        if not self.attack:
            raise SchemaError("MAD score set has an empty attack list")
        for name, scores in (("bona fide", self.bona_fide), ("attack", self.attack)):
            if not all(math.isfinite(s) for s in scores):
                raise NonFiniteValue(f"MAD {name} scores contain non-finite values")
        return self


@dataclass(frozen=True)
class MetricCell:
    """One scalar metric value keyed by model, morph type and operating point.

    ``value`` must lie in [0, 1]; thresholds and achieved rates ride along as
    optional context. ``flags`` carries advisory markers such as
    ``polarity_warning`` (EER above 50%) or ``degenerate_threshold``.
    """

    model: str
    morph_type: str
    metric: str
    operating_point: str
    value: float
    threshold: float | None = None
    achieved_rate: float | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "flags", tuple(self.flags))
        if not math.isfinite(self.value):
            raise NonFiniteValue(f"metric value for {self.key()} is not finite")
        if not 0.0 <= self.value <= 1.0:
            raise SchemaError(f"metric value {self.value} for {self.key()} outside [0, 1]")

    def key(self) -> tuple[str, str, str, str]:
        return (self.model, self.morph_type, self.metric, self.operating_point)


@dataclass(frozen=True)
class Provenance:
    """Input digests, tool version and parameters embedded in every report."""

    inputs: tuple[tuple[str, str], ...] = ()
    tool: str = ""
    parameters: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple((str(n), str(d)) for n, d in self.inputs))
        object.__setattr__(
            self, "parameters", tuple((str(k), str(v)) for k, v in self.parameters)
        )


@dataclass(frozen=True)
class MetricsReport:
    """A structured grid of metric cells plus provenance.

    ``kind`` is "vulnerability" or "mad" and controls the text rendering.
    Cell keys (model, morph_type, metric, operating_point) must be unique.
    """

    kind: str
    cells: tuple[MetricCell, ...]
    provenance: Provenance = field(default_factory=Provenance)

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        seen = set()
        for cell in self.cells:
            key = cell.key()
            if key in seen:
                raise SchemaError(f"duplicate metric cell key {key}")
            seen.add(key)

    def cell(self, model: str, morph_type: str, metric: str, operating_point: str) -> MetricCell:
        for c in self.cells:
            if c.key() == (model, morph_type, metric, operating_point):
                return c
        raise KeyError((model, morph_type, metric, operating_point))


def validate_embedding_set(embeddings: Sequence[Embedding]) -> tuple[Embedding, ...]:
    """Check that a collection of embeddings is jointly usable.

    Returns the collection as a tuple iff all vectors share one dimension and
    every component is finite.

    Raises:
        SchemaError: empty collection.
        DimensionMismatch: mixed dimensions (message lists offending ids).
        NonFiniteValue: NaN/Inf components (message lists offending ids).
    """
    embeddings = tuple(embeddings)
    if not embeddings:
        raise SchemaError("embedding collection is empty")
    dim = embeddings[0].dim
    wrong_dim = [e.id for e in embeddings if e.dim != dim]
    if wrong_dim:
        raise DimensionMismatch(
            f"expected dimension {dim} for all embeddings, offending ids: "
            + ", ".join(wrong_dim)
        )
    non_finite = [e.id for e in embeddings if not np.isfinite(e.values).all()]
    if non_finite:
        raise NonFiniteValue(
            "embeddings with non-finite components: " + ", ".join(non_finite)
        )
    return embeddings
