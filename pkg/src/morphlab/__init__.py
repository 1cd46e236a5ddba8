"""morphlab: representation-level face-morph generation and evaluation toolkit.

Generates morph latents by semantic Lerp + stochastic SLerp through pluggable
encoder/decoder backends, quantifies face-recognition vulnerability
(MMPMR / FMMPMR at FMR-anchored thresholds) and morphing-attack
detectability (APCER / BPCER / EER per ISO/IEC 30107-3) from score files.
"""

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
    validate_embedding_set,
)
from .interp import InterpolationParams, compose_morph_code, lerp, slerp, subtended_angle
from .pairs import cosine_similarity, partition_by_metadata, select_top_pairs
from .vulnerability import OperatingPoint, fmr_threshold, fmmpmr, mmpmr, vulnerability_table
from .mad import (
    ApcerAtBpcer,
    DetOperatingCurve,
    EerResult,
    apcer,
    apcer_at_bpcer,
    bpcer,
    det_curve,
    eer,
)
from .backend import (
    BackendDescriptor,
    BackendJob,
    BackendRequest,
    ExternalBackend,
    MorphResult,
    ToyBackend,
    ToyWorld,
    resolve_backend,
    run_morph_pipeline,
    toy_decode,
    toy_encode,
    toy_sample_image,
)
from .report import mad_table, merge_reports, render_text

__version__ = "0.1.0"

__all__ = [
    "Embedding",
    "SubjectMeta",
    "MorphCode",
    "MorphPair",
    "MatedScoreSet",
    "MatedMorph",
    "SubjectScores",
    "NonMatedScoreSet",
    "MadScoreSet",
    "MetricsReport",
    "MetricCell",
    "Provenance",
    "validate_embedding_set",
    "InterpolationParams",
    "lerp",
    "slerp",
    "subtended_angle",
    "compose_morph_code",
    "cosine_similarity",
    "partition_by_metadata",
    "select_top_pairs",
    "OperatingPoint",
    "fmr_threshold",
    "mmpmr",
    "fmmpmr",
    "vulnerability_table",
    "apcer",
    "bpcer",
    "det_curve",
    "eer",
    "apcer_at_bpcer",
    "ApcerAtBpcer",
    "EerResult",
    "DetOperatingCurve",
    "BackendDescriptor",
    "BackendJob",
    "BackendRequest",
    "ToyWorld",
    "ToyBackend",
    "ExternalBackend",
    "MorphResult",
    "resolve_backend",
    "run_morph_pipeline",
    "toy_sample_image",
    "toy_encode",
    "toy_decode",
    "mad_table",
    "merge_reports",
    "render_text",
]
