"""Face-recognition vulnerability metrics: FMR-anchored thresholds, MMPMR, FMMPMR.

Scores are similarities (higher means more mated). A comparison matches only
when its score is STRICTLY above the decision threshold; ties fail. The
threshold for a target false match rate is the smallest candidate drawn from
the observed non-mated scores (plus one sentinel just above the maximum) whose
FMR, counted with >=, does not exceed the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import MatedScoreSet, MetricCell, MetricsReport, NonMatedScoreSet, Provenance
from .errors import EmptyScoreSet, InvalidParameter, KeyMismatch, NonFiniteValue, UnevenProbeCounts


@dataclass(frozen=True)
class OperatingPoint:
    """A derived decision threshold for one target false match rate."""

    fmr_target: float
    threshold: float
    achieved_fmr: float
    label: str


def operating_point_label(fmr_target: float) -> str:
    """Conventional label: FMR 1% -> MMPMR100, FMR 0.1% -> MMPMR1000."""
    inverse = 1.0 / fmr_target
    nearest = round(inverse)
    if nearest >= 1 and abs(inverse - nearest) <= 1e-6 * nearest:
        return f"MMPMR{nearest}"
    return f"FMR={fmr_target:.17g}"


def fmr_threshold(nonmated: NonMatedScoreSet, fmr_target: float) -> OperatingPoint:
    """Derive the decision threshold anchored at a target false match rate.

    Args:
      nonmated: impostor similarity scores.
      fmr_target: target FMR in (0, 1).

    Returns:
      OperatingPoint with the smallest threshold delta (drawn from the
      observed scores plus a sentinel just above their maximum) such that
      FMR(delta) = #(scores >= delta) / N <= fmr_target, and the FMR achieved
      there.
    """
    if not 0.0 < fmr_target < 1.0:
        raise InvalidParameter(f"fmr target must lie in (0, 1), got {fmr_target}")
    scores = np.asarray(nonmated.scores, dtype=np.float64)
    if scores.size == 0:
        raise EmptyScoreSet("cannot derive a threshold from an empty non-mated score set")
    if not np.isfinite(scores).all():
        raise NonFiniteValue("non-mated scores contain non-finite values")
    ordered = np.sort(scores)
    candidates = np.unique(ordered)
    candidates = np.append(candidates, math.nextafter(float(candidates[-1]), math.inf))
    label = operating_point_label(fmr_target)
    n = scores.size
    for delta in candidates:
        fmr = float(n - np.searchsorted(ordered, delta, side="left")) / n
        if fmr <= fmr_target:
            return OperatingPoint(fmr_target, float(delta), fmr, label)
    raise AssertionError("unreachable: the sentinel threshold always achieves FMR 0")


def _subject_score_matrix(mated: MatedScoreSet) -> list[list[tuple[float, ...]]]:
    if not mated.morphs:
        raise EmptyScoreSet("mated score set contains no morphs")
    out = []
    for morph in mated.morphs:
        if not morph.subjects:
            raise EmptyScoreSet(f"morph {morph.morph_id!r} has no subject scores")
        for subject in morph.subjects:
            if not subject.scores:
                raise EmptyScoreSet(
                    f"morph {morph.morph_id!r} subject {subject.subject_id!r} has no probes"
                )
            if not all(math.isfinite(s) for s in subject.scores):
                raise NonFiniteValue(
                    f"non-finite score for morph {morph.morph_id!r} "
                    f"subject {subject.subject_id!r}"
                )
        out.append([subject.scores for subject in morph.subjects])
    return out


def mmpmr(mated: MatedScoreSet, threshold: float) -> float:
    """Mated morph match rate: a morph counts iff EVERY contributing subject
    matches, where a subject matches when its best probe score is strictly
    above the threshold.
    """
    morphs = _subject_score_matrix(mated)
    hits = 0
    for subjects in morphs:
        if all(max(scores) > threshold for scores in subjects):
            hits += 1
    return hits / len(morphs)


def fmmpmr(mated: MatedScoreSet, threshold: float) -> float:
    """Attempt-level match rate: the fraction of probe attempts on which every
    contributing subject matches simultaneously.

    Requires one probe count shared by all subjects of all morphs (attempt p
    of one subject is paired with attempt p of the others); anything uneven
    raises UnevenProbeCounts rather than padding or truncating.
    """
    morphs = _subject_score_matrix(mated)
    counts = {len(scores) for subjects in morphs for scores in subjects}
    if len(counts) != 1:
        raise UnevenProbeCounts(
            f"probe counts must be identical for attempt-level matching, got {sorted(counts)}"
        )
    probes = counts.pop()
    hits = 0
    for subjects in morphs:
        for p in range(probes):
            if all(scores[p] > threshold for scores in subjects):
                hits += 1
    return hits / (len(morphs) * probes)


def vulnerability_table(
    mated_sets: Mapping[tuple[str, str], MatedScoreSet],
    nonmated_sets: Mapping[str, NonMatedScoreSet],
    fmr_targets: Sequence[float] = (0.01, 0.001),
    include_fmmpmr: bool = False,
    provenance: Provenance = Provenance(),
) -> MetricsReport:
    """Assemble the vulnerability grid: one MMPMR (optionally FMMPMR) cell per
    (FR model, morph type, operating point).

    ``mated_sets`` is keyed by (fr_model, morph_type); ``nonmated_sets`` by
    fr_model and supplies the threshold source per model. A mated key whose
    model has no non-mated scores raises KeyMismatch.
    """
    if not mated_sets:
        raise EmptyScoreSet("no mated score sets supplied")
    thresholds: dict[str, list[OperatingPoint]] = {}
    for model, _ in mated_sets:
        if model in thresholds:
            continue
        if model not in nonmated_sets:
            raise KeyMismatch(f"no non-mated scores for model {model!r}")
        thresholds[model] = [fmr_threshold(nonmated_sets[model], t) for t in fmr_targets]
    cells = []
    for (model, morph_type), mated in mated_sets.items():
        for point in thresholds[model]:
            cells.append(
                MetricCell(
                    model=model,
                    morph_type=morph_type,
                    metric="MMPMR",
                    operating_point=point.label,
                    value=mmpmr(mated, point.threshold),
                    threshold=point.threshold,
                    achieved_rate=point.achieved_fmr,
                )
            )
            if include_fmmpmr:
                cells.append(
                    MetricCell(
                        model=model,
                        morph_type=morph_type,
                        metric="FMMPMR",
                        operating_point=point.label,
                        value=fmmpmr(mated, point.threshold),
                        threshold=point.threshold,
                        achieved_rate=point.achieved_fmr,
                    )
                )
    return MetricsReport(kind="vulnerability", cells=tuple(cells), provenance=provenance)
