"""Morphing-attack-detection error rates: APCER, BPCER, DET curve, EER,
APCER at a fixed BPCER budget.

Classification rule under the ``higher_is_attack`` polarity: predict attack
iff score >= threshold (ties count as attack). The ``higher_is_bonafide``
polarity mirrors the rule (attack iff score <= threshold), so negating every
score and flipping the polarity flag leaves all metrics unchanged. Internally
all sweeps run in the higher-is-attack orientation; thresholds are mapped
back to the caller's score space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HIGHER_IS_ATTACK, MadScoreSet
from .errors import EmptyScoreSet, InvalidParameter, NonFiniteValue, SchemaError


@dataclass(frozen=True)
class DetPoint:
    threshold: float
    apcer: float
    bpcer: float


@dataclass(frozen=True)
class DetOperatingCurve:
    """APCER/BPCER at every distinct score threshold, plus a sentinel endpoint.

    Thresholds are strictly increasing in the caller's score space; apcer and
    bpcer move monotonically in opposite directions along the curve.
    """

    points: tuple[DetPoint, ...]
    polarity: str

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        thr = [p.threshold for p in self.points]
        if any(b <= a for a, b in zip(thr, thr[1:])):
            raise SchemaError("DET thresholds must be strictly increasing")
        for p in self.points:
            if not (0.0 <= p.apcer <= 1.0 and 0.0 <= p.bpcer <= 1.0):
                raise SchemaError(f"DET error rates outside [0, 1] at threshold {p.threshold}")
        apcers = [p.apcer for p in self.points]
        bpcers = [p.bpcer for p in self.points]
        increasing = all(b >= a for a, b in zip(apcers, apcers[1:]))
        decreasing = all(b <= a for a, b in zip(apcers, apcers[1:]))
        bp_increasing = all(b >= a for a, b in zip(bpcers, bpcers[1:]))
        bp_decreasing = all(b <= a for a, b in zip(bpcers, bpcers[1:]))
        if not ((increasing and bp_decreasing) or (decreasing and bp_increasing)):
            raise SchemaError("apcer and bpcer must be monotone in opposite directions")


@dataclass(frozen=True)
class EerResult:
    value: float
    threshold: float


@dataclass(frozen=True)
class ApcerAtBpcer:
    """APCER at the largest BPCER within budget.

    ``degenerate`` is set when only the all-bona-fide sentinel threshold met
    the budget, i.e. every attack is let through there.
    """

    apcer: float
    achieved_bpcer: float
    threshold: float
    degenerate: bool = False


def _canonical(scores: MadScoreSet) -> tuple[np.ndarray, np.ndarray, float]:
    bf = np.asarray(scores.bona_fide, dtype=np.float64)
    atk = np.asarray(scores.attack, dtype=np.float64)
    if bf.size == 0:
        raise EmptyScoreSet("MAD score set has no bona fide samples")
    if atk.size == 0:
        raise EmptyScoreSet("MAD score set has no attack samples")
    if not (np.isfinite(bf).all() and np.isfinite(atk).all()):
        raise NonFiniteValue("MAD scores contain non-finite values")
    sign = 1.0 if scores.polarity == HIGHER_IS_ATTACK else -1.0
    return np.sort(sign * bf), np.sort(sign * atk), sign


def _apcer_at(sorted_attack: np.ndarray, t: float) -> float:
    # attacks misclassified as bona fide: canonical score strictly below t
    return float(np.searchsorted(sorted_attack, t, side="left")) / sorted_attack.size


def _bpcer_at(sorted_bona_fide: np.ndarray, t: float) -> float:
    # bona fide misclassified as attack: canonical score at or above t
    n = sorted_bona_fide.size
    return float(n - np.searchsorted(sorted_bona_fide, t, side="left")) / n


def apcer(scores: MadScoreSet, threshold: float) -> float:
    """Proportion of attack samples classified as bona fide at the threshold."""
    bf, atk, sign = _canonical(scores)
    return _apcer_at(atk, sign * threshold)


def bpcer(scores: MadScoreSet, threshold: float) -> float:
    """Proportion of bona fide samples classified as attack at the threshold."""
    bf, atk, sign = _canonical(scores)
    return _bpcer_at(bf, sign * threshold)


def _canonical_thresholds(bf: np.ndarray, atk: np.ndarray) -> np.ndarray:
    observed = np.unique(np.concatenate([bf, atk]))
    sentinel = math.nextafter(float(observed[-1]), math.inf)
    return np.append(observed, sentinel)


def det_curve(scores: MadScoreSet) -> DetOperatingCurve:
    """Sweep every distinct observed score (plus a sentinel above the maximum)
    and record (threshold, apcer, bpcer); the endpoints reach (0, 1) and (1, 0).
    """
    bf, atk, sign = _canonical(scores)
    thresholds = _canonical_thresholds(bf, atk)
    points = [
        DetPoint(threshold=sign * t, apcer=_apcer_at(atk, t), bpcer=_bpcer_at(bf, t))
        for t in thresholds
    ]
    if sign < 0:
        points.reverse()
    return DetOperatingCurve(points=tuple(points), polarity=scores.polarity)


def eer(scores: MadScoreSet) -> EerResult:
    """Equal error rate: the crossing of APCER and BPCER.

    With step functions the exact crossing need not be attained, so this
    returns (apcer + bpcer) / 2 at the swept threshold minimizing
    |apcer - bpcer|; ties resolve to the smaller threshold in the
    higher-is-attack orientation.
    """
    bf, atk, sign = _canonical(scores)
    thresholds = _canonical_thresholds(bf, atk)
    best_idx, best_gap = 0, math.inf
    for i, t in enumerate(thresholds):
        gap = abs(_apcer_at(atk, t) - _bpcer_at(bf, t))
        if gap < best_gap:
            best_idx, best_gap = i, gap
    t = thresholds[best_idx]
    value = (_apcer_at(atk, t) + _bpcer_at(bf, t)) / 2.0
    return EerResult(value=value, threshold=sign * float(t))


def apcer_at_bpcer(scores: MadScoreSet, bpcer_target: float) -> ApcerAtBpcer:
    """APCER at the threshold whose BPCER is the largest still within budget.

    The feasible threshold with the largest BPCER <= target is the most
    permissive toward bona fide samples and therefore yields the smallest
    APCER within budget. When only the sentinel endpoint (everything
    classified bona fide) fits the budget, that endpoint is returned with the
    ``degenerate`` flag set.
    """
    if not 0.0 < bpcer_target < 1.0:
        raise InvalidParameter(f"bpcer target must lie in (0, 1), got {bpcer_target}")
    bf, atk, sign = _canonical(scores)
    thresholds = _canonical_thresholds(bf, atk)
    for i, t in enumerate(thresholds):
        achieved = _bpcer_at(bf, t)
        if achieved <= bpcer_target:
            return ApcerAtBpcer(
                apcer=_apcer_at(atk, t),
                achieved_bpcer=achieved,
                threshold=sign * float(t),
                degenerate=bool(i == len(thresholds) - 1),
            )
    raise AssertionError("unreachable: the sentinel threshold always has BPCER 0")
