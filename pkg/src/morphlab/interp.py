"""Latent interpolation: Lerp for semantic codes, SLerp for stochastic codes.

Conventions: the weight multiplies the FIRST argument, so weight 1 returns
the first input and weight 0 the second, for both interpolants. SLerp is the
great-circle form sin(w*theta)/sin(theta) * x1 + sin((1-w)*theta)/sin(theta) * x2;
near-collinear inputs fall back to Lerp with the norm interpolated linearly,
and near-antipodal inputs are rejected because the interpolation path is
undefined there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MorphCode
from .errors import (
    AntipodalInputs,
    DimensionMismatch,
    InvalidParameter,
    LambdaOutOfRange,
    NonFiniteValue,
    ZeroVector,
)

DEFAULT_LAMBDA = 0.5
DEFAULT_COLLINEARITY_EPSILON = 1e-7


@dataclass(frozen=True)
class InterpolationParams:
    """Interpolation weight plus the angle below which SLerp degrades to Lerp."""

    lam: float = DEFAULT_LAMBDA
    collinearity_epsilon: float = DEFAULT_COLLINEARITY_EPSILON

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise LambdaOutOfRange(f"lambda must lie in [0, 1], got {self.lam}")
        if not 0.0 < self.collinearity_epsilon <= 0.1:
            raise InvalidParameter(
                f"collinearity epsilon must lie in (0, 0.1], got {self.collinearity_epsilon}"
            )


def _check_pair(x1, x2, lam: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x2, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"vector shapes differ: {a.shape} vs {b.shape}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise NonFiniteValue("interpolation inputs must be finite")
    if lam is not None and not 0.0 <= lam <= 1.0:
        raise LambdaOutOfRange(f"lambda must lie in [0, 1], got {lam}")
    return a, b


def lerp(z1, z2, lam: float) -> np.ndarray:
    """Linear interpolation lam * z1 + (1 - lam) * z2."""
    a, b = _check_pair(z1, z2, lam)
    # endpoints are returned verbatim so no rounding ever touches them
    if lam == 1.0:
        return a.copy()
    if lam == 0.0:
        return b.copy()
    return lam * a + (1.0 - lam) * b


def subtended_angle(x1, x2) -> float:
    """Angle in radians between two nonzero vectors, in [0, pi]."""
    a, b = _check_pair(x1, x2)
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("subtended angle is undefined for zero vectors")
    cos_theta = float(np.dot(a, b)) / (na * nb)
    return float(math.acos(min(1.0, max(-1.0, cos_theta))))


def slerp(x1, x2, lam: float, params: InterpolationParams = InterpolationParams()) -> np.ndarray:
    """Spherical linear interpolation between two nonzero vectors.

    Inputs within ``params.collinearity_epsilon`` of collinear fall back to
    Lerp renormalized to the linearly interpolated input norms; inputs within
    epsilon of antipodal raise AntipodalInputs.
    """
    a, b = _check_pair(x1, x2, lam)
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("slerp is undefined for zero vectors")
    theta = subtended_angle(a, b)
    if math.pi - theta < params.collinearity_epsilon:
        raise AntipodalInputs(
            f"inputs subtend {theta:.9f} rad, within epsilon of pi; "
            "interpolation direction is undefined"
        )
    if lam == 1.0:
        return a.copy()
    if lam == 0.0:
        return b.copy()
    if theta < params.collinearity_epsilon:
        # sin(theta) underflows here; the great-circle arc degenerates to the chord
        mixed = lam * a + (1.0 - lam) * b
        target_norm = lam * na + (1.0 - lam) * nb
        return mixed * (target_norm / float(np.linalg.norm(mixed)))
    sin_theta = math.sin(theta)
    return (math.sin(lam * theta) / sin_theta) * a + (math.sin((1.0 - lam) * theta) / sin_theta) * b


def compose_morph_code(
    code1: MorphCode, code2: MorphCode, params: InterpolationParams = InterpolationParams()
) -> MorphCode:
    """Blend two latent codes: Lerp on semantics, SLerp on flat stochastics."""
    if code1.semantic_dim != code2.semantic_dim:
        raise DimensionMismatch(
            f"semantic: dimensions differ, {code1.semantic_dim} vs {code2.semantic_dim}"
        )
    if code1.stochastic_shape != code2.stochastic_shape:
        raise DimensionMismatch(
            f"stochastic: shapes differ, {code1.stochastic_shape} vs {code2.stochastic_shape}"
        )
    semantic = lerp(code1.semantic, code2.semantic, params.lam)
    try:
        stochastic = slerp(code1.stochastic, code2.stochastic, params.lam, params)
    except AntipodalInputs as e:
        raise AntipodalInputs(f"stochastic: {e}") from None
    except ZeroVector as e:
        raise ZeroVector(f"stochastic: {e}") from None
    return MorphCode(semantic, stochastic, code1.stochastic_shape)
