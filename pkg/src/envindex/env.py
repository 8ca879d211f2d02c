"""Effective number of variables (ENV).

The index compares the trapezoid area under ``V(k)`` with the area of the
ideal curve that loses everything in the first step (``V(0) / 2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .curve import ErrorCurve, RawCurve, normalize


@dataclass(frozen=True)
class EnvResult:
    a_hat: float
    i_env: float
    suggested_k: int
    a_ref_one: float


def trapezoid_area(curve: ErrorCurve) -> float:
    """Trapezoid rule on the unit grid, using ``V(K) = 0``.

    Accumulated with :func:`math.fsum` so long tails (K in the thousands)
    do not drift.
    """
    vals = curve.values
    return math.fsum([vals[0] / 2.0, *vals[1:-1]])


def env_index(curve: ErrorCurve) -> float:
    """``2 * area / V(0)``, or 0 for the all-zero curve.

    Never below 1 when ``V(0) > 0``. It is at most ``K`` for curves lying on
    or under the chord from ``(0, V(0))`` to ``(K, 0)`` (convex curves among
    them); a curve that holds ``V(0)`` until the last step reaches ``2K - 1``.
    """
    if curve.is_flat:
        return 0.0
    return 2.0 * trapezoid_area(curve) / curve.v0


def suggested_k(i_env: float) -> int:
    """Nearest integer to ``i_env``; halves go up."""
    if not i_env >= 0:
        raise ValueError(f"i_env must be non-negative, got {i_env!r}")
    return int(math.floor(i_env + 0.5))


def compute_env(curve: ErrorCurve) -> EnvResult:
    """Area, index and suggested model size; the suggestion is capped at ``K``."""
    i = env_index(curve)
    return EnvResult(
        a_hat=trapezoid_area(curve),
        i_env=i,
        suggested_k=min(suggested_k(i), curve.K),
        a_ref_one=curve.v0 / 2.0,
    )


def env_trace(raw: RawCurve, ks: Sequence[int]) -> List[Tuple[int, float]]:
    """ENV index of each truncated, renormalized prefix ``V'(0..K)``.

    Each prefix is shifted by its own last value, so the trace shows how the
    index settles as more components are considered.
    """
    if not isinstance(raw, RawCurve):
        raw = RawCurve(raw)
    ks = [int(k) for k in ks]
    if not ks:
        raise ValueError("ks must not be empty")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError(f"ks must be strictly ascending, got {ks}")
    if ks[0] < 1 or ks[-1] > raw.K:
        raise ValueError(f"every K must lie in 1..{raw.K}, got {ks}")
    return [(K, env_index(normalize(raw.prefix(K)))) for K in ks]
