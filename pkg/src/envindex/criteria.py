"""Linear-penalty model selection.

Every rule here minimizes ``C(k) = V(k) + lam * k`` over ``k = 0..K``. The
information criteria fix ``lam`` from the sample size; the universal
automatic elbow detector (UAED) uses ``lam = V(0) / K``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .curve import ErrorCurve

TIE_RTOL = 1e-12

PRESETS = ("AIC", "BIC", "HQIC", "UAED")


@dataclass(frozen=True)
class PenaltySpec:
    """A named penalty slope.

    ``lam`` is ``None`` only for UAED, whose slope depends on the curve and
    is bound by :meth:`resolve`.
    """

    name: str
    lam: Optional[float] = None
    n_data: Optional[int] = None

    def __post_init__(self):
        if self.name == "UAED":
            if self.lam is not None:
                raise ValueError("UAED derives its slope from the curve")
            return
        if self.lam is None or not math.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"{self.name}: penalty slope must be a non-negative number")

    @classmethod
    def aic(cls, n_data: Optional[int] = None) -> "PenaltySpec":
        return cls("AIC", 2.0, n_data)

    @classmethod
    def bic(cls, n_data: int) -> "PenaltySpec":
        n = _check_n(n_data, "BIC", 1)
        return cls("BIC", math.log(n), n)

    @classmethod
    def hqic(cls, n_data: int) -> "PenaltySpec":
        # log(log N) is positive only from N = 3 on
        n = _check_n(n_data, "HQIC", 3)
        return cls("HQIC", math.log(math.log(n)), n)

    @classmethod
    def uaed(cls) -> "PenaltySpec":
        return cls("UAED")

    @classmethod
    def custom(cls, lam: float, name: str = "custom") -> "PenaltySpec":
        return cls(name, float(lam))

    @classmethod
    def from_name(cls, name: str, n_data: Optional[int] = None) -> "PenaltySpec":
        """Build a preset by name (case-insensitive), or ``custom:<lam>``."""
        key = name.strip().upper()
        if key == "UAED":
            return cls.uaed()
        if key == "AIC":
            return cls.aic(n_data)
        if key in ("BIC", "HQIC"):
            if n_data is None:
                raise ValueError(f"{key} needs the number of data points N")
            return cls.bic(n_data) if key == "BIC" else cls.hqic(n_data)
        if key.startswith("CUSTOM:"):
            try:
                lam = float(name.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad custom penalty {name!r}") from None
            return cls.custom(lam, name=f"custom:{lam:g}")
        raise ValueError(f"unknown method {name!r}")

    def resolve(self, curve: ErrorCurve) -> float:
        if self.name == "UAED":
            return curve.v0 / curve.K
        return float(self.lam)


def _check_n(n, what, minimum) -> int:
    if n is None or isinstance(n, bool) or int(n) != n or n < minimum:
        raise ValueError(f"{what} needs an integer N >= {minimum}, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class SelectionResult:
    k_e: int
    cost_profile: np.ndarray = field(repr=False)
    ties: Tuple[int, ...]
    lam: float
    degenerate: bool = False


def cost_profile(curve: ErrorCurve, lam: float) -> np.ndarray:
    """``C(k) = V(k) + lam * k`` for ``k = 0..K``."""
    if not lam >= 0:
        raise ValueError(f"penalty slope must be non-negative, got {lam!r}")
    return curve.values + lam * np.arange(curve.K + 1)


def argmin_set(costs: np.ndarray, rtol: float = TIE_RTOL) -> Tuple[int, ...]:
    """Indices whose cost lies within ``rtol * max(1, |min|)`` of the minimum."""
    cmin = float(np.min(costs))
    cutoff = cmin + rtol * max(1.0, abs(cmin))
    return tuple(int(i) for i in np.flatnonzero(costs <= cutoff))


def select(curve: ErrorCurve, spec: PenaltySpec) -> SelectionResult:
    """Minimize the penalized cost; among tied minimizers keep the largest ``k``.

    For UAED on the all-zero curve there is nothing to detect and ``k_e = 0``
    is returned with ``degenerate=True``.
    """
    if spec.name == "UAED" and curve.is_flat:
        return SelectionResult(0, np.zeros(curve.K + 1), (0,), 0.0, degenerate=True)
    lam = spec.resolve(curve)
    costs = cost_profile(curve, lam)
    ties = argmin_set(costs)
    return SelectionResult(max(ties), costs, ties, lam)


def area_objective(curve: ErrorCurve, k: int) -> float:
    """Area under the two-segment approximation through ``(k, V(k))``.

    Sum of the triangle above the rectangle on ``[0, k]``, the rectangle
    itself, and the triangle on ``[k, K]``. Minimizing it over ``k`` is the
    geometric definition of the elbow.
    """
    K = curve.K
    if isinstance(k, bool) or int(k) != k or not 0 <= k <= K:
        raise ValueError(f"k must be an integer in 0..{K}, got {k!r}")
    k = int(k)
    v0 = curve.v0
    vk = float(curve.values[k])
    a1 = k * (v0 - vk) / 2.0
    a2 = k * vk
    a3 = (K - k) * vk / 2.0
    return a1 + a2 + a3


def uaed_elbow(curve: ErrorCurve) -> int:
    return select(curve, PenaltySpec.uaed()).k_e
