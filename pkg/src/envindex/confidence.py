"""Variable importance and confidence in a chosen model size.

``w_k = V(k-1) - V(k)`` is the drop credited to the k-th ranked component.
Cumulative importance ``CI(k) = 1 - V(k)/V(0)`` and its complement
``CU(k)`` describe how much of the total drop a truncated model keeps, and
``R_D = min(1, k_e / I_ENV)`` flags decisions smaller than the effective
number of variables. None of these care how ``k_e`` was obtained, so
externally chosen sizes can be scored the same way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .criteria import PenaltySpec, select
from .curve import ErrorCurve
from .env import compute_env

SCHEMA_VERSION = 1


class UndefinedMeasureError(ValueError):
    """The measure needs ``V(0) != 0`` (or ``I_ENV > 0``)."""


@dataclass(frozen=True)
class ImportanceProfile:
    w: np.ndarray
    w_bar: Optional[np.ndarray]

    @property
    def defined(self) -> bool:
        return self.w_bar is not None


def importance(curve: ErrorCurve) -> ImportanceProfile:
    """Raw and normalized importances for ``k = 1..K`` (index 0 is k=1)."""
    w = curve.values[:-1] - curve.values[1:]
    if curve.is_flat:
        return ImportanceProfile(w, None)
    return ImportanceProfile(w, w / curve.v0)


def _require_defined(curve: ErrorCurve):
    if curve.is_flat:
        raise UndefinedMeasureError("V(0) = 0: cumulative measures are undefined")


def _check_k(curve: ErrorCurve, k) -> int:
    if isinstance(k, bool) or int(k) != k or not 0 <= k <= curve.K:
        raise ValueError(f"k must be an integer in 0..{curve.K}, got {k!r}")
    return int(k)


def cu_profile(curve: ErrorCurve) -> np.ndarray:
    _require_defined(curve)
    return curve.values / curve.v0


def ci_profile(curve: ErrorCurve) -> np.ndarray:
    return 1.0 - cu_profile(curve)


def cumulative_uncertainty(curve: ErrorCurve, k: int) -> float:
    _require_defined(curve)
    return float(curve.values[_check_k(curve, k)] / curve.v0)


def cumulative_importance(curve: ErrorCurve, k: int) -> float:
    return 1.0 - cumulative_uncertainty(curve, k)


def reliability(k_e: int, i_env: float) -> float:
    """``min(1, k_e / i_env)``; zero for ``k_e = 0``."""
    if k_e < 0:
        raise ValueError("k_e must be non-negative")
    if not i_env > 0:
        raise UndefinedMeasureError("I_ENV = 0: no effective variables to compare against")
    return min(1.0, k_e / i_env)


@dataclass
class MethodEntry:
    name: str
    lam: Optional[float] = None
    k_e: Optional[int] = None
    ci_at_ke: Optional[float] = None
    ci_at_ke_minus_1: Optional[float] = None
    r_d: Optional[float] = None
    error: Optional[str] = None


@dataclass
class ExternalEntry:
    label: str
    k_e: int
    ci: Optional[float] = None
    r_d: Optional[float] = None
    error: Optional[str] = None


@dataclass
class ConfidenceReport:
    K: int
    v0: float
    a_hat: float
    i_env: float
    suggested_k: int
    methods: List[MethodEntry]
    external: List[ExternalEntry] = field(default_factory=list)
    ci: Optional[np.ndarray] = None
    cu: Optional[np.ndarray] = None
    w_bar: Optional[np.ndarray] = None

    def method(self, name: str) -> MethodEntry:
        for m in self.methods:
            if m.name == name:
                return m
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        def arr(a):
            return None if a is None else [float(x) for x in a]

        return {
            "schema": SCHEMA_VERSION,
            "curve": {"K": self.K, "v0": self.v0},
            "i_env": self.i_env,
            "suggested_k": self.suggested_k,
            "a_hat": self.a_hat,
            "methods": [
                {
                    "name": m.name,
                    "lambda": m.lam,
                    "k_e": m.k_e,
                    "ci_at_ke": m.ci_at_ke,
                    "ci_at_ke_minus_1": m.ci_at_ke_minus_1,
                    "r_d": m.r_d,
                    **({"error": m.error} if m.error else {}),
                }
                for m in self.methods
            ],
            "external": [
                {
                    "label": e.label,
                    "k_e": e.k_e,
                    "ci": e.ci,
                    "r_d": e.r_d,
                    **({"error": e.error} if e.error else {}),
                }
                for e in self.external
            ],
            "profiles": {"ci": arr(self.ci), "cu": arr(self.cu), "w_bar": arr(self.w_bar)},
        }


def build_report(
    curve: ErrorCurve,
    methods: Sequence[PenaltySpec],
    external: Iterable[Tuple[str, int]] = (),
) -> ConfidenceReport:
    """Run every method on ``curve`` and attach CI / R_D to each decision.

    CI is reported at the selected ``k_e`` and, as an auxiliary value, at
    ``k_e - 1``. A failing method records its error and does not stop the
    others. ``external`` takes ``(label, k_e)`` pairs from any other
    procedure.
    """
    env = compute_env(curve)
    flat = curve.is_flat
    undefined = "undefined-measure: V(0) = 0"
    ci = None if flat else ci_profile(curve)

    entries = []
    for spec in methods:
        entry = MethodEntry(name=spec.name)
        try:
            sel = select(curve, spec)
        except (ValueError, ArithmeticError) as exc:
            entry.error = str(exc)
            entries.append(entry)
            continue
        entry.lam, entry.k_e = sel.lam, sel.k_e
        if flat:
            entry.error = undefined
        else:
            entry.ci_at_ke = float(ci[sel.k_e])
            entry.ci_at_ke_minus_1 = float(ci[sel.k_e - 1]) if sel.k_e >= 1 else None
            entry.r_d = reliability(sel.k_e, env.i_env)
        entries.append(entry)

    ext_entries = []
    for label, k_e in external:
        e = ExternalEntry(label=str(label), k_e=int(k_e))
        if not 0 <= e.k_e <= curve.K:
            e.error = f"k_e={e.k_e} outside 0..{curve.K}"
        elif flat:
            e.error = undefined
        else:
            e.ci = float(ci[e.k_e])
            e.r_d = reliability(e.k_e, env.i_env)
        ext_entries.append(e)

    imp = importance(curve)
    return ConfidenceReport(
        K=curve.K,
        v0=curve.v0,
        a_hat=env.a_hat,
        i_env=env.i_env,
        suggested_k=env.suggested_k,
        methods=entries,
        external=ext_entries,
        ci=ci,
        cu=None if flat else cu_profile(curve),
        w_bar=imp.w_bar,
    )
