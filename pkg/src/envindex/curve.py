"""Error curves over nested models.

A raw curve ``V'(0..K)`` is any non-increasing score sequence indexed by the
number of components ``k`` (unit step). Every selection rule in this package
consumes the normalized form ``V(k) = V'(k) - V'(K)``, which ends at zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Literal, NamedTuple, Optional, Sequence, TextIO

import numpy as np

MonotoneMode = Literal["strict", "clamp"]
IdealKind = Literal["single-step", "linear-full", "linear-to-kstar"]


class CurveValidationError(ValueError):
    """Raised when a sequence cannot be used as an error curve.

    ``index`` is the first offending position when one can be named.
    """

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class MonotoneCheck(NamedTuple):
    ok: bool
    index: Optional[int] = None


def default_tolerance(values) -> float:
    """Monotonicity slack used when none is given: ``1e-9 * max(max|v|, 1)``."""
    arr = np.asarray(values, dtype=float)
    scale = float(np.max(np.abs(arr))) if arr.size else 0.0
    return 1e-9 * max(scale, 1.0)


def validate_monotone(values, tol: float = 0.0) -> MonotoneCheck:
    """Check ``values[k+1] <= values[k] + tol`` for every ``k``.

    Returns a verdict rather than raising; on failure ``index`` is the
    smallest ``k`` whose successor rises above it.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need a 1-D sequence of length >= 2")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    bad = np.flatnonzero(arr[1:] > arr[:-1] + tol)
    if bad.size:
        return MonotoneCheck(False, int(bad[0]))
    return MonotoneCheck(True)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RawCurve:
    """User-supplied non-increasing scores ``V'(k)``, ``k = 0..K``.

    Parameters
    ----------
    values : array_like
        Finite scores, at least two of them.
    monotone : {"strict", "clamp"}
        ``strict`` rejects rises larger than ``tol``. ``clamp`` replaces the
        sequence by its running minimum instead.
    tol : float, optional
        Allowed rise between consecutive points. Defaults to
        :func:`default_tolerance`.
    """

    values: np.ndarray
    monotone: MonotoneMode = "strict"
    tol: Optional[float] = None

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise CurveValidationError("a curve needs K >= 1, i.e. at least two values")
        finite = np.isfinite(arr)
        if not finite.all():
            idx = int(np.flatnonzero(~finite)[0])
            raise CurveValidationError(f"non-finite value at k={idx}", idx)
        if self.monotone not in ("strict", "clamp"):
            raise ValueError(f"unknown monotone mode {self.monotone!r}")
        tol = default_tolerance(arr) if self.tol is None else float(self.tol)
        if self.monotone == "clamp":
            arr = np.minimum.accumulate(arr)
        else:
            check = validate_monotone(arr, tol)
            if not check.ok:
                k = check.index
                raise CurveValidationError(
                    f"curve is not non-increasing: V'({k + 1})={arr[k + 1]!r} > "
                    f"V'({k})={arr[k]!r} (tol={tol:g})",
                    k,
                )
        object.__setattr__(self, "values", _frozen(arr))
        object.__setattr__(self, "tol", tol)

    @property
    def K(self) -> int:
        return self.values.size - 1

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, RawCurve):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def prefix(self, K: int) -> "RawCurve":
        """The sub-curve ``V'(0..K)``."""
        if not 1 <= K <= self.K:
            raise ValueError(f"K={K} outside 1..{self.K}")
        return RawCurve(self.values[: K + 1], monotone="clamp")


@dataclass(frozen=True, eq=False)
class ErrorCurve:
    """Normalized curve: non-negative, non-increasing, ``V(K) == 0`` exactly.

    Validation here is exact (no tolerance); build one through
    :func:`normalize` when starting from arbitrary scores.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise CurveValidationError("a curve needs K >= 1, i.e. at least two values")
        if not np.isfinite(arr).all():
            idx = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise CurveValidationError(f"non-finite value at k={idx}", idx)
        if arr[-1] != 0.0:
            raise CurveValidationError(f"V(K) must be 0, got {arr[-1]!r}", arr.size - 1)
        check = validate_monotone(arr, 0.0)
        if not check.ok:
            raise CurveValidationError(
                f"curve is not non-increasing at k={check.index}", check.index
            )
        # monotone and V(K)=0 imply non-negative
        object.__setattr__(self, "values", _frozen(arr))

    @property
    def K(self) -> int:
        return self.values.size - 1

    @property
    def v0(self) -> float:
        return float(self.values[0])

    @property
    def is_flat(self) -> bool:
        """True for the all-zero curve (no component explains anything)."""
        return self.values[0] == 0.0

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, ErrorCurve):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def scaled(self, a: float) -> "ErrorCurve":
        if not a > 0:
            raise ValueError("scale factor must be positive")
        return ErrorCurve(self.values * a)


def normalize(raw) -> ErrorCurve:
    """Shift a raw curve so that its last value is zero.

    Accepts a :class:`RawCurve`, an :class:`ErrorCurve` (returned unchanged
    in value) or any sequence, which is validated strictly first.
    """
    if isinstance(raw, ErrorCurve):
        return ErrorCurve(raw.values)
    if not isinstance(raw, RawCurve):
        raw = RawCurve(raw)
    # absorbs rises the strict tolerance let through; identity on monotone input
    vals = np.minimum.accumulate(raw.values)
    return ErrorCurve(vals - vals[-1])


def synth_exponential(rate: float, K: int) -> ErrorCurve:
    """Normalized ``V'(k) = exp(-rate * k)`` for ``k = 0..K``."""
    if not (isinstance(rate, (int, float)) and math.isfinite(rate) and rate > 0):
        raise ValueError(f"rate must be a positive finite number, got {rate!r}")
    K = _check_K(K)
    return normalize(RawCurve(np.exp(-rate * np.arange(K + 1))))


def synth_ideal(kind: IdealKind, K: int, k_star: Optional[int] = None, v0: float = 1.0) -> ErrorCurve:
    """Piecewise-linear ideal curves.

    ``single-step`` drops all of ``v0`` at ``k=1``; ``linear-full`` falls on a
    straight line to ``(K, 0)``; ``linear-to-kstar`` falls linearly to
    ``(k_star, 0)`` and stays there.
    """
    K = _check_K(K)
    if not (math.isfinite(v0) and v0 > 0):
        raise ValueError("v0 must be positive")
    k = np.arange(K + 1, dtype=float)
    if kind == "single-step":
        end = 1
    elif kind == "linear-full":
        end = K
    elif kind == "linear-to-kstar":
        if k_star is None or not 1 <= int(k_star) <= K:
            raise ValueError(f"k_star must lie in 1..{K}, got {k_star!r}")
        end = int(k_star)
    else:
        raise ValueError(f"unknown ideal curve kind {kind!r}")
    # V(0) == v0 and V(end) == 0 exactly
    vals = v0 * (np.maximum(end - k, 0.0) / end)
    return ErrorCurve(vals)


def _check_K(K) -> int:
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K!r}")
    return int(K)


# ---------------------------------------------------------------------------
# CSV  (header ``k,v``; k = 0, 1, 2, ... without gaps)
# ---------------------------------------------------------------------------


def write_curve_csv(fh: TextIO, values: Iterable[float]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["k", "v"])
    for k, v in enumerate(values):
        writer.writerow([k, repr(float(v))])


def read_curve_csv(fh: TextIO) -> np.ndarray:
    """Parse a curve CSV and return the ``v`` column.

    Columns are located by name (``k`` and ``v``, case-insensitive); other
    columns are ignored so that plot exports can be read back.
    """
    reader = csv.reader(fh)
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise CurveValidationError("empty curve file") from None
    try:
        ik, iv = header.index("k"), header.index("v")
    except ValueError:
        raise CurveValidationError(f"curve CSV needs 'k' and 'v' columns, got {header}") from None
    values = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            k = int(row[ik])
            v = float(row[iv])
        except (ValueError, IndexError):
            raise CurveValidationError(f"line {line_no}: cannot parse k/v from {row}") from None
        expected = len(values)
        if k != expected:
            what = "duplicate" if k < expected else "gap before"
            raise CurveValidationError(f"line {line_no}: {what} k={k} (expected k={expected})", k)
        values.append(v)
    return np.asarray(values, dtype=float)


def as_error_curve(values: Sequence[float], monotone: MonotoneMode = "strict") -> ErrorCurve:
    return normalize(RawCurve(values, monotone=monotone))
