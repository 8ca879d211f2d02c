"""Error curves from regression data.

Features are ranked by greedy forward selection with ordinary least squares
(intercept always included), and the nested fits give ``V'(k)`` as the MSE,
``N log MSE`` or the Gaussian ``-2 log l_max``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, TextIO, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from .curve import RawCurve

CurveForm = Literal["neg2loglik", "n_log_mse", "mse"]

RANK_RTOL = 1e-10
_LOG_2PI_PLUS_1 = 1.0 + math.log(2.0 * math.pi)


class SingularFitError(ValueError):
    """Design matrix is rank deficient.

    ``column`` is the 0-based feature column that is (numerically) a linear
    combination of the intercept and the columns before it.
    """

    def __init__(self, message: str, column: Optional[int]):
        super().__init__(message)
        self.column = column


class DatasetError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    names: Tuple[str, ...]
    true_features: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise DatasetError(f"shape mismatch: X {X.shape}, y {y.shape}")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise DatasetError("dataset contains non-finite values")
        N, K = X.shape
        if K < 1:
            raise DatasetError("dataset has no features")
        if N <= K + 1:
            raise DatasetError(f"need N > K_full + 1 samples, got N={N}, K_full={K}")
        names = tuple(str(n) for n in self.names)
        if len(names) != K:
            raise DatasetError(f"{len(names)} names for {K} feature columns")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", names)

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def K_full(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray
    mse: float
    neg2loglik: float

    @property
    def intercept(self) -> float:
        return float(self.coefficients[0])


def neg2loglik_from_mse(mse: float, n: int) -> float:
    """Gaussian profile likelihood: ``N log(MSE) + N (1 + log 2 pi)``."""
    with np.errstate(divide="ignore"):
        return n * float(np.log(mse)) + n * _LOG_2PI_PLUS_1


def ols_fit(X_sub, y) -> FitResult:
    """Least squares with an intercept, solved through a QR factorization.

    Raises
    ------
    SingularFitError
        If the smallest singular value of the design falls below
        ``1e-10`` times the largest.
    """
    y = np.asarray(y, dtype=float)
    N = y.shape[0]
    X_sub = np.asarray(X_sub, dtype=float).reshape(N, -1)
    k = X_sub.shape[1]
    if N <= k + 1:
        raise DatasetError(f"need N > k + 1 samples, got N={N}, k={k}")
    A = np.column_stack([np.ones(N), X_sub])
    Q, R = np.linalg.qr(A)
    sv = np.linalg.svd(R, compute_uv=False)
    if sv[-1] <= RANK_RTOL * sv[0]:
        diag = np.abs(np.diag(R))
        small = np.flatnonzero(diag <= RANK_RTOL * sv[0])
        j = int(small[0]) if small.size else A.shape[1] - 1
        column = j - 1 if j >= 1 else None
        label = "intercept" if column is None else f"column {column}"
        raise SingularFitError(f"rank-deficient design at {label}", column)
    theta = solve_triangular(R, Q.T @ y)
    resid = y - A @ theta
    mse = float(resid @ resid) / N
    return FitResult(theta, mse, neg2loglik_from_mse(mse, N))


@dataclass(frozen=True)
class RankedFeatures:
    order: Tuple[int, ...]
    step_mse: np.ndarray
    singular: Tuple[int, ...] = field(default=())

    def names(self, data: Dataset) -> List[str]:
        return [data.names[j] for j in self.order]


def forward_rank(data: Dataset) -> RankedFeatures:
    """Greedy forward selection on in-sample MSE.

    Each step adds the feature whose refit gives the smallest MSE (lowest
    column index on exact ties). Features that make the design singular are
    skipped; once only such features remain they are appended in column
    order with an unchanged MSE and listed in ``singular``.
    """
    X, y = data.X, data.y
    remaining = list(range(data.K_full))
    chosen: List[int] = []
    singular: List[int] = []
    mse = [float(np.var(y))]
    while remaining:
        best_j, best_mse = None, math.inf
        for j in remaining:
            try:
                fit = ols_fit(X[:, chosen + [j]], y)
            except SingularFitError:
                continue
            if fit.mse < best_mse:
                best_j, best_mse = j, fit.mse
        if best_j is None:
            for j in remaining:
                chosen.append(j)
                singular.append(j)
                mse.append(mse[-1])
            break
        chosen.append(best_j)
        remaining.remove(best_j)
        # extra columns cannot raise the RSS; guard against rounding
        mse.append(min(best_mse, mse[-1]))
    step = np.asarray(mse)
    step.setflags(write=False)
    return RankedFeatures(tuple(chosen), step, tuple(singular))


def curve_from_dataset(data: Dataset, ranking: RankedFeatures, form: CurveForm = "mse") -> RawCurve:
    """Raw curve ``V'(k)`` over the nested models of ``ranking``."""
    if sorted(ranking.order) != list(range(data.K_full)):
        raise ValueError("ranking is not a permutation of the dataset's features")
    mse = np.asarray(ranking.step_mse, dtype=float)
    N = data.N
    if form == "mse":
        vals = mse
    elif form in ("n_log_mse", "neg2loglik"):
        if np.any(mse <= 0):
            raise ValueError(f"{form} curve undefined: a nested model fits exactly (MSE = 0)")
        vals = N * np.log(mse)
        if form == "neg2loglik":
            vals = vals + N * _LOG_2PI_PLUS_1
    else:
        raise ValueError(f"unknown curve form {form!r}")
    return RawCurve(vals, monotone="clamp")


def synth_regression(
    N: int,
    K_full: int,
    k_true: int,
    noise_sd: float,
    seed: int,
) -> Dataset:
    """Linear-Gaussian data with ``k_true`` relevant features.

    Features are i.i.d. standard normal from ``numpy.random.default_rng(seed)``.
    The relevant columns are placed at seeded random positions and all carry
    coefficient 1, so each explains the same share of the variance. The
    intercept is 0.5.
    """
    for name, v in (("N", N), ("K_full", K_full), ("k_true", k_true)):
        if isinstance(v, bool) or int(v) != v:
            raise ValueError(f"{name} must be an integer")
    if K_full < 1 or not 0 <= k_true <= K_full:
        raise ValueError(f"need K_full >= 1 and 0 <= k_true <= K_full, got {K_full}, {k_true}")
    if N <= K_full + 1:
        raise ValueError(f"need N > K_full + 1, got N={N}")
    if not noise_sd >= 0:
        raise ValueError("noise_sd must be non-negative")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((N, K_full))
    support = np.sort(rng.choice(K_full, size=k_true, replace=False))
    y = 0.5 + X[:, support].sum(axis=1) + noise_sd * rng.standard_normal(N)
    names = tuple(f"x{j + 1}" for j in range(K_full))
    return Dataset(X, y, names, tuple(int(j) for j in support))


# ---------------------------------------------------------------------------
# CSV  (feature columns, then a final ``target`` column)
# ---------------------------------------------------------------------------


def read_dataset_csv(fh: TextIO) -> Dataset:
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DatasetError("empty dataset file") from None
    if len(header) < 2 or header[-1].lower() != "target":
        raise DatasetError("dataset CSV needs feature columns followed by a 'target' column")
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DatasetError(f"line {line_no}: expected {len(header)} cells, got {len(row)}")
        try:
            cells = [float(c) for c in row]
        except ValueError:
            raise DatasetError(f"line {line_no}: missing or non-numeric cell") from None
        rows.append(cells)
    if not rows:
        raise DatasetError("dataset has no rows")
    arr = np.asarray(rows)
    return Dataset(arr[:, :-1], arr[:, -1], tuple(header[:-1]))


def write_dataset_csv(fh: TextIO, data: Dataset) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([*data.names, "target"])
    for xrow, t in zip(data.X, data.y):
        writer.writerow([repr(float(v)) for v in xrow] + [repr(float(t))])
