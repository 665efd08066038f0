"""Pairwise distance/kernel matrices and centering operators.

Everything downstream works on :class:`PairwiseMatrix` objects: a symmetric
N x N array tagged as a distance or a kernel matrix. Centering is always done
through row, column and grand means; the centering matrix ``H = I - J/N`` is
never formed explicitly.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .exceptions import (
    DegenerateInputError,
    InvalidInputError,
    SampleTooSmallError,
)

__all__ = [
    "Kind",
    "Centering",
    "PairwiseMatrix",
    "CenteredMatrix",
    "CsvParseError",
    "as_data_matrix",
    "distance_matrix",
    "kernel_matrix",
    "median_bandwidth",
    "double_center",
    "single_center",
    "u_center",
    "read_csv",
    "write_csv",
]

METRICS = ("euclidean", "l1")
KERNELS = ("gaussian", "laplacian")
GAUSSIAN_CONVENTIONS = ("2sigma2", "sigma2")


class Kind(str, Enum):
    DISTANCE = "distance"
    KERNEL = "kernel"

    @property
    def other(self) -> Kind:
        return Kind.KERNEL if self is Kind.DISTANCE else Kind.DISTANCE


class Centering(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    DOUBLE = "double"
    UCENTERED = "ucentered"


@dataclass(frozen=True, eq=False)
class PairwiseMatrix:
    """Symmetric N x N distance or kernel matrix.

    Parameters
    ----------
    values : (N, N) array_like
        Matrix entries. Must be finite and exactly symmetric.
    kind : Kind
        Whether the entries are distances or kernel values.
    provenance : str
        Free-form lineage, e.g. ``"bijective kernel <- euclidean"``.
    warning : str, optional
        Set when a distance matrix is produced with a non-zero diagonal or
        negative entries (e.g. inverting a kernel whose maximum is not on the
        diagonal). Without it such a distance matrix is rejected.
    """

    values: np.ndarray
    kind: Kind
    provenance: str = ""
    warning: str | None = None
    max_element: float = field(init=False)

    def __post_init__(self) -> None:
        a = np.array(self.values, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidInputError(f"pairwise matrix must be square and non-empty, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("pairwise matrix contains non-finite entries")
        if not np.array_equal(a, a.T):
            raise InvalidInputError("pairwise matrix is not exactly symmetric")
        kind = Kind(self.kind)
        if kind is Kind.DISTANCE and self.warning is None:
            if np.any(np.diag(a) != 0):
                raise InvalidInputError("distance matrix must have a zero diagonal")
            if np.any(a < 0):
                raise InvalidInputError("distance matrix has negative entries")
        a.flags.writeable = False
        object.__setattr__(self, "values", a)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "max_element", float(a.max()))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def permuted(self, perm: np.ndarray) -> PairwiseMatrix:
        """Relabel observations: entry (i, j) becomes ``values[perm[i], perm[j]]``."""
        perm = np.asarray(perm)
        return PairwiseMatrix(self.values[np.ix_(perm, perm)], self.kind, self.provenance, self.warning)


@dataclass(frozen=True, eq=False)
class CenteredMatrix:
    values: np.ndarray
    centering: Centering


class CsvParseError(InvalidInputError):
    def __init__(self, path, row: int, col: int, message: str):
        self.path, self.row, self.col = path, row, col
        super().__init__(f"{path}: row {row}, column {col}: {message}")


def as_data_matrix(x) -> np.ndarray:
    """Validate sample data and return it as an (N, p) float64 array.

    A 1-D input is read as N observations of a single variable.
    """
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidInputError(f"data must be an N x p matrix with N, p >= 1, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("data contains NaN or infinite entries")
    return a


def _condensed(x: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        return pdist(x, "euclidean")
    if metric == "l1":
        return pdist(x, "cityblock")
    raise InvalidInputError(f"unknown metric {metric!r}; expected one of {METRICS}")


def distance_matrix(x, metric: str = "euclidean") -> PairwiseMatrix:
    """Pairwise distance matrix of the rows of `x`.

    Each unordered pair is computed once and mirrored, so the result is
    exactly symmetric with a zero diagonal.
    """
    x = as_data_matrix(x)
    values = squareform(_condensed(x, metric), checks=False) if x.shape[0] > 1 else np.zeros((1, 1))
    return PairwiseMatrix(values, Kind.DISTANCE, provenance=metric)


def median_bandwidth(x) -> float:
    """Median of the N(N-1)/2 off-diagonal Euclidean distances.

    Duplicate points contribute their zero distances; an even-sized pool
    takes the mean of the two central values.
    """
    x = as_data_matrix(x)
    if x.shape[0] < 2:
        raise SampleTooSmallError("median bandwidth needs at least 2 observations")
    sigma = float(np.median(pdist(x, "euclidean")))
    if sigma <= 0:
        raise DegenerateInputError("median pairwise distance is 0; the median bandwidth is undefined")
    return sigma


def kernel_matrix(x, kernel: str = "gaussian", bandwidth: float | str = "median",
                  convention: str = "2sigma2") -> PairwiseMatrix:
    """Gaussian or Laplacian kernel matrix of the rows of `x`.

    Parameters
    ----------
    x : array_like
        (N, p) sample data.
    kernel : {"gaussian", "laplacian"}
        Gaussian: ``exp(-||xi - xj||^2 / (2 sigma^2))`` (or ``/ sigma^2`` with
        ``convention="sigma2"``). Laplacian: ``exp(-||xi - xj||_1 / sigma)``.
    bandwidth : float or "median"
        Explicit sigma > 0, or ``"median"`` for :func:`median_bandwidth`.
    convention : {"2sigma2", "sigma2"}
        Denominator of the Gaussian exponent. Ignored for the Laplacian.

    Returns
    -------
    PairwiseMatrix
        Kernel matrix with unit diagonal.
    """
    x = as_data_matrix(x)
    if isinstance(bandwidth, str):
        if bandwidth != "median":
            raise InvalidInputError(f"bandwidth must be a positive number or 'median', got {bandwidth!r}")
        sigma = median_bandwidth(x)
    else:
        sigma = float(bandwidth)
        if not np.isfinite(sigma) or sigma <= 0:
            raise InvalidInputError(f"bandwidth must be positive, got {bandwidth!r}")

    if kernel == "gaussian":
        if convention not in GAUSSIAN_CONVENTIONS:
            raise InvalidInputError(f"unknown gaussian convention {convention!r}")
        denom = 2.0 * sigma * sigma if convention == "2sigma2" else sigma * sigma
        cond = np.exp(-pdist(x, "sqeuclidean") / denom)
    elif kernel == "laplacian":
        cond = np.exp(-pdist(x, "cityblock") / sigma)
    else:
        raise InvalidInputError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")

    values = squareform(cond, checks=False) if x.shape[0] > 1 else np.zeros((1, 1))
    np.fill_diagonal(values, 1.0)
    return PairwiseMatrix(values, Kind.KERNEL, provenance=f"{kernel}(sigma={sigma!r})")


def _values(m) -> np.ndarray:
    return m.values if isinstance(m, (PairwiseMatrix, CenteredMatrix)) else np.asarray(m, dtype=np.float64)


def _grand_sum(row_sums: np.ndarray) -> float:
    # numpy reduces contiguous arrays pairwise, which keeps the N^2-term
    # grand sum accurate without an explicit compensated loop
    return float(np.sum(row_sums))


def double_center(m) -> CenteredMatrix:
    """``H M H`` via ``m_ij - rowmean_i - colmean_j + grandmean``."""
    a = _values(m)
    n = a.shape[0]
    row = a.sum(axis=1)
    col = a.sum(axis=0)
    grand = _grand_sum(row)
    out = a - row[:, None] / n - col[None, :] / n + grand / (n * n)
    return CenteredMatrix(out, Centering.DOUBLE)


def single_center(m, side: str | Centering = Centering.LEFT) -> CenteredMatrix:
    """One-sided centering: LEFT is ``H M`` (column means removed), RIGHT is ``M H``."""
    a = _values(m)
    side = Centering(side)
    if side is Centering.LEFT:
        return CenteredMatrix(a - a.mean(axis=0)[None, :], side)
    if side is Centering.RIGHT:
        return CenteredMatrix(a - a.mean(axis=1)[:, None], side)
    raise InvalidInputError(f"side must be left or right, got {side.value}")


def u_center(m) -> CenteredMatrix:
    """U-centering used by the unbiased estimators.

    Off-diagonal entries are ``m_ij - r_i/(N-2) - c_j/(N-2) + g/((N-1)(N-2))``
    with row sums ``r``, column sums ``c`` and grand sum ``g``; the diagonal is
    set to exactly zero.
    """
    a = _values(m)
    n = a.shape[0]
    if n < 4:
        raise SampleTooSmallError(f"U-centering needs N >= 4, got N = {n}")
    row = a.sum(axis=1)
    col = a.sum(axis=0)
    grand = _grand_sum(row)
    out = a - row[:, None] / (n - 2) - col[None, :] / (n - 2) + grand / ((n - 1) * (n - 2))
    np.fill_diagonal(out, 0.0)
    return CenteredMatrix(out, Centering.UCENTERED)


def read_csv(path, header: bool = False) -> np.ndarray:
    """Read a numeric CSV (rows = observations) into a 2-D float64 array.

    Parse failures raise :class:`CsvParseError` with the 1-based row and
    column of the offending cell.
    """
    path = Path(path)
    rows: list[list[float]] = []
    width = None
    with path.open(newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not record or all(not c.strip() for c in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise CsvParseError(path, lineno, min(len(record), width) + 1,
                                    f"expected {width} columns, found {len(record)}")
            parsed = []
            for colno, cell in enumerate(record, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise CsvParseError(path, lineno, colno, f"cannot parse {cell.strip()!r} as a number") from None
                if not np.isfinite(v):
                    raise CsvParseError(path, lineno, colno, f"non-finite value {cell.strip()!r}")
                parsed.append(v)
            rows.append(parsed)
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def write_csv(path, a: np.ndarray) -> None:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in a:
            w.writerow([repr(float(v)) for v in row])
