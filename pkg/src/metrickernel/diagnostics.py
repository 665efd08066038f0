"""Finite-sample property checks for distance and kernel matrices.

These certify only what one sample can show: negative type / positive
semidefiniteness via eigenvalues, and the structural properties (rank order,
translation invariance, invertibility) that separate the bijective from the
fixed-point transform. Population-level notions (strong negative type,
characteristic kernels) are not decidable from a sample and are not checked.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import eigh

from .matrices import PairwiseMatrix, double_center
from .transforms import TransformSpec, bijective, invert

__all__ = [
    "Property",
    "PropertyReport",
    "DEFAULT_TOL",
    "check_positive_definite",
    "check_negative_type",
    "check_induced_kernel_biconditional",
    "audit_rank_preservation",
    "audit_translation_invariance",
    "audit_bijectivity",
]

DEFAULT_TOL = 1e-8


class Property(str, Enum):
    NEGATIVE_TYPE = "negative_type"
    POSITIVE_DEFINITE = "positive_definite"
    RANK_PRESERVING = "rank_preserving"
    TRANSLATION_INVARIANT = "translation_invariant"
    BIJECTIVE = "bijective"


@dataclass(frozen=True)
class PropertyReport:
    property: Property
    holds: bool
    tolerance: float
    witness: dict | None = None
    details: dict | None = None

    def __post_init__(self) -> None:
        if not self.holds and self.witness is None:
            raise ValueError("a failing report needs a witness")

    def to_dict(self) -> dict:
        out = {"property": self.property.value, "holds": self.holds, "tolerance": self.tolerance,
               "witness": self.witness}
        if self.details:
            out["details"] = self.details
        return out


def _scale(a: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(a))))


def _eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # symmetrize away rounding asymmetry before the symmetric solver
    return eigh(0.5 * (a + a.T))


def check_positive_definite(k: PairwiseMatrix | np.ndarray, tol: float = DEFAULT_TOL) -> PropertyReport:
    """PSD check: smallest eigenvalue >= ``-tol * max(1, max|k|)``."""
    a = k.values if isinstance(k, PairwiseMatrix) else np.asarray(k, dtype=np.float64)
    w, _ = _eigh(a)
    bound = -tol * _scale(a)
    holds = bool(w[0] >= bound)
    witness = None if holds else {"eigenvalue": float(w[0]), "index": 0}
    return PropertyReport(Property.POSITIVE_DEFINITE, holds, tol, witness,
                          {"min_eigenvalue": float(w[0]), "max_eigenvalue": float(w[-1])})


def check_negative_type(d: PairwiseMatrix | np.ndarray, tol: float = DEFAULT_TOL) -> PropertyReport:
    """Negative type on the sample: ``H D H`` has no eigenvalue above ``tol * scale``.

    Zero-sum coefficient vectors are exactly the range of H, where ``D`` and
    ``H D H`` define the same quadratic form.
    """
    a = d.values if isinstance(d, PairwiseMatrix) else np.asarray(d, dtype=np.float64)
    w, v = _eigh(double_center(a).values)
    bound = tol * _scale(a)
    holds = bool(w[-1] <= bound)
    witness = None
    if not holds:
        witness = {"eigenvalue": float(w[-1]), "index": int(len(w) - 1), "eigenvector": v[:, -1].tolist()}
    return PropertyReport(Property.NEGATIVE_TYPE, holds, tol, witness,
                          {"max_eigenvalue": float(w[-1])})


def _psd_on_zero_sum(k: np.ndarray, tol: float) -> PropertyReport:
    w, v = _eigh(double_center(k).values)
    bound = -tol * _scale(k)
    holds = bool(w[0] >= bound)
    witness = None if holds else {"eigenvalue": float(w[0]), "index": 0, "eigenvector": v[:, 0].tolist()}
    return PropertyReport(Property.POSITIVE_DEFINITE, holds, tol, witness,
                          {"restricted_to": "zero-sum vectors", "min_eigenvalue": float(w[0])})


def check_induced_kernel_biconditional(d: PairwiseMatrix, tol: float = DEFAULT_TOL) -> PropertyReport:
    """Negative type of `d` against positive definiteness of ``max(d) - d``.

    Reports three checks: negative type of `d`, PSD of the induced kernel on
    zero-sum vectors, and PSD of the induced kernel on all vectors. ``holds``
    is true when the first two agree and, if `d` is of negative type, the
    induced kernel is PSD on all vectors as well.
    """
    neg = check_negative_type(d, tol)
    k, _ = bijective(d)
    restricted = _psd_on_zero_sum(k.values, tol)
    full = check_positive_definite(k, tol)
    agree = neg.holds == restricted.holds
    full_ok = full.holds if neg.holds else True
    holds = agree and full_ok
    witness = None
    if not holds:
        witness = {"negative_type": neg.holds, "psd_zero_sum": restricted.holds, "psd_all": full.holds}
    details = {
        "negative_type": neg.to_dict(),
        "kernel_psd_zero_sum": restricted.to_dict(),
        "kernel_psd_all": full.to_dict(),
    }
    return PropertyReport(Property.NEGATIVE_TYPE, holds, tol, witness, details)


def audit_rank_preservation(m: PairwiseMatrix, t: PairwiseMatrix, ulps: float = 4.0) -> PropertyReport:
    """Within every row, `t` must order entries exactly opposite to `m` (ties kept).

    Rounded subtraction is monotone, so a transform like ``max - m`` can turn
    two entries a few ulps apart into a tie but never invert them. Such a
    collapse is accepted when the entries of `m` differ by at most `ulps`
    units in the last place of the larger matrix scale; any inversion, any
    broken tie and any wider collapse is a violation.

    Witness: the first row ``i`` and column pair ``(s, t)`` in violation.
    """
    a, b = m.values, t.values
    if a.shape != b.shape:
        raise ValueError("matrices must have the same shape")
    slack = ulps * float(np.spacing(max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0))))
    for i in range(a.shape[0]):
        order = np.argsort(a[i], kind="stable")
        ra, rb = a[i, order], b[i, order]
        da, db = np.diff(ra), np.diff(rb)
        inverted = (da > 0) & (db > 0)
        collapsed = (da > slack) & (db == 0)
        broken_tie = (da == 0) & (db != 0)
        bad = np.flatnonzero(inverted | collapsed | broken_tie)
        if bad.size:
            j = int(bad[0])
            s, u = int(order[j]), int(order[j + 1])
            witness = {"row": i, "s": s, "t": u, "m": [float(a[i, s]), float(a[i, u])],
                       "transformed": [float(b[i, s]), float(b[i, u])]}
            return PropertyReport(Property.RANK_PRESERVING, False, slack, witness)
    return PropertyReport(Property.RANK_PRESERVING, True, slack)


def audit_translation_invariance(x, m: PairwiseMatrix, tol: float = 1e-12) -> PropertyReport:
    """Equal coordinate differences must give equal entries (1-D data).

    Pairs ``(i, j)`` are grouped by ``|x_i - x_j|``, gaps within ``1e-9`` of
    the largest gap counting as equal, and each group must hold one value up
    to ``tol * max(1, max|m|)``.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    a = m.values
    iu, ju = np.triu_indices(len(x), 1)
    gaps = np.abs(x[iu] - x[ju])
    order = np.argsort(gaps, kind="stable")
    gaps, iu, ju = gaps[order], iu[order], ju[order]
    gap_tol = 1e-9 * (gaps[-1] if gaps.size else 0.0)
    starts = np.flatnonzero(np.r_[True, np.diff(gaps) > gap_tol])
    ends = np.r_[starts[1:], len(gaps)]
    bound = tol * _scale(a)
    for lo, hi in zip(starts, ends):
        vals = a[iu[lo:hi], ju[lo:hi]]
        lo_k, hi_k = int(np.argmin(vals)), int(np.argmax(vals))
        if vals[hi_k] - vals[lo_k] > bound:
            witness = {
                "gap": float(gaps[lo]),
                "pairs": [[int(iu[lo + lo_k]), int(ju[lo + lo_k])], [int(iu[lo + hi_k]), int(ju[lo + hi_k])]],
                "values": [float(vals[lo_k]), float(vals[hi_k])],
            }
            return PropertyReport(Property.TRANSLATION_INVARIANT, False, tol, witness)
    return PropertyReport(Property.TRANSLATION_INVARIANT, True, tol)


def audit_bijectivity(m: PairwiseMatrix, transformed: PairwiseMatrix, spec: TransformSpec,
                      ulps: float = 0.0) -> PropertyReport:
    """Invert `transformed` with `spec` and compare to `m`.

    ``ulps=0`` demands a bit-exact match; otherwise entries may differ by up
    to that many units in the last place of the recorded maximum.
    """
    back = invert(transformed, spec)
    diff = np.abs(back.values - m.values)
    tol = ulps * float(np.spacing(spec.max_used)) if ulps else 0.0
    bad = np.argwhere(diff > tol)
    if bad.size:
        i, j = (int(v) for v in bad[0])
        witness = {"i": i, "j": j, "original": float(m.values[i, j]), "recovered": float(back.values[i, j]),
                   "mismatches": int(len(bad))}
        return PropertyReport(Property.BIJECTIVE, False, tol, witness)
    return PropertyReport(Property.BIJECTIVE, True, tol)
