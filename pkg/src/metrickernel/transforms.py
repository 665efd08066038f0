"""Metric <-> kernel transformations.

Two families are provided:

* the bijective transform ``k = max(d) - d`` (and ``d = max(k) - k``), plus
  its scaled form ``1 - m / max(m)``;
* the fixed-point transform anchored at a sample observation ``z``:
  ``k(i, j) = d(i, z) + d(j, z) - d(i, j)`` and
  ``d(i, j) = k(i, i)/2 + k(j, j)/2 - k(i, j)``.

The bijective transform is invertible given the recorded maximum, preserves
within-row rank order (reversed) and keeps translation invariance. The
fixed-point kernel does none of these, but it agrees with the bijective
kernel after double centering.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DegenerateInputError, InvalidInputError
from .matrices import Kind, PairwiseMatrix

__all__ = [
    "TransformKind",
    "TransformSpec",
    "bijective",
    "bijective_to_kernel",
    "bijective_to_metric",
    "bijective_scaled",
    "fixed_point_to_kernel",
    "fixed_point_to_metric",
    "fixed_point_shift",
    "invert",
]

_OFF_DIAGONAL_MAX = "kernel maximum is not attained on a constant diagonal; induced distance has a non-zero diagonal"


class TransformKind(str, Enum):
    BIJECTIVE = "bijective"
    BIJECTIVE_SCALED = "bijective_scaled"
    FIXED_POINT = "fixed_point"


@dataclass(frozen=True)
class TransformSpec:
    """Record of a transform, sufficient to invert the bijective ones exactly."""

    kind: TransformKind
    source_kind: Kind
    max_used: float | None = None
    anchor: int | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "source_kind": self.source_kind.value,
            "max_used": self.max_used,
            "anchor": self.anchor,
        }


def _require(m: PairwiseMatrix, kind: Kind) -> None:
    if m.kind is not kind:
        raise InvalidInputError(f"expected a {kind.value} matrix, got {m.kind.value}")


def _check_anchor(m: PairwiseMatrix, anchor: int) -> int:
    if not isinstance(anchor, (int, np.integer)) or not 0 <= anchor < m.n:
        raise InvalidInputError(f"anchor index {anchor!r} out of range [0, {m.n - 1}]")
    return int(anchor)


def _flip(m: PairwiseMatrix, label: str) -> tuple[PairwiseMatrix, TransformSpec]:
    mx = m.max_element
    out = mx - m.values
    warning = None
    if m.kind is Kind.KERNEL and np.any(np.diag(out) != 0):
        warning = _OFF_DIAGONAL_MAX
    target = m.kind.other
    result = PairwiseMatrix(out, target, provenance=f"{label} {target.value} <- {m.provenance}", warning=warning)
    return result, TransformSpec(TransformKind.BIJECTIVE, m.kind, max_used=mx)


def bijective(m: PairwiseMatrix) -> tuple[PairwiseMatrix, TransformSpec]:
    """``max(m) - m``, flipping the matrix kind (distance <-> kernel)."""
    return _flip(m, "bijective")


def bijective_to_kernel(d: PairwiseMatrix) -> tuple[PairwiseMatrix, TransformSpec]:
    """Bijective induced kernel ``max(d) - d`` of a distance matrix."""
    _require(d, Kind.DISTANCE)
    return _flip(d, "bijective")


def bijective_to_metric(k: PairwiseMatrix) -> tuple[PairwiseMatrix, TransformSpec]:
    """Bijective induced distance ``max(k) - k`` of a kernel matrix.

    If the kernel maximum is not reached on every diagonal entry the result
    has a non-zero diagonal; it is still returned, with ``warning`` set.
    """
    _require(k, Kind.KERNEL)
    return _flip(k, "bijective")


def bijective_scaled(m: PairwiseMatrix) -> tuple[PairwiseMatrix, TransformSpec]:
    """Scaled bijection ``1 - m / max(m)``; entries land in [0, 1]."""
    mx = m.max_element
    if mx <= 0:
        raise DegenerateInputError("scaled bijection needs a positive maximum element; use the unscaled transform")
    out = 1.0 - m.values / mx
    warning = None
    if m.kind is Kind.KERNEL and np.any(np.diag(out) != 0):
        warning = _OFF_DIAGONAL_MAX
    target = m.kind.other
    result = PairwiseMatrix(out, target, provenance=f"scaled bijective {target.value} <- {m.provenance}",
                            warning=warning)
    return result, TransformSpec(TransformKind.BIJECTIVE_SCALED, m.kind, max_used=mx)


def fixed_point_to_kernel(d: PairwiseMatrix, anchor: int) -> tuple[PairwiseMatrix, TransformSpec]:
    """Fixed-point induced kernel ``d(i, z) + d(j, z) - d(i, j)``, z = observation `anchor`."""
    _require(d, Kind.DISTANCE)
    z = _check_anchor(d, anchor)
    col = d.values[:, z]
    out = (col[:, None] + col[None, :]) - d.values
    result = PairwiseMatrix(out, Kind.KERNEL, provenance=f"fixed-point(z={z}) kernel <- {d.provenance}")
    return result, TransformSpec(TransformKind.FIXED_POINT, Kind.DISTANCE, anchor=z)


def fixed_point_to_metric(k: PairwiseMatrix) -> PairwiseMatrix:
    """Fixed-point induced distance ``k(i, i)/2 + k(j, j)/2 - k(i, j)``."""
    _require(k, Kind.KERNEL)
    half = 0.5 * np.diag(k.values)
    out = (half[:, None] + half[None, :]) - k.values
    np.fill_diagonal(out, 0.0)
    warning = "kernel is not positive definite; induced distance has negative entries" if np.any(out < 0) else None
    return PairwiseMatrix(out, Kind.DISTANCE, provenance=f"fixed-point distance <- {k.provenance}", warning=warning)


def fixed_point_shift(d: PairwiseMatrix, anchor: int) -> np.ndarray:
    """Shift ``f_i = max(d)/2 - d(i, z)`` relating the two induced kernels.

    ``bijective_kernel[i, j] == fixed_point_kernel[i, j] + f[i] + f[j]``.
    """
    _require(d, Kind.DISTANCE)
    z = _check_anchor(d, anchor)
    return d.max_element / 2.0 - d.values[:, z]


def invert(m: PairwiseMatrix, spec: TransformSpec) -> PairwiseMatrix:
    """Undo a bijective transform using the recorded maximum."""
    if spec.kind is TransformKind.BIJECTIVE:
        out = spec.max_used - m.values
    elif spec.kind is TransformKind.BIJECTIVE_SCALED:
        out = (1.0 - m.values) * spec.max_used
    else:
        raise InvalidInputError("the fixed-point transform is not invertible")
    return PairwiseMatrix(out, spec.source_kind, provenance=f"inverse {spec.kind.value} <- {m.provenance}",
                          warning=m.warning)
