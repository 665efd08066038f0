"""Distance covariance and HSIC statistics.

Both families share one formula and differ only in the matrix fed to it:

* biased:   ``trace(HMxH HMyH) / N^2``
* unbiased: ``trace(Cx Cy) / (N (N - 3))`` with U-centered ``C``
* normalized: either of the above divided by ``sqrt(S(x, x) S(y, y))``

A trace of a product of two symmetric matrices is evaluated as the entrywise
sum ``sum(A * B)``, never via a matrix product.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .exceptions import InvalidInputError, SampleTooSmallError
from .matrices import (
    Kind,
    PairwiseMatrix,
    as_data_matrix,
    distance_matrix,
    double_center,
    kernel_matrix,
    u_center,
    METRICS,
    KERNELS,
)
from .transforms import bijective, bijective_scaled, fixed_point_to_kernel, fixed_point_to_metric

__all__ = [
    "StatVariant",
    "StatValue",
    "VARIANTS",
    "variant_from_name",
    "biased_stat",
    "normalized_stat",
    "unbiased_stat",
    "corrected_unbiased_hsic",
    "corrected_offset",
    "unbiased_remainder",
    "compute_stat",
    "PipelineConfig",
    "build_matrix",
    "stat_pipeline",
]

# below this a self-statistic is treated as zero when normalizing
_TINY = 1e-300

VARIANTS = ("biased", "normalized", "unbiased", "normalized-unbiased", "corrected", "normalized-corrected")


def _family(kind: Kind) -> str:
    return "dcov" if kind is Kind.DISTANCE else "hsic"


@dataclass(frozen=True)
class StatVariant:
    family: Literal["dcov", "hsic"]
    biased: bool = True
    normalized: bool = False
    corrected: bool = False

    def __post_init__(self) -> None:
        if self.corrected and self.biased:
            raise InvalidInputError("the corrected statistic is an unbiased variant")

    @property
    def name(self) -> str:
        base = "biased" if self.biased else ("corrected" if self.corrected else "unbiased")
        if self.normalized:
            return "normalized" if self.biased else f"normalized-{base}"
        return base


def variant_from_name(name: str, family: str = "dcov") -> StatVariant:
    if name not in VARIANTS:
        raise InvalidInputError(f"unknown variant {name!r}; expected one of {VARIANTS}")
    return StatVariant(
        family=family,
        biased=name in ("biased", "normalized"),
        normalized=name.startswith("normalized"),
        corrected="corrected" in name,
    )


@dataclass(frozen=True)
class StatValue:
    value: float
    variant: StatVariant
    n: int
    lineage: str = field(default="", compare=False)

    def __float__(self) -> float:
        return self.value


def _check_pair(mx: PairwiseMatrix, my: PairwiseMatrix, min_n: int) -> int:
    if mx.n != my.n:
        raise InvalidInputError(f"matrices have different sizes: {mx.n} vs {my.n}")
    if mx.n < min_n:
        raise SampleTooSmallError(f"need N >= {min_n}, got N = {mx.n}")
    return mx.n


def _lineage(mx: PairwiseMatrix, my: PairwiseMatrix) -> str:
    return f"x: {mx.provenance or mx.kind.value}; y: {my.provenance or my.kind.value}"


def _family_of(mx: PairwiseMatrix, my: PairwiseMatrix) -> str:
    # mixed inputs are reported by the x side
    return _family(mx.kind)


def _trace(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(a * b))


def _normalize(sxy: float, sxx: float, syy: float) -> float:
    if sxx <= _TINY or syy <= _TINY:
        return 0.0
    return sxy / np.sqrt(sxx * syy)


def biased_stat(mx: PairwiseMatrix, my: PairwiseMatrix) -> StatValue:
    """Biased sample dCov / HSIC, ``trace(HMxH HMyH) / N^2``."""
    n = _check_pair(mx, my, 2)
    a = double_center(mx).values
    b = double_center(my).values
    return StatValue(_trace(a, b) / (n * n), StatVariant(_family_of(mx, my)), n, _lineage(mx, my))


def unbiased_stat(mx: PairwiseMatrix, my: PairwiseMatrix, scaling: str = "unbiased") -> StatValue:
    """Unbiased sample dCov / HSIC, ``trace(Cx Cy) / (N (N - 3))``.

    ``scaling="n2"`` divides the same trace by ``N^2`` instead. That form is
    not unbiased; it exists for comparison with tables that report it.
    """
    n = _check_pair(mx, my, 4)
    t = _trace(u_center(mx).values, u_center(my).values)
    if scaling == "unbiased":
        value = t / (n * (n - 3))
    elif scaling == "n2":
        value = t / (n * n)
    else:
        raise InvalidInputError(f"unknown scaling {scaling!r}")
    return StatValue(value, StatVariant(_family_of(mx, my), biased=False), n, _lineage(mx, my))


def normalized_stat(mx: PairwiseMatrix, my: PairwiseMatrix, unbiased: bool = False) -> StatValue:
    """Cauchy-Schwarz normalized statistic in [-1, 1].

    Returns 0 when either self-statistic is not positive (e.g. constant data).
    """
    f = unbiased_stat if unbiased else biased_stat
    sxy = f(mx, my)
    value = _normalize(sxy.value, f(mx, mx).value, f(my, my).value)
    variant = StatVariant(sxy.variant.family, biased=not unbiased, normalized=True)
    return StatValue(value, variant, sxy.n, sxy.lineage)


def corrected_offset(m: PairwiseMatrix) -> float:
    """Off-diagonal shift ``max / (N - 1)`` restoring exactness after the bijection."""
    return m.max_element / (m.n - 1)


def _corrected_ucenter(m: PairwiseMatrix) -> np.ndarray:
    # u_center(max - m) == -(u_center(m) + max/(N-1)) off the diagonal, so adding
    # the offset back gives -u_center(m) and the trace sign cancels in pairs
    induced, _ = bijective(m)
    c = u_center(induced).values + corrected_offset(m)
    np.fill_diagonal(c, 0.0)
    return c


def corrected_unbiased_hsic(d: PairwiseMatrix, other_d: PairwiseMatrix, normalized: bool = False) -> StatValue:
    """Unbiased statistic on bijective induced matrices with the exactness correction.

    Each input is mapped through the bijection, U-centered, and shifted by
    ``max / (N - 1)`` off the diagonal before taking the unbiased trace. The
    result equals :func:`unbiased_stat` on the original inputs. Given
    distances this yields an HSIC; given kernels, a dCov.
    """
    n = _check_pair(d, other_d, 4)
    cx = _corrected_ucenter(d)
    cy = _corrected_ucenter(other_d)
    value = _trace(cx, cy) / (n * (n - 3))
    if normalized:
        value = _normalize(value, _trace(cx, cx) / (n * (n - 3)), _trace(cy, cy) / (n * (n - 3)))
    variant = StatVariant(_family(d.kind.other), biased=False, normalized=normalized, corrected=True)
    return StatValue(value, variant, n, f"bijective of ({_lineage(d, other_d)})")


def unbiased_remainder(d: PairwiseMatrix, other_d: PairwiseMatrix) -> float:
    """Closed-form gap between the uncorrected induced statistic and the original.

    ``unbiased(bijective(d), bijective(e)) - unbiased(d, e)
    == max(d) * max(e) / ((N - 1)(N - 3))``; it does not depend on the order
    of the observations.
    """
    n = _check_pair(d, other_d, 4)
    return d.max_element * other_d.max_element / ((n - 1) * (n - 3))


def compute_stat(mx: PairwiseMatrix, my: PairwiseMatrix, variant: str | StatVariant = "biased") -> StatValue:
    """Dispatch on a variant name (see ``VARIANTS``) or a :class:`StatVariant`."""
    if isinstance(variant, StatVariant):
        variant = variant.name
    if variant == "biased":
        return biased_stat(mx, my)
    if variant == "normalized":
        return normalized_stat(mx, my)
    if variant == "unbiased":
        return unbiased_stat(mx, my)
    if variant == "normalized-unbiased":
        return normalized_stat(mx, my, unbiased=True)
    if variant == "corrected":
        return corrected_unbiased_hsic(mx, my)
    if variant == "normalized-corrected":
        return corrected_unbiased_hsic(mx, my, normalized=True)
    raise InvalidInputError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


@dataclass(frozen=True)
class PipelineConfig:
    """Declarative recipe: data -> pairwise matrix -> optional transform -> statistic.

    Exactly one of `metric` / `kernel` is set. `transform` is one of
    ``"none"``, ``"bijective"``, ``"bijective-scaled"``, ``"fixed-point"``;
    the fixed-point transform needs `anchor` when applied to distances.
    """

    metric: str | None = "euclidean"
    kernel: str | None = None
    bandwidth: float | str = "median"
    convention: str = "2sigma2"
    transform: str = "none"
    anchor: int | None = None
    variant: str = "biased"

    def __post_init__(self) -> None:
        if (self.metric is None) == (self.kernel is None):
            raise InvalidInputError("set exactly one of metric and kernel")
        if self.metric is not None and self.metric not in METRICS:
            raise InvalidInputError(f"unknown metric {self.metric!r}")
        if self.kernel is not None and self.kernel not in KERNELS:
            raise InvalidInputError(f"unknown kernel {self.kernel!r}")
        if self.transform not in ("none", "bijective", "bijective-scaled", "fixed-point"):
            raise InvalidInputError(f"unknown transform {self.transform!r}")
        if self.transform == "fixed-point" and self.metric is not None and self.anchor is None:
            raise InvalidInputError("the fixed-point kernel needs an anchor index")
        if self.variant not in VARIANTS:
            raise InvalidInputError(f"unknown variant {self.variant!r}")
        if "corrected" in self.variant and self.transform != "none":
            # the corrected statistic applies the bijection itself
            raise InvalidInputError("corrected variants take untransformed matrices")


def build_matrix(x, config: PipelineConfig) -> PairwiseMatrix:
    """The pairwise matrix `config` prescribes for one sample."""
    if config.metric is not None:
        m = distance_matrix(x, config.metric)
    else:
        m = kernel_matrix(x, config.kernel, config.bandwidth, config.convention)
    if config.transform == "bijective":
        m, _ = bijective(m)
    elif config.transform == "bijective-scaled":
        m, _ = bijective_scaled(m)
    elif config.transform == "fixed-point":
        if m.kind is Kind.DISTANCE:
            m, _ = fixed_point_to_kernel(m, config.anchor)
        else:
            m = fixed_point_to_metric(m)
    return m


def stat_pipeline(x, y, config: PipelineConfig) -> StatValue:
    x = as_data_matrix(x)
    y = as_data_matrix(y)
    if x.shape[0] != y.shape[0]:
        raise InvalidInputError(f"x and y have different sample sizes: {x.shape[0]} vs {y.shape[0]}")
    return compute_stat(build_matrix(x, config), build_matrix(y, config), config.variant)
