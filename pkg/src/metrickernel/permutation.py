"""Seeded permutation tests.

Replicate ``r`` relabels the y sample with the permutation drawn from the
counter-based stream ``(seed, r)`` (see :mod:`metrickernel.rng`). Since
centering commutes with relabeling, the centered y matrix is computed once
and only its rows/columns are permuted per replicate. Results do not depend
on the number of worker threads.

The p-value is ``(1 + #{r : T_r >= T_obs}) / (R + 1)``; ties count as
exceedances.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .exceptions import InvalidInputError
from .matrices import PairwiseMatrix, double_center, u_center
from .stats import (
    StatValue,
    _corrected_ucenter,
    _normalize,
    _trace,
    compute_stat,
    variant_from_name,
)
from .transforms import bijective, fixed_point_to_kernel

__all__ = ["TestResult", "permutation_test", "p_value", "EquivalenceReport", "pvalue_equivalence_check"]

DEFAULT_PERMUTATIONS = 1000
_CHUNK = 64


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # keep pytest from collecting this class

    observed: StatValue
    p_value: float
    permutations: int
    seed: int
    replicate_stats: np.ndarray | None = field(default=None, repr=False)
    exceedances: int = 0
    elapsed_ms: float = field(default=0.0, compare=False)

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "statistic": self.observed.value,
            "variant": self.observed.variant.name,
            "family": self.observed.variant.family,
            "p_value": self.p_value,
            "permutations": self.permutations,
            "seed": self.seed,
        }
        if timing:
            out["elapsed_ms"] = self.elapsed_ms
        return out


def p_value(observed: float, replicates: np.ndarray) -> float:
    replicates = np.asarray(replicates)
    return (1 + int(np.count_nonzero(replicates >= observed))) / (replicates.size + 1)


def _prepare(mx: PairwiseMatrix, my: PairwiseMatrix, variant: str):
    """Centered matrices plus the map from ``trace(A, B_perm)`` to the statistic."""
    n = mx.n
    if variant in ("biased", "normalized"):
        a, b = double_center(mx).values, double_center(my).values
        denom = n * n
    elif variant in ("unbiased", "normalized-unbiased"):
        a, b = u_center(mx).values, u_center(my).values
        denom = n * (n - 3)
    elif variant in ("corrected", "normalized-corrected"):
        a, b = _corrected_ucenter(mx), _corrected_ucenter(my)
        denom = n * (n - 3)
    else:
        raise InvalidInputError(f"unknown variant {variant!r}")

    if variant.startswith("normalized"):
        sxx, syy = _trace(a, a) / denom, _trace(b, b) / denom
        return a, b, lambda t: _normalize(t / denom, sxx, syy)
    return a, b, lambda t: t / denom


def permutation_test(mx: PairwiseMatrix, my: PairwiseMatrix, variant: str = "biased",
                     permutations: int = DEFAULT_PERMUTATIONS, seed: int = 0, threads: int = 1,
                     keep_replicates: bool = False) -> TestResult:
    """Permutation test of independence for any statistic variant.

    Parameters
    ----------
    mx, my : PairwiseMatrix
        Distance or kernel matrices of the x and y samples.
    variant : str
        One of :data:`metrickernel.stats.VARIANTS`.
    permutations : int
        Number of replicates R >= 1.
    seed : int
        64-bit seed; replicate r uses the permutation stream ``(seed, r)``.
    threads : int
        Worker threads; the result is identical for every value.
    keep_replicates : bool
        Store the R replicate statistics on the result.
    """
    if mx.n != my.n:
        raise InvalidInputError(f"matrices have different sizes: {mx.n} vs {my.n}")
    if permutations < 1:
        raise InvalidInputError("need at least one permutation")
    variant_from_name(variant)
    start = time.perf_counter()
    observed = compute_stat(mx, my, variant)
    a, b, finish = _prepare(mx, my, variant)
    n = mx.n

    def run(lo: int, hi: int) -> np.ndarray:
        out = np.empty(hi - lo)
        for k, r in enumerate(range(lo, hi)):
            p = rng.permutation(seed, r, n)
            out[k] = finish(_trace(a, b[np.ix_(p, p)]))
        return out

    bounds = [(lo, min(lo + _CHUNK, permutations)) for lo in range(0, permutations, _CHUNK)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda lh: run(*lh), bounds))
    else:
        parts = [run(lo, hi) for lo, hi in bounds]
    reps = np.concatenate(parts)

    count = int(np.count_nonzero(reps >= observed.value))
    return TestResult(
        observed=observed,
        p_value=(1 + count) / (permutations + 1),
        permutations=permutations,
        seed=seed,
        replicate_stats=reps if keep_replicates else None,
        exceedances=count,
        elapsed_ms=(time.perf_counter() - start) * 1e3,
    )


@dataclass
class EquivalenceReport:
    """P-values of paired distance/kernel tests run on one permutation stream.

    ``checks`` entries are required to agree; ``controls`` are reported only
    (the fixed-point unbiased HSIC is not expected to match).
    """

    checks: list[dict]
    controls: list[dict]

    @property
    def passed(self) -> bool:
        return all(c["identical"] for c in self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": self.checks, "controls": self.controls}


def pvalue_equivalence_check(dx: PairwiseMatrix, dy: PairwiseMatrix, permutations: int = 199, seed: int = 0,
                             anchor: int = 0, threads: int = 1) -> EquivalenceReport:
    """Compare p-values of dCov on `dx`, `dy` against HSIC on their bijective kernels."""
    kx, _ = bijective(dx)
    ky, _ = bijective(dy)
    variants = ["biased", "normalized"]
    if dx.n >= 4:
        variants += ["unbiased", "normalized-unbiased"]

    def entry(name, m1, m2, m3, m4, variant):
        t1 = permutation_test(m1, m2, variant, permutations, seed, threads)
        t2 = permutation_test(m3, m4, variant, permutations, seed, threads)
        return {
            "name": name,
            "variant": variant,
            "statistic_a": t1.observed.value,
            "statistic_b": t2.observed.value,
            "p_value_a": t1.p_value,
            "p_value_b": t2.p_value,
            "identical": t1.p_value == t2.p_value,
        }

    checks = [entry("dcov vs bijective hsic", dx, dy, kx, ky, v) for v in variants]
    controls = []
    if dx.n >= 4:
        fx, _ = fixed_point_to_kernel(dx, anchor)
        fy, _ = fixed_point_to_kernel(dy, anchor)
        controls.append(entry("dcov vs fixed-point hsic", dx, dy, fx, fy, "unbiased"))
    return EquivalenceReport(checks, controls)
