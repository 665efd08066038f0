from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metrickernel.exceptions import InvalidInputError, SampleTooSmallError
from metrickernel.matrices import Kind, PairwiseMatrix, distance_matrix, kernel_matrix, single_center
from metrickernel.stats import (
    PipelineConfig,
    StatVariant,
    biased_stat,
    compute_stat,
    corrected_offset,
    corrected_unbiased_hsic,
    normalized_stat,
    stat_pipeline,
    unbiased_remainder,
    unbiased_stat,
    variant_from_name,
)
from metrickernel.transforms import bijective, bijective_to_kernel, fixed_point_to_kernel

from oracles import abs_distance_fractions, biased_by_trace, unbiased_by_enumeration, unbiased_by_loops

D2 = PairwiseMatrix([[0, 3], [3, 0]], Kind.DISTANCE)


def pair(rng, n, p=2, q=1):
    return distance_matrix(rng.normal(size=(n, p))), distance_matrix(rng.normal(size=(n, q)))


class TestVariant:
    def test_corrected_excludes_biased(self):
        with pytest.raises(ValueError):
            StatVariant("hsic", biased=True, corrected=True)

    def test_names_roundtrip(self):
        for name in ("biased", "normalized", "unbiased", "normalized-unbiased", "corrected",
                     "normalized-corrected"):
            assert variant_from_name(name).name == name

    def test_unknown(self):
        with pytest.raises(InvalidInputError):
            compute_stat(D2, D2, "median")


class TestBiased:
    def test_2x2(self):
        s = biased_stat(D2, D2)
        assert s.value == 2.25
        assert s.variant.family == "dcov" and s.n == 2

    def test_constant_other(self, rng):
        d = distance_matrix(rng.normal(size=(6, 2)))
        assert biased_stat(d, PairwiseMatrix(np.ones((6, 6)), Kind.KERNEL)).value == pytest.approx(0, abs=1e-15)

    def test_matches_explicit_trace(self, rng):
        for n in (2, 5, 17):
            dx, dy = pair(rng, n)
            ref = biased_by_trace(dx.values, dy.values)
            assert biased_stat(dx, dy).value == pytest.approx(ref, rel=1e-12, abs=1e-15)

    def test_size_mismatch(self, rng):
        with pytest.raises(InvalidInputError):
            biased_stat(distance_matrix(rng.normal(size=(4, 1))), distance_matrix(rng.normal(size=(5, 1))))

    def test_family_tag(self, rng):
        x = rng.normal(size=(5, 1))
        assert biased_stat(kernel_matrix(x), kernel_matrix(x)).variant.family == "hsic"

    def test_exchange_symmetry(self, rng):
        dx, dy = pair(rng, 23)
        for v in ("biased", "normalized", "unbiased", "normalized-unbiased", "corrected"):
            assert compute_stat(dx, dy, v).value == compute_stat(dy, dx, v).value

    def test_self_nonnegative(self, rng):
        for _ in range(20):
            x = rng.normal(size=(rng.integers(2, 40), 3))
            for m in (distance_matrix(x), distance_matrix(x, "l1"), kernel_matrix(x),
                      kernel_matrix(x, "laplacian")):
                assert biased_stat(m, m).value >= -1e-12

    def test_convergence_sanity(self):
        vals = []
        for n in (50, 100, 200, 400):
            x = np.arange(1, n + 1) / n
            vals.append(biased_stat(distance_matrix(x), distance_matrix(x * x)).value)
        diffs = np.abs(np.diff(vals))
        assert np.all(np.diff(diffs) < 0)


class TestNormalized:
    def test_self_is_one(self, rng):
        d = distance_matrix(rng.normal(size=(12, 2)))
        assert normalized_stat(d, d).value == pytest.approx(1.0, abs=1e-12)
        assert normalized_stat(d, d, unbiased=True).value == pytest.approx(1.0, abs=1e-12)

    def test_constant_data_is_zero(self, rng):
        d = distance_matrix(rng.normal(size=(8, 1)))
        z = distance_matrix(np.zeros((8, 1)))
        assert normalized_stat(d, z).value == 0.0
        assert normalized_stat(d, z, unbiased=True).value == 0.0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(4, 30), st.integers(0, 2**32 - 1))
    def test_bounded(self, n, seed):
        g = np.random.default_rng(seed)
        dx, dy = pair(g, n)
        for unbiased in (False, True):
            v = normalized_stat(dx, dy, unbiased).value
            assert -1 - 1e-12 <= v <= 1 + 1e-12


class TestUnbiased:
    def test_oracle_validated_by_hand_n4(self):
        # both references evaluated in exact rational arithmetic
        a = abs_distance_fractions([0, 1, 2, 3])
        b = abs_distance_fractions([0, 2, 1, 3])
        assert unbiased_by_enumeration(a, b) == Fraction(-1, 3)
        assert unbiased_by_loops(a, b) == Fraction(-1, 3)
        dx = distance_matrix([0.0, 1, 2, 3])
        dy = distance_matrix([0.0, 2, 1, 3])
        assert unbiased_stat(dx, dy).value == pytest.approx(-1 / 3, abs=1e-15)

    def test_matches_enumeration_n6(self, rng):
        dx = distance_matrix(rng.normal(size=(6, 1)))
        dy = distance_matrix(rng.normal(size=(6, 1)))
        ref = unbiased_by_enumeration(dx.values.tolist(), dy.values.tolist())
        assert unbiased_stat(dx, dy).value == pytest.approx(ref, rel=1e-12)

    def test_constant_other_is_zero(self, rng):
        d = distance_matrix(rng.normal(size=(9, 2)))
        c = PairwiseMatrix(np.full((9, 9), 2.5), Kind.KERNEL)
        assert abs(unbiased_stat(d, c).value) <= 1e-13

    def test_too_small(self):
        d = distance_matrix([0.0, 1.0, 2.0])
        with pytest.raises(SampleTooSmallError):
            unbiased_stat(d, d)

    def test_n2_scaling(self, rng):
        dx, dy = pair(rng, 10)
        assert unbiased_stat(dx, dy, "n2").value == pytest.approx(unbiased_stat(dx, dy).value * 70 / 100, rel=1e-14)
        with pytest.raises(InvalidInputError):
            unbiased_stat(dx, dy, "n")

    def test_null_mean_is_zero(self):
        # 10,000 independent draws; the unbiased estimator must average to 0
        g = np.random.default_rng(7)
        n = 10
        vals = np.empty(10_000)
        for r in range(vals.size):
            x, y = g.normal(size=(n, 1)), g.normal(size=(n, 1))
            vals[r] = unbiased_stat(distance_matrix(x), distance_matrix(y)).value
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(vals.mean()) <= 3 * se
        biased = biased_stat(distance_matrix(g.normal(size=(n, 1))), distance_matrix(g.normal(size=(n, 1))))
        assert biased.value > 0


class TestDcovHsicEquivalence:
    def test_bijective_identity(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 50))
            dx, dy = pair(rng, n, 3, 2)
            kx, ky = bijective(dx)[0], bijective(dy)[0]
            for v in ("biased", "normalized"):
                a, b = compute_stat(dx, dy, v).value, compute_stat(kx, ky, v).value
                assert abs(a - b) <= 1e-12 * max(abs(a), 1e-300) or a == b

    def test_fixed_point_identity(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 50))
            dx, dy = pair(rng, n)
            z = int(rng.integers(n))
            kx, ky = fixed_point_to_kernel(dx, z)[0], fixed_point_to_kernel(dy, z)[0]
            a, b = biased_stat(dx, dy).value, biased_stat(kx, ky).value
            assert abs(a - b) <= 1e-12 * abs(a)

    def test_single_center_identities(self, rng):
        x = rng.normal(size=(12, 2))
        d = distance_matrix(x)
        kb, _ = bijective_to_kernel(d)
        kf, _ = fixed_point_to_kernel(d, 3)
        left = -single_center(d, "left").values
        assert np.abs(left - single_center(kb, "left").values).max() <= 1e-12
        assert np.abs(left - single_center(kf, "left").values).max() > 1e-6

    def test_single_center_equal_when_points_coincide(self):
        d = distance_matrix(np.zeros((5, 2)))
        kf, _ = fixed_point_to_kernel(d, 0)
        assert np.array_equal(-single_center(d, "left").values + 0.0, single_center(kf, "left").values + 0.0)


class TestUnbiasedCorrection:
    def test_corrected_equals_unbiased(self, rng):
        for _ in range(20):
            dx, dy = pair(rng, 10)
            ref = unbiased_stat(dx, dy).value
            assert abs(corrected_unbiased_hsic(dx, dy).value - ref) <= 1e-12 * abs(ref)

    def test_corrected_from_kernels(self, rng):
        x, y = rng.normal(size=(15, 2)), rng.normal(size=(15, 2))
        kx, ky = kernel_matrix(x), kernel_matrix(y)
        s = corrected_unbiased_hsic(kx, ky)
        assert s.variant.family == "dcov" and s.variant.corrected
        assert s.value == pytest.approx(unbiased_stat(kx, ky).value, rel=1e-12)

    def test_offset(self):
        assert corrected_offset(D2) == 3.0

    def test_remainder_closed_form(self, rng):
        for n in (4, 8, 33):
            dx, dy = pair(rng, n)
            gap = unbiased_stat(bijective(dx)[0], bijective(dy)[0]).value - unbiased_stat(dx, dy).value
            assert gap == pytest.approx(unbiased_remainder(dx, dy), rel=1e-9)

    def test_remainder_permutation_invariant(self, rng):
        dx, dy = pair(rng, 20)
        kx, ky = bijective(dx)[0], bijective(dy)[0]
        base = unbiased_stat(kx, ky).value - unbiased_stat(dx, dy).value
        for _ in range(10):
            p = rng.permutation(20)
            gap = unbiased_stat(kx, ky.permuted(p)).value - unbiased_stat(dx, dy.permuted(p)).value
            assert abs(gap - base) <= 1e-12

    def test_normalized_corrected(self, rng):
        dx, dy = pair(rng, 12)
        assert compute_stat(dx, dy, "normalized-corrected").value == pytest.approx(
            compute_stat(dx, dy, "normalized-unbiased").value, rel=1e-12)


class TestPipeline:
    def test_manual_composition(self, quadratic):
        x, y = quadratic
        s = stat_pipeline(x, y, PipelineConfig())
        assert s.value == biased_stat(distance_matrix(x), distance_matrix(y)).value

    def test_gaussian_bijective_metric_equals_hsic(self, quadratic):
        x, y = quadratic
        a = stat_pipeline(x, y, PipelineConfig(metric=None, kernel="gaussian", transform="bijective"))
        b = stat_pipeline(x, y, PipelineConfig(metric=None, kernel="gaussian"))
        assert a.variant.family == "dcov" and b.variant.family == "hsic"
        assert a.value == pytest.approx(b.value, rel=1e-12)

    def test_euclidean_bijective_normalized(self, quadratic):
        x, y = quadratic
        s = stat_pipeline(x, y, PipelineConfig(transform="bijective", variant="normalized"))
        assert s.variant.family == "hsic"
        assert s.value == pytest.approx(0.9667, abs=5e-4)
        assert s.value == pytest.approx(stat_pipeline(x, y, PipelineConfig(variant="normalized")).value, rel=1e-12)

    def test_lineage_recorded(self, quadratic):
        x, y = quadratic
        s = stat_pipeline(x, y, PipelineConfig(transform="bijective"))
        assert "bijective" in s.lineage

    @pytest.mark.parametrize("kwargs", [
        {"metric": None},
        {"metric": "euclidean", "kernel": "gaussian"},
        {"metric": "cosine"},
        {"transform": "fixed-point"},
        {"variant": "corrected", "transform": "bijective"},
        {"variant": "weird"},
    ])
    def test_invalid_config(self, kwargs):
        with pytest.raises(InvalidInputError):
            PipelineConfig(**kwargs)

    def test_size_mismatch(self):
        with pytest.raises(InvalidInputError):
            stat_pipeline(np.zeros((4, 1)), np.zeros((5, 1)), PipelineConfig())
