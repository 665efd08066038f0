import math

import numpy as np
import pytest

from metrickernel.exceptions import InvalidInputError
from metrickernel.synth import RELATIONS, MethodConfig, SimulationSpec, estimate_power, generate


class TestGenerate:
    def test_quadratic(self):
        x, y = generate(SimulationSpec("quadratic", 100))
        assert x.shape == (100, 1)
        assert x[0, 0] == 0.01 and x[-1, 0] == 1.0
        assert np.array_equal(y, x * x)

    @pytest.mark.parametrize("relation", RELATIONS)
    def test_deterministic(self, relation):
        spec = SimulationSpec(relation, 40, noise=0.5, seed=3)
        a, b = generate(spec), generate(spec)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        c = generate(SimulationSpec(relation, 40, noise=0.5, seed=4))
        if relation != "quadratic":
            assert not np.array_equal(a[0], c[0])

    def test_noiseless_forms(self):
        x, y = generate(SimulationSpec("linear", 50, seed=1))
        assert np.array_equal(x, y) and np.all(np.abs(x) <= 1)
        x, y = generate(SimulationSpec("sine", 50, seed=1))
        assert np.allclose(y, np.sin(4 * np.pi * x))
        x, y = generate(SimulationSpec("spiral", 50, seed=1))
        u = np.hypot(x, y)
        assert np.all(u <= 5)

    def test_cloud_uncorrelated(self):
        small = 0
        for s in range(100):
            x, y = generate(SimulationSpec("cloud", 1000, seed=s))
            small += abs(np.corrcoef(x.ravel(), y.ravel())[0, 1]) < 0.2
        assert small >= 95

    @pytest.mark.parametrize("kwargs", [{"relation": "circle", "n": 10}, {"relation": "linear", "n": 1},
                                        {"relation": "linear", "n": 10, "noise": -1.0}])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidInputError):
            SimulationSpec(**kwargs)


class TestPower:
    def test_single_trial(self):
        rep = estimate_power(SimulationSpec("cloud", 20), MethodConfig(), trials=1, permutations=19)
        assert rep.power in (0.0, 1.0) and rep.monte_carlo_se == 0.0

    def test_report_fields(self):
        rep = estimate_power(SimulationSpec("linear", 30, noise=1.0), MethodConfig("gaussian"), trials=20,
                             permutations=49, seed=2)
        assert rep.power == rep.rejections / 20
        assert rep.monte_carlo_se == pytest.approx(math.sqrt(rep.power * (1 - rep.power) / 20))
        assert len(rep.p_values) == 20
        assert rep.method == "gaussian/biased"
        assert set(rep.to_dict()) == {"relation", "method", "alpha", "trials", "rejections", "power",
                                      "monte_carlo_se"}

    def test_thread_independent(self):
        spec = SimulationSpec("sine", 25, noise=1.0)
        a = estimate_power(spec, MethodConfig("l1", "unbiased"), trials=16, permutations=49, seed=8)
        b = estimate_power(spec, MethodConfig("l1", "unbiased"), trials=16, permutations=49, seed=8, threads=4)
        assert a == b

    def test_bijective_method_same_power(self):
        # the bijection leaves p-values unchanged, so power is identical
        spec = SimulationSpec("spiral", 25, noise=1.0)
        a = estimate_power(spec, MethodConfig("gaussian"), trials=15, permutations=49, seed=4)
        b = estimate_power(spec, MethodConfig("gaussian", transform="bijective"), trials=15, permutations=49, seed=4)
        assert a.p_values == b.p_values

    @pytest.mark.slow
    def test_monotone_in_noise(self):
        powers, ses = [], []
        for noise in (0.0, 0.5, 1.0, 2.0):
            rep = estimate_power(SimulationSpec("quadratic", 30, noise), MethodConfig(), trials=200,
                                 permutations=99, seed=1)
            powers.append(rep.power)
            ses.append(rep.monte_carlo_se)
        inversions = [i for i in range(3) if powers[i + 1] > powers[i]]
        assert len(inversions) <= 1
        for i in inversions:
            assert powers[i + 1] - powers[i] <= 2 * max(ses[i], ses[i + 1])

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            estimate_power(SimulationSpec("cloud", 10), trials=0)
        with pytest.raises(InvalidInputError):
            estimate_power(SimulationSpec("cloud", 10), alpha=1.0)
        with pytest.raises(InvalidInputError):
            MethodConfig("cosine")
