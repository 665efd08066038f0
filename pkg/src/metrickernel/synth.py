"""Synthetic dependence structures and a Monte-Carlo power harness.

Relations (``eps`` are independent standard normals):

* quadratic: ``x_i = i/n`` (deterministic), ``y = x^2 + noise * eps``
* linear: ``x ~ U(-1, 1)``, ``y = x + noise * eps``
* sine: ``x ~ U(-1, 1)``, ``y = sin(4 pi x) + noise * eps``
* spiral: ``u ~ U(0, 5)``, ``x = u cos(pi u) + 0.4 noise eps1``,
  ``y = u sin(pi u) + 0.4 noise eps2``
* cloud: ``x``, ``y`` independent standard normals

These exact forms are this library's own; power numbers are comparable only
with other runs of this code.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .exceptions import InvalidInputError
from .matrices import PairwiseMatrix, distance_matrix, kernel_matrix
from .permutation import permutation_test
from .stats import VARIANTS
from .transforms import bijective

__all__ = ["RELATIONS", "SimulationSpec", "generate", "MethodConfig", "PowerReport", "estimate_power"]

RELATIONS = ("quadratic", "linear", "spiral", "sine", "cloud")


@dataclass(frozen=True)
class SimulationSpec:
    relation: str
    n: int
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.relation not in RELATIONS:
            raise InvalidInputError(f"unknown relation {self.relation!r}; expected one of {RELATIONS}")
        if self.n < 2:
            raise InvalidInputError("n must be at least 2")
        if not self.noise >= 0:
            raise InvalidInputError("noise must be non-negative")


def _draw(relation: str, n: int, noise: float, g: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    if relation == "quadratic":
        x = np.arange(1, n + 1) / n
        y = x * x
        if noise:
            y = y + noise * g.standard_normal(n)
    elif relation == "linear":
        x = g.uniform(-1, 1, n)
        y = x + noise * g.standard_normal(n)
    elif relation == "sine":
        x = g.uniform(-1, 1, n)
        y = np.sin(4 * np.pi * x) + noise * g.standard_normal(n)
    elif relation == "spiral":
        u = g.uniform(0, 5, n)
        e = g.standard_normal((2, n))
        x = u * np.cos(np.pi * u) + 0.4 * noise * e[0]
        y = u * np.sin(np.pi * u) + 0.4 * noise * e[1]
    else:
        x = g.standard_normal(n)
        y = g.standard_normal(n)
    return x[:, None], y[:, None]


def generate(spec: SimulationSpec, trial: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``(x, y)`` as (n, 1) arrays from the stream ``(spec.seed, trial)``."""
    return _draw(spec.relation, spec.n, spec.noise, rng.stream(spec.seed, trial))


@dataclass(frozen=True)
class MethodConfig:
    """How a test statistic is computed from raw samples.

    ``matrix`` is ``"euclidean"``, ``"l1"``, ``"gaussian"`` or
    ``"laplacian"``; with ``transform="bijective"`` the matrix is mapped
    through the bijection first (e.g. Gaussian kernel -> induced distance).
    """

    matrix: str = "euclidean"
    variant: str = "biased"
    transform: str = "none"
    bandwidth: float | str = "median"
    convention: str = "2sigma2"

    def __post_init__(self) -> None:
        if self.matrix not in ("euclidean", "l1", "gaussian", "laplacian"):
            raise InvalidInputError(f"unknown matrix {self.matrix!r}")
        if self.variant not in VARIANTS:
            raise InvalidInputError(f"unknown variant {self.variant!r}")
        if self.transform not in ("none", "bijective"):
            raise InvalidInputError(f"unknown transform {self.transform!r}")

    @property
    def label(self) -> str:
        t = "" if self.transform == "none" else f"+{self.transform}"
        return f"{self.matrix}{t}/{self.variant}"

    def matrices(self, x: np.ndarray) -> PairwiseMatrix:
        if self.matrix in ("euclidean", "l1"):
            m = distance_matrix(x, self.matrix)
        else:
            m = kernel_matrix(x, self.matrix, self.bandwidth, self.convention)
        if self.transform == "bijective":
            m, _ = bijective(m)
        return m


@dataclass(frozen=True)
class PowerReport:
    relation: str
    method: str
    alpha: float
    trials: int
    rejections: int
    power: float
    monte_carlo_se: float
    p_values: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "relation": self.relation,
            "method": self.method,
            "alpha": self.alpha,
            "trials": self.trials,
            "rejections": self.rejections,
            "power": self.power,
            "monte_carlo_se": self.monte_carlo_se,
        }


def estimate_power(spec: SimulationSpec, method: MethodConfig = MethodConfig(), alpha: float = 0.05,
                   trials: int = 1000, permutations: int = 1000, seed: int = 0, threads: int = 1) -> PowerReport:
    """Fraction of `trials` fresh datasets on which the permutation test rejects at `alpha`.

    Trial ``t`` draws its data from stream ``(derive_seed(seed, t, 0), 0)``
    and permutes with seed ``derive_seed(seed, t, 1)``; `spec.seed` is
    ignored in favour of `seed`.
    """
    if trials < 1:
        raise InvalidInputError("need at least one trial")
    if not 0 < alpha < 1:
        raise InvalidInputError("alpha must lie in (0, 1)")

    def one(t: int) -> float:
        x, y = _draw(spec.relation, spec.n, spec.noise, rng.stream(rng.derive_seed(seed, t, 0)))
        res = permutation_test(method.matrices(x), method.matrices(y), method.variant, permutations,
                               rng.derive_seed(seed, t, 1))
        return res.p_value

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pvals = list(pool.map(one, range(trials)))
    else:
        pvals = [one(t) for t in range(trials)]
    rejections = sum(p <= alpha for p in pvals)
    power = rejections / trials
    return PowerReport(spec.relation, method.label, alpha, trials, rejections, power,
                       math.sqrt(power * (1 - power) / trials), tuple(pvals))
