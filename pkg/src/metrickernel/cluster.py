"""Spectral clustering on induced kernel matrices.

The embedding follows the normalized-affinity recipe: ``L = D^-1/2 K D^-1/2``
with degree matrix D, the top-k eigenvectors of L stacked as columns, rows
scaled to unit length, then k-means. The k-means step uses seeded k-means++
initialization, 20 restarts, at most 300 Lloyd iterations and stops when the
inertia improves by less than a relative 1e-6; the lowest-inertia restart
wins, ties going to the earlier restart.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from sklearn.metrics import adjusted_rand_score

from . import rng
from .exceptions import DegenerateInputError, InvalidInputError
from .matrices import Kind, PairwiseMatrix, as_data_matrix, distance_matrix
from .transforms import bijective_to_kernel, fixed_point_to_kernel

__all__ = [
    "ClusterResult",
    "kmeans",
    "spectral_cluster",
    "leftmost_index",
    "TransformComparison",
    "compare_transform_clustering",
    "gaussian_mixture",
    "adjusted_rand_score",
]

N_RESTARTS = 20
MAX_ITER = 300
REL_TOL = 1e-6


@dataclass(frozen=True)
class ClusterResult:
    labels: np.ndarray
    k: int
    inertia: float
    eigengap: float
    empty_clusters: int = 0
    isolated: int = 0

    def to_dict(self) -> dict:
        return {
            "labels": self.labels.tolist(),
            "k": self.k,
            "inertia": self.inertia,
            "eigengap": self.eigengap,
            "empty_clusters": self.empty_clusters,
            "isolated": self.isolated,
        }


def _kmeanspp(x: np.ndarray, k: int, g: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = [x[g.integers(n)]]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(g.integers(n))
        else:
            idx = int(np.searchsorted(np.cumsum(d2), g.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers.append(x[idx])
        d2 = np.minimum(d2, np.sum((x - x[idx]) ** 2, axis=1))
    return np.array(centers)


def _assign(x: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, float]:
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, float(d2[np.arange(len(x)), labels].sum())


def _lloyd(x: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, float]:
    labels, inertia = _assign(x, centers)
    for _ in range(MAX_ITER):
        for c in range(len(centers)):
            members = x[labels == c]
            if len(members):
                centers[c] = members.mean(axis=0)
        new_labels, new_inertia = _assign(x, centers)
        done = inertia - new_inertia <= REL_TOL * inertia
        labels, inertia = new_labels, new_inertia
        if done:
            break
    return labels, inertia


def kmeans(x: np.ndarray, k: int, seed: int = 0, restarts: int = N_RESTARTS) -> tuple[np.ndarray, float]:
    """Best-of-`restarts` k-means; restart ``r`` draws from stream ``(seed, r)``."""
    x = np.asarray(x, dtype=np.float64)
    best_labels, best_inertia = None, np.inf
    for r in range(restarts):
        centers = _kmeanspp(x, k, rng.stream(seed, r))
        labels, inertia = _lloyd(x, centers)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels, best_inertia


def spectral_cluster(affinity: PairwiseMatrix, k: int, seed: int = 0, zero_degree: str = "error") -> ClusterResult:
    """Cluster the observations behind a non-negative affinity (kernel) matrix.

    Parameters
    ----------
    affinity : PairwiseMatrix
        Kernel matrix with non-negative entries.
    k : int
        Number of clusters, 1 <= k <= N.
    seed : int
        Seed for the k-means restarts.
    zero_degree : {"error", "isolate"}
        A row summing to zero has no defined normalization. ``"error"``
        raises; ``"isolate"`` gives it a zero embedding row, which k-means
        then treats like any other point.
    """
    a = affinity.values
    n = a.shape[0]
    if not 1 <= k <= n:
        raise InvalidInputError(f"k must lie in [1, {n}], got {k}")
    if np.any(a < 0):
        raise InvalidInputError("affinity has negative entries")
    deg = a.sum(axis=1)
    zero = deg <= 0
    if zero.any() and zero_degree == "error":
        raise DegenerateInputError(f"rows with zero degree: {np.flatnonzero(zero).tolist()}")
    inv_sqrt = np.zeros(n)
    inv_sqrt[~zero] = 1.0 / np.sqrt(deg[~zero])
    lap = inv_sqrt[:, None] * a * inv_sqrt[None, :]
    w, v = eigh(0.5 * (lap + lap.T))
    w, v = w[::-1], v[:, ::-1]
    eigengap = float(w[k - 1] - w[k]) if k < n else float(w[k - 1])
    if k == 1:
        return ClusterResult(np.zeros(n, dtype=int), 1, 0.0, eigengap, 0, int(zero.sum()))
    emb = v[:, :k]
    norms = np.linalg.norm(emb, axis=1)
    emb = np.divide(emb, norms[:, None], out=np.zeros_like(emb), where=norms[:, None] > 0)
    labels, inertia = kmeans(emb, k, seed)
    empty = k - len(np.unique(labels))
    return ClusterResult(labels.astype(int), k, inertia, eigengap, empty, int(zero.sum()))


def leftmost_index(x) -> int:
    """Index of the observation with the smallest first coordinate (first on ties)."""
    x = as_data_matrix(x)
    return int(np.argmin(x[:, 0]))


@dataclass(frozen=True)
class TransformComparison:
    bijective: ClusterResult
    fixed_point: ClusterResult
    anchor: int
    clamped: int
    ari_bijective: float | None = None
    ari_fixed_point: float | None = None

    def to_dict(self) -> dict:
        return {
            "anchor": self.anchor,
            "clamped_entries": self.clamped,
            "ari_bijective": self.ari_bijective,
            "ari_fixed_point": self.ari_fixed_point,
            "bijective": self.bijective.to_dict(),
            "fixed_point": self.fixed_point.to_dict(),
        }


def compare_transform_clustering(x, k: int, anchor: int | None = None, seed: int = 0,
                                 truth=None) -> TransformComparison:
    """Spectral clustering on the bijective vs the fixed-point kernel of Euclidean distances.

    The fixed point defaults to the leftmost observation. Its kernel row is
    identically zero, so it is clustered with ``zero_degree="isolate"``;
    negative fixed-point entries (impossible for a true metric, but possible
    for rounded inputs) are clamped to 0 and counted.
    """
    x = as_data_matrix(x)
    d = distance_matrix(x)
    if anchor is None:
        anchor = leftmost_index(x)
    kb, _ = bijective_to_kernel(d)
    kf, _ = fixed_point_to_kernel(d, anchor)
    negative = kf.values < 0
    clamped = int(negative.sum())
    if clamped:
        kf = PairwiseMatrix(np.where(negative, 0.0, kf.values), Kind.KERNEL, kf.provenance + " (clamped)")
    rb = spectral_cluster(kb, k, seed, zero_degree="isolate")
    rf = spectral_cluster(kf, k, seed, zero_degree="isolate")
    ari_b = ari_f = None
    if truth is not None:
        ari_b = float(adjusted_rand_score(truth, rb.labels))
        ari_f = float(adjusted_rand_score(truth, rf.labels))
    return TransformComparison(rb, rf, int(anchor), clamped, ari_b, ari_f)


MIXTURE_MEANS = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])


def gaussian_mixture(n: int, seed: int = 0, means: np.ndarray = MIXTURE_MEANS) -> tuple[np.ndarray, np.ndarray]:
    """Equal-weight 2-D Gaussian mixture with identity covariance; returns ``(points, component)``."""
    g = rng.stream(seed, 0)
    comp = g.integers(0, len(means), n)
    return means[comp] + g.standard_normal((n, means.shape[1])), comp
