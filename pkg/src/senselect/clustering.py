"""(k,z)-clustering machinery: D^z seeding, Lloyd/medoid refinement, snapping,
assignment, and the cost functionals used by the samplers.

All tie-breaking is to the lowest index so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .core import Dataset, as_generator

#: relative cost improvement below which refinement stops
REFINE_TOL = 1e-9


@dataclass(frozen=True)
class CenterList:
    """Ordered list of centers; the order is the selection order, so any
    prefix is itself a candidate center set.  ``indices`` holds the dataset
    row of each center when centers are actual data points (seeded or
    snapped), else None."""

    positions: np.ndarray
    indices: np.ndarray | None = None

    def __post_init__(self):
        positions = np.atleast_2d(np.asarray(self.positions, dtype=np.float64))
        object.__setattr__(self, "positions", positions)
        if self.indices is not None:
            idx = np.asarray(self.indices, dtype=np.intp).reshape(-1)
            if idx.size != positions.shape[0]:
                raise ValueError("indices length must match number of centers")
            object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return self.positions.shape[0]

    def prefix(self, j: int) -> "CenterList":
        idx = None if self.indices is None else self.indices[:j]
        return CenterList(self.positions[:j], idx)


@dataclass(frozen=True)
class Clustering:
    """k centers plus the induced nearest-center partition and per-cluster
    costs; cluster_cost[i] is the power-z cost of cluster i about its own
    center."""

    centers: CenterList
    assignment: np.ndarray
    cluster_cost: np.ndarray
    z: float

    @property
    def k(self) -> int:
        return len(self.centers)

    @property
    def total_cost(self) -> float:
        return float(np.sum(self.cluster_cost))


def powered_distances(X: np.ndarray, C: np.ndarray, z: float) -> np.ndarray:
    """All-pairs ||x - c||^z, shape (len(X), len(C))."""
    return cdist(X, np.atleast_2d(C)) ** z


def assign(data: Dataset, centers: CenterList, z: float) -> Clustering:
    """Assign every point to its nearest center (ties to the lowest cluster
    id) and compute per-cluster costs."""
    D = powered_distances(data.rows, centers.positions, z)
    labels = np.argmin(D, axis=1)
    point_cost = D[np.arange(data.n), labels]
    cluster_cost = np.bincount(labels, weights=point_cost, minlength=len(centers))
    return Clustering(centers, labels, cluster_cost, float(z))


def cost(data: Dataset, centers: CenterList, z: float) -> float:
    """Total (k,z)-clustering cost of the given centers on the dataset."""
    if len(centers) == 0:
        raise ValueError("empty center list")
    D = powered_distances(data.rows, centers.positions, z)
    return float(np.sum(np.min(D, axis=1)))


def weighted_cost(clustering: Clustering, lam) -> float:
    """Per-cluster weighted cost: sum_i lam_i * cluster_cost[i]."""
    lam = np.asarray(lam, dtype=np.float64).reshape(-1)
    if lam.size != clustering.k:
        raise ValueError(f"lambda length {lam.size} != k {clustering.k}")
    if np.any(lam < 0):
        raise ValueError("lambda entries must be >= 0")
    return float(np.dot(lam, clustering.cluster_cost))


def dz_seed(data: Dataset, k: int, z: float, rng) -> CenterList:
    """D^z seeding: first center uniform, each next chosen with probability
    proportional to the current min-distance^z.  The output order is the
    selection order, which makes any prefix a usable center set."""
    if not 1 <= k <= data.n:
        raise ValueError(f"k={k} out of range for n={data.n}")
    g = as_generator(rng)
    X = data.rows
    chosen = [int(g.integers(data.n))]
    mind = powered_distances(X, X[chosen[-1]], z)[:, 0]
    for _ in range(k - 1):
        total = float(np.sum(mind))
        if total > 0:
            nxt = int(g.choice(data.n, p=mind / total))
        else:
            # every point already coincides with a center
            nxt = int(g.integers(data.n))
        chosen.append(nxt)
        mind = np.minimum(mind, powered_distances(X, X[nxt], z)[:, 0])
    return CenterList(X[chosen], np.asarray(chosen, dtype=np.intp))


def _medoid(points: np.ndarray) -> int:
    """Index (within `points`) of the point minimizing the sum of Euclidean
    distances to the others; ties to the lowest index."""
    sums = np.sum(cdist(points, points), axis=1)
    return int(np.argmin(sums))


def refine(data: Dataset, centers: CenterList, z: float,
           max_iters: int = 50) -> Clustering:
    """Lloyd-style alternation: assignment, then center update (cluster mean
    for z=2, in-cluster medoid for z=1).  Stops when the relative cost
    improvement drops below REFINE_TOL; the cost never increases.

    A cluster left empty by an update is reseeded at the point farthest (in
    distance^z) from the current centers, keeping k fixed.
    """
    if len(centers) == 0:
        raise ValueError("empty center list")
    if z not in (1, 2):
        raise ValueError(f"refinement supports z in {{1, 2}}, got {z}")
    X = data.rows
    current = assign(data, centers, z)
    prev_cost = current.total_cost
    for _ in range(max_iters):
        positions = current.centers.positions.copy()
        indices = (None if z != 1 else
                   np.empty(current.k, dtype=np.intp))
        D = powered_distances(X, positions, z)
        mind = np.min(D, axis=1)
        for i in range(current.k):
            members = np.flatnonzero(current.assignment == i)
            if members.size == 0:
                far = int(np.argmax(mind))
                positions[i] = X[far]
                mind = np.minimum(mind, powered_distances(X, X[far], z)[:, 0])
                if indices is not None:
                    indices[i] = far
                continue
            if z == 2:
                positions[i] = X[members].mean(axis=0)
            else:
                m = members[_medoid(X[members])]
                positions[i] = X[m]
                if indices is not None:
                    indices[i] = m
        updated = assign(data, CenterList(positions, indices), z)
        if updated.total_cost > prev_cost:
            break  # numerical safeguard; keep the previous clustering
        current = updated
        if prev_cost - updated.total_cost < REFINE_TOL * max(prev_cost, 1e-300):
            break
        prev_cost = updated.total_cost
    return current


def snap_centers(data: Dataset, clustering: Clustering) -> Clustering:
    """Replace each center with the nearest dataset row (ties to the lowest
    row index) and recompute assignment and costs.

    Centers are processed in order and each takes the nearest row not
    already claimed, so the snapped centers are k distinct rows and a
    selection run queries exactly k distinct losses.
    """
    D = cdist(data.rows, clustering.centers.positions)
    idx = np.empty(clustering.k, dtype=np.intp)
    taken = np.zeros(data.n, dtype=bool)
    for i in range(clustering.k):
        col = np.where(taken, np.inf, D[:, i])
        idx[i] = int(np.argmin(col))
        taken[idx[i]] = True
    snapped = CenterList(data.rows[idx], idx)
    return assign(data, snapped, clustering.z)


def kmedoids(data: Dataset, k: int, rng, max_iters: int = 50) -> Clustering:
    """z=1 clustering whose centers are dataset rows: D^1 seeding followed by
    alternating assignment and exact per-cluster medoid updates."""
    seeds = dz_seed(data, k, 1, rng)
    return refine(data, seeds, 1, max_iters=max_iters)
