"""Metric-space primitives on finite samples.

Hausdorff distance, Whitney size functions, delta-cardinality, shortest-path
gluing of local metrics and a generic metric-axiom checker.  Points are opaque
handles; every operation takes a distance oracle ``dist(p, q)`` and defaults to
the Euclidean distance on coordinate arrays.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable

import numpy as np
from scipy.sparse.csgraph import connected_components, csgraph_from_dense, dijkstra
from scipy.spatial.distance import cdist

from .errors import CapacityError, DomainError, PartitionError

Distance = Callable[[Any, Any], float]

MAX_EXACT_CARDINALITY = 20


def euclidean(p, q) -> float:
    return float(np.linalg.norm(np.subtract(p, q, dtype=float)))


@dataclass(frozen=True)
class FinitePointSet:
    """A finite sample of an ambient metric space."""

    points: tuple
    distance: Distance = euclidean

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]


def _point_set(A, dist: Distance | None) -> FinitePointSet:
    if isinstance(A, FinitePointSet):
        if dist is not None and dist is not A.distance:
            return FinitePointSet(A.points, dist)
        return A
    return FinitePointSet(tuple(A), dist or euclidean)


def _coords(points):
    try:
        arr = np.asarray(points, dtype=float)
    except (TypeError, ValueError):
        return None
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr if arr.ndim == 2 else None


def pairwise(A, B=None, dist: Distance | None = None) -> np.ndarray:
    """Distance matrix ``M[i, j] = dist(A[i], B[j])``."""
    A = _point_set(A, dist)
    B = A if B is None else _point_set(B, A.distance)
    if A.distance is euclidean:
        a, b = _coords(A.points), _coords(B.points)
        if a is not None and b is not None and a.shape[1] == b.shape[1]:
            return cdist(a, b)
    d = A.distance
    return np.array([[d(p, q) for q in B.points] for p in A.points], dtype=float).reshape(
        len(A), len(B)
    )


def hausdorff_distance(A, B, dist: Distance | None = None) -> float:
    """Two-sided sup-inf distance between non-empty finite sets."""
    A = _point_set(A, dist)
    B = _point_set(B, A.distance)
    if len(A) == 0 or len(B) == 0:
        raise DomainError("Hausdorff distance needs non-empty sets")
    M = pairwise(A, B)
    return float(max(M.min(axis=1).max(), M.min(axis=0).max()))


@dataclass(frozen=True)
class SizeFunctionSpec:
    """Reference points ``q_1..q_m`` with weights ``2**-i``.

    The true size function uses a dense sequence; truncating at depth ``m``
    keeps "zero iff singleton" only for sets separated by some reference.
    """

    refs: tuple
    distance: Distance = euclidean

    def __post_init__(self):
        object.__setattr__(self, "refs", tuple(self.refs))
        if not self.refs:
            raise DomainError("size function needs at least one reference point")
        M = pairwise(self.refs, dist=self.distance)
        np.fill_diagonal(M, np.inf)
        if np.any(M <= 0.0):
            raise DomainError("reference points must be pairwise distinct")

    @property
    def depth(self) -> int:
        return len(self.refs)

    @property
    def weights(self) -> np.ndarray:
        return 2.0 ** -np.arange(1, self.depth + 1)


def farthest_point_refs(sample, depth: int = 16, dist: Distance | None = None) -> SizeFunctionSpec:
    """Deterministic farthest-point sampling starting at ``sample[0]``.

    Stops early when the sample has fewer than ``depth`` distinct points.
    """
    S = _point_set(sample, dist)
    if len(S) == 0:
        raise DomainError("empty sample")
    M = pairwise(S)
    chosen = [0]
    nearest = M[0].copy()
    while len(chosen) < depth:
        i = int(np.argmax(nearest))
        if nearest[i] <= 0.0:
            break
        chosen.append(i)
        nearest = np.minimum(nearest, M[i])
    return SizeFunctionSpec(tuple(S[i] for i in chosen), S.distance)


def whitney_size(A, spec: SizeFunctionSpec) -> float:
    """Truncated Whitney size ``sum_i 2**-i (max_A d(q_i,.) - min_A d(q_i,.))``."""
    A = _point_set(A, spec.distance)
    if len(A) == 0:
        raise DomainError("size of the empty set is undefined")
    M = pairwise(spec.refs, A.points, dist=spec.distance)
    spread = M.max(axis=1) - M.min(axis=1)
    return float(np.dot(spec.weights, spread))


def delta_cardinality(A, delta: float, dist: Distance | None = None) -> int:
    """Largest subset of ``A`` whose pairwise distances are all strictly above ``delta``."""
    A = _point_set(A, dist)
    n = len(A)
    if n == 0:
        raise DomainError("empty set")
    if delta <= 0:
        raise DomainError("delta must be positive")
    if n > MAX_EXACT_CARDINALITY:
        raise CapacityError(f"exact search supports at most {MAX_EXACT_CARDINALITY} points, got {n}")
    M = pairwise(A)
    # ties at exactly delta are not separated
    conflict = [sum(1 << j for j in range(n) if j != i and M[i, j] <= delta) for i in range(n)]

    @lru_cache(maxsize=None)
    def best(mask: int) -> int:
        if mask == 0:
            return 0
        v = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << v)
        take = 1 + best(rest & ~conflict[v])
        if conflict[v] & rest == 0:
            return take
        return max(take, best(rest))

    return best((1 << n) - 1)


@dataclass(frozen=True)
class LocalMetric:
    """Family ``D_x(y, z)`` defined for ``y, z`` within ``radius`` of ``x``."""

    evaluator: Callable[[Any, Any, Any], float]
    radius: float
    distance: Distance = euclidean

    def __call__(self, x, y, z) -> float:
        r = self.radius
        if self.distance(x, y) > r or self.distance(x, z) > r:
            raise DomainError("local metric evaluated outside its radius")
        return float(self.evaluator(x, y, z))

    def minimizing_violations(self, sample, tol: float = 1e-12) -> list[tuple[int, int, int]]:
        """Triples ``(i, j, k)`` with ``D_{x_i}(x_i, x_j) > D_{x_k}(x_i, x_j) + tol``."""
        S = _point_set(sample, self.distance)
        M = pairwise(S)
        r = self.radius
        bad = []
        for i, j in zip(*np.nonzero(M < r)):
            if i == j:
                continue
            base = self.evaluator(S[i], S[i], S[j])
            for k in np.nonzero((M[i] < r) & (M[j] < r))[0]:
                if base > self.evaluator(S[k], S[i], S[j]) + tol:
                    bad.append((int(i), int(j), int(k)))
        return bad


def glue_local_metric(sample, delta: float, local: LocalMetric | Callable, dist: Distance | None = None):
    """All-pairs infimum over delta-chains of ``sum D_{a_i}(a_i, a_{i+1})``.

    ``local`` is called as ``local(base, y, z)``.  Raises PartitionError when
    the delta-chain graph of the sample is disconnected.
    """
    if dist is None and isinstance(local, LocalMetric):
        dist = local.distance
    S = _point_set(sample, dist)
    n = len(S)
    M = pairwise(S)
    W = np.full((n, n), np.inf)
    for i, j in zip(*np.nonzero(M <= delta)):
        if i != j:
            W[i, j] = local(S[i], S[i], S[j])
    graph = csgraph_from_dense(W, null_value=np.inf)
    ncomp, labels = connected_components(graph, directed=True, connection="weak")
    if ncomp > 1:
        comps = [np.nonzero(labels == c)[0].tolist() for c in range(ncomp)]
        raise PartitionError(
            f"delta-chain graph has {ncomp} components: "
            + "; ".join(str(c[:10]) + ("..." if len(c) > 10 else "") for c in comps),
            comps,
        )
    rho = dijkstra(graph, directed=True)
    return _min_plus_closure(rho)


def _min_plus_closure(rho: np.ndarray) -> np.ndarray:
    # shortest paths satisfy the triangle inequality in exact arithmetic only;
    # relaxing through every midpoint until nothing moves makes it hold for the
    # floating-point sums as well (changes are at the level of a few ulps)
    rho = np.array(rho, dtype=float)
    while True:
        changed = False
        for j in range(rho.shape[0]):
            via = rho[:, j, None] + rho[None, j, :]
            mask = via < rho
            if mask.any():
                rho[mask] = via[mask]
                changed = True
        if not changed:
            return rho


@dataclass
class Violation:
    kind: str
    witness: tuple
    excess: float


@dataclass
class AxiomReport:
    n_points: int
    triples_checked: int
    tol: float
    counts: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(self.counts.values())

    def summary(self) -> str:
        if self.ok:
            return f"metric axioms hold on {self.n_points} points / {self.triples_checked} triples"
        parts = [f"{k}: {v}" for k, v in self.counts.items() if v]
        return "violations (" + ", ".join(parts) + ")"


def _same_point(p, q) -> bool:
    try:
        return bool(np.array_equal(p, q))
    except Exception:
        return p == q


def metric_axioms_check(
    d: Distance,
    sample,
    tol: float = 1e-9,
    triples: int | None = None,
    rng: np.random.Generator | None = None,
    same: Callable[[Any, Any], bool] = _same_point,
    max_witnesses: int = 20,
) -> AxiomReport:
    """Check nonnegativity, identity, indiscernibility, symmetry and triangle.

    All triples are checked when ``triples`` is None, otherwise that many index
    triples are drawn from ``rng``.
    """
    pts = tuple(sample.points if isinstance(sample, FinitePointSet) else sample)
    n = len(pts)
    M = np.array([[d(p, q) for q in pts] for p in pts], dtype=float).reshape(n, n)
    counts = {k: 0 for k in ("nonnegativity", "identity", "indiscernibles", "symmetry", "triangle")}
    found: list[Violation] = []

    def record(kind, idx, excess):
        counts[kind] += 1
        if counts[kind] <= max_witnesses:
            found.append(Violation(kind, tuple(int(i) for i in idx), float(excess)))

    for i, j in zip(*np.nonzero(M < -tol)):
        record("nonnegativity", (i, j), -M[i, j])
    for i in np.nonzero(np.abs(np.diag(M)) > tol)[0]:
        record("identity", (i,), abs(M[i, i]))
    for i, j in itertools.combinations(range(n), 2):
        if abs(M[i, j]) <= tol and not same(pts[i], pts[j]):
            record("indiscernibles", (i, j), 0.0)
        gap = abs(M[i, j] - M[j, i])
        if gap > tol:
            record("symmetry", (i, j), gap)

    if triples is None:
        excess = M[:, None, :] - M[:, :, None] - M[None, :, :]
        bad = np.argwhere(excess > tol)
        counts["triangle"] = len(bad)
        for i, j, k in bad[:max_witnesses]:
            found.append(Violation("triangle", (int(i), int(j), int(k)), float(excess[i, j, k])))
        checked = n**3
    else:
        rng = rng or np.random.default_rng(0)
        idx = rng.integers(0, n, size=(triples, 3))
        ex = M[idx[:, 0], idx[:, 2]] - M[idx[:, 0], idx[:, 1]] - M[idx[:, 1], idx[:, 2]]
        for (i, j, k), e in zip(idx, ex):
            if e > tol:
                record("triangle", (i, j, k), e)
        checked = triples
    return AxiomReport(n, checked, tol, counts, found)
