"""Discrete-time catenary machinery.

For a homeomorphism ``f`` the flow derivative is replaced by the second
difference ``L(f x) - 2 L(x) + L(f^-1 x)``.  Catenary values along orbits
solve ``u_{k+1} - 3 u_k + u_{k-1} = 0`` whose characteristic roots are
``(3 -+ sqrt 5) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .blocks import T_MAX, Block
from .errors import CapacityError, DomainError, SpecError
from .fields import BVPSpec, catenary_bvp
from .flows import SuspensionFlow
from .metric import MAX_EXACT_CARDINALITY, hausdorff_distance


def catenary_roots() -> tuple[float, float]:
    """Roots of ``lambda^2 - 3 lambda + 1``, smaller one first."""
    lam_u = (3.0 + math.sqrt(5.0)) / 2.0
    return 2.0 / (3.0 + math.sqrt(5.0)), lam_u


LAMBDA_S, LAMBDA_U = catenary_roots()


@dataclass(frozen=True)
class DiscreteSystem:
    forward: Callable
    backward: Callable
    kind: str
    distance: Callable | None = None
    name: str = ""

    def iterate(self, x, n: int):
        step = self.forward if n >= 0 else self.backward
        for _ in range(abs(n)):
            x = step(x)
        return x


@dataclass(frozen=True)
class SymbolicPoint:
    """Point of the full 2-shift with finitely many coordinates equal to 1."""

    support: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "support", frozenset(int(n) for n in self.support))

    @classmethod
    def from_json(cls, obj) -> "SymbolicPoint":
        off = int(obj.get("offset", 0))
        ones = set()
        for n, sym in obj.get("support", []):
            if sym not in (0, 1):
                raise DomainError(f"symbol {sym} not in {{0, 1}}")
            if sym == 1:
                ones.add(int(n) + off)
        return cls(frozenset(ones))

    def to_json(self) -> dict:
        return {"offset": 0, "support": [[n, 1] for n in sorted(self.support)]}

    def __getitem__(self, n: int) -> int:
        return 1 if n in self.support else 0

    def shift(self, k: int = 1) -> "SymbolicPoint":
        # (sigma x)_n = x_{n+1}
        return SymbolicPoint(frozenset(m - k for m in self.support))


def shift_metric(x: SymbolicPoint, y: SymbolicPoint, lam: float = LAMBDA_U) -> float:
    """``sum_n |x_n - y_n| lam^{-|n|}``, summed exactly over the symmetric difference."""
    if not lam > 1:
        raise DomainError("lambda must exceed 1")
    return math.fsum(lam ** -abs(n) for n in x.support ^ y.support)


def full_shift() -> DiscreteSystem:
    return DiscreteSystem(lambda x: x.shift(1), lambda x: x.shift(-1), "full_shift_2", shift_metric, "shift")


_CAT = np.array([[2, 1], [1, 1]])
_CAT_INV = np.array([[1, -1], [-1, 2]])


def torus_distance(p, q) -> float:
    d = np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)) % 1.0
    return float(np.linalg.norm(np.minimum(d, 1.0 - d)))


def toral_automorphism() -> DiscreteSystem:
    """``[[2, 1], [1, 1]]`` acting on ``[0, 1)^2``."""
    return DiscreteSystem(
        lambda x: np.mod(_CAT @ np.asarray(x, dtype=float), 1.0),
        lambda x: np.mod(_CAT_INV @ np.asarray(x, dtype=float), 1.0),
        "toral_automorphism",
        torus_distance,
        "cat",
    )


def finite_permutation(perm: Iterable[int]) -> DiscreteSystem:
    perm = [int(i) for i in perm]
    if sorted(perm) != list(range(len(perm))):
        raise SpecError("not a permutation")
    inv = [0] * len(perm)
    for i, j in enumerate(perm):
        inv[j] = i
    return DiscreteSystem(lambda i: perm[i], lambda i: inv[i], "finite_permutation", lambda i, j: float(i != j), "perm")


def pair_system(f: DiscreteSystem) -> DiscreteSystem:
    """``(x, y) -> (f x, f y)``; its distance is the base distance between the coordinates."""
    d = f.distance
    return DiscreteSystem(
        lambda p: (f.forward(p[0]), f.forward(p[1])),
        lambda p: (f.backward(p[0]), f.backward(p[1])),
        "pair_system",
        (lambda p, q: d(p[0], q[0]) + d(p[1], q[1])) if d else None,
        f"pair({f.name})",
    )


def second_difference(L: Callable, f: DiscreteSystem, x) -> float:
    """``L(f x) - 2 L(x) + L(f^-1 x)``."""
    return L(f.forward(x)) - 2.0 * L(x) + L(f.backward(x))


@dataclass(frozen=True)
class DiscreteCatenarySpec:
    delta: float = 0.5
    N_max: int = 40
    lam_s: float = LAMBDA_S
    lam_u: float = LAMBDA_U

    def __post_init__(self):
        if not (0 < self.lam_s < 1 < self.lam_u):
            raise SpecError("need 0 < lambda_s < 1 < lambda_u")
        if abs(self.lam_s * self.lam_u - 1) > 1e-12 or abs(self.lam_s + self.lam_u - 3) > 1e-12:
            raise SpecError("lambda_s, lambda_u must be the roots of l^2 - 3l + 1")
        if not self.delta > 0 or self.N_max < 1:
            raise SpecError("delta must be positive and N_max at least 1")


@dataclass
class DiscreteBVPResult:
    value: float
    n_s: int | None  # None when capped (unstable side)
    n_u: int | None  # None when capped (stable side)
    branch: str  # transient | Ws | Wu | Lambda
    ks: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _pair_dist(d, p) -> float:
    return d(p[0], p[1])


def discrete_catenary_bvp(f: DiscreteSystem, spec: DiscreteCatenarySpec, pair, dist: Callable | None = None) -> DiscreteBVPResult:
    """Catenary values on the pair block ``{d(x, y) <= delta}`` with boundary value ``delta``.

    ``f`` is the base system; the pair ``(x, y)`` is iterated diagonally.
    The result carries ``u_k`` for every orbit index between the exits
    (or up to ``N_max`` on a capped side).
    """
    d = dist or f.distance
    x, y = pair
    delta, N = spec.delta, spec.N_max
    if d(x, y) > delta:
        raise DomainError(f"pair outside the block: distance {d(x, y):.6g} > {delta}")
    if d(x, y) == 0:
        ks = np.arange(-N, N + 1)
        return DiscreteBVPResult(0.0, None, None, "Lambda", ks, np.zeros(len(ks)))

    def first_exit(step):
        a, b = x, y
        for n in range(1, N + 1):
            a, b = step(a), step(b)
            if d(a, b) > delta:
                return n
        return None

    fu = first_exit(f.forward)
    fs = first_exit(f.backward)
    n_u = fu
    n_s = -fs if fs is not None else None
    theta = math.log(spec.lam_u)
    if n_u is not None and n_s is not None:
        ks = np.arange(n_s, n_u + 1)
        span = (n_u - n_s) * theta
        vals = delta * (np.sinh((n_u - ks) * theta) + np.sinh((ks - n_s) * theta)) / math.sinh(span)
        branch = "transient"
    elif n_s is not None:
        ks = np.arange(n_s, N + 1)
        vals = delta * spec.lam_s ** (ks - n_s).astype(float)
        branch = "Ws"
    elif n_u is not None:
        ks = np.arange(-N, n_u + 1)
        vals = delta * spec.lam_s ** (n_u - ks).astype(float)
        branch = "Wu"
    else:
        ks = np.arange(-N, N + 1)
        vals = np.zeros(len(ks))
        branch = "Lambda"
    value = float(vals[np.nonzero(ks == 0)[0][0]])
    return DiscreteBVPResult(value, n_s, n_u, branch, ks, vals)


def recurrence_residuals(values) -> np.ndarray:
    """``u_{k+1} - 3 u_k + u_{k-1}`` at every interior index."""
    u = np.asarray(values, dtype=float)
    return u[2:] - 3.0 * u[1:-1] + u[:-2]


class PairSuspension:
    """Suspension of the pair system over ``f`` with return time ``ln lambda_u``.

    The block indicator interpolates the pair distance linearly along each
    fiber, so it is continuous across the wrap.
    """

    def __init__(self, f: DiscreteSystem, dist: Callable | None = None, delta: float = 0.5, lam_u: float = LAMBDA_U):
        self.base = f
        self.d = dist or f.distance
        self.delta = delta
        self.flow = SuspensionFlow(pair_system(f), 1.0 / math.log(lam_u))
        T = self.flow.period

        def indicator(state):
            s, (a, b) = state
            w = s / T
            here = self.d(a, b)
            if w == 0.0:
                return here
            return (1 - w) * here + w * self.d(f.forward(a), f.forward(b))

        self.block = Block(indicator, delta, lam=indicator)


def suspension_catenary(susp: PairSuspension, pair, a: float = 1.0, T_max: float = T_MAX) -> float:
    """Continuous catenary field of the suspension evaluated at ``pi(0, pair)``.

    With return time ``ln lambda_u`` its values along ``f``-orbits satisfy the
    discrete recurrence, since ``e^T - 2 + e^-T = 1``.
    """
    spec = BVPSpec(lambda z: susp.delta, a=a)
    return catenary_bvp(susp.flow, susp.block, spec, (0.0, tuple(pair)), T_max)


def suspension_catenary_orbit(susp: PairSuspension, pair, n_max: int = 40, T_max: float = T_MAX) -> tuple[np.ndarray, np.ndarray]:
    """Values at ``pi(0, f^n pair)`` along the run of indices around 0 that stays in the block."""
    f, d = susp.base, susp.d
    if d(*pair) > susp.delta:
        raise DomainError("pair outside the block")
    ks = [0]
    for step, sign in ((f.forward, 1), (f.backward, -1)):
        a, b = pair
        for n in range(1, n_max + 1):
            a, b = step(a), step(b)
            if d(a, b) > susp.delta:
                break
            ks.append(sign * n)
    ks.sort()
    vals = [suspension_catenary(susp, (f.iterate(pair[0], n), f.iterate(pair[1], n)), T_max=T_max) for n in ks]
    return np.array(ks), np.array(vals)


@dataclass
class ProbeEntry:
    index: int
    n: int | None  # signed separating step, None when unresolved


def expansivity_probe(f: DiscreteSystem, delta: float, pairs, N: int, dist: Callable | None = None) -> list[ProbeEntry]:
    """First ``n`` (by ``|n|``, forward before backward) with ``d(f^n x, f^n y) > delta``.

    Identical pairs are skipped.
    """
    d = dist or f.distance
    out = []
    for i, (x, y) in enumerate(pairs):
        if d(x, y) == 0:
            continue
        found = None
        if d(x, y) > delta:
            found = 0
        fx, fy, bx, by = x, y, x, y
        for n in range(1, N + 1):
            if found is not None:
                break
            fx, fy = f.forward(fx), f.forward(fy)
            if d(fx, fy) > delta:
                found = n
                break
            bx, by = f.backward(bx), f.backward(by)
            if d(bx, by) > delta:
                found = -n
        out.append(ProbeEntry(i, found))
    return out


@dataclass
class HyperspaceOrbit:
    sets: list
    diameters: list
    first_large: int | None  # first iterate whose diameter exceeds delta


def _diameter(A, d) -> float:
    return max((d(p, q) for p in A for q in A), default=0.0)


def hyperspace_iterate(f: DiscreteSystem, A, n: int, delta: float | None = None, dist: Callable | None = None) -> HyperspaceOrbit:
    """Elementwise images ``g^k(A)`` for ``k = 0..n`` (backward when ``n < 0``)."""
    A = list(A)
    if len(A) > MAX_EXACT_CARDINALITY:
        raise CapacityError(f"at most {MAX_EXACT_CARDINALITY} points, got {len(A)}")
    d = dist or f.distance
    step = f.forward if n >= 0 else f.backward
    sets, diams, first = [A], [_diameter(A, d)], None
    if delta is not None and diams[0] > delta:
        first = 0
    for k in range(1, abs(n) + 1):
        A = [step(p) for p in A]
        sets.append(A)
        diams.append(_diameter(A, d))
        if first is None and delta is not None and diams[-1] > delta:
            first = k if n >= 0 else -k
    return HyperspaceOrbit(sets, diams, first)


def hausdorff_pair_metric(dist: Callable) -> Callable:
    """Hausdorff distance between two-point sets, a metric on ``F_2(X)``."""
    return lambda P, Q: hausdorff_distance(list(P), list(Q), dist)


def local_metric(dpair: Callable, x, y, z, radius: float | None = None, dist: Callable | None = None) -> float:
    """``D_x(y, z) = d({x, y}, {x, z})``."""
    if radius is not None:
        if dist is None:
            raise SpecError("a radius needs a base distance")
        if dist(x, y) > radius or dist(x, z) > radius:
            raise DomainError("local metric evaluated outside its radius")
    return float(dpair((x, y), (x, z)))
