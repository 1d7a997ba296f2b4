"""Isolating blocks given as sublevel sets ``{L1 <= delta}``.

Hit times ``T^s <= 0 <= T^u`` are the backward/forward times at which an
orbit leaves the block.  A side that does not exit before the horizon
``T_max`` is reported as infinite, which marks the point as lying on the
stable (``T^u = inf``) or unstable (``T^s = -inf``) set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .errors import DomainError
from .flows import BAND, FlowSystem, first_exit

T_MAX = 50.0
LAMBDA_TOL = 1e-6
FD_STEP = 1e-5
TIE_TOL = 1e-7

SIGMA_S = "Sigma_s"
SIGMA_U = "Sigma_u"
BOTH = "both"


@dataclass(frozen=True)
class Block:
    """``{x : indicator(x) <= level}`` with a tolerance band ``eta``.

    ``lam`` designates the isolated set, either as a callable distance to
    it or as a finite list of its points.  ``vectorized`` promises that the
    indicator accepts an ``(N, d)`` array and returns shape ``(N,)``.
    """

    indicator: Callable[[Any], float]
    level: float
    eta: float = BAND
    lam: Any = None
    vectorized: bool = False
    bbox: Sequence[tuple[float, float]] | None = None

    def excess(self, x) -> float:
        return float(self.indicator(x)) - self.level

    def contains(self, x) -> bool:
        return self.excess(x) <= self.eta

    def on_boundary(self, x) -> bool:
        return abs(self.excess(x)) <= self.eta

    def lam_distance(self, x) -> float:
        if self.lam is None:
            return 0.0
        if callable(self.lam):
            return float(self.lam(x))
        pts = np.atleast_2d(np.asarray(self.lam, dtype=float))
        return float(np.min(np.linalg.norm(pts - np.asarray(x, dtype=float), axis=1)))

    def bbox_contacts(self, n: int = 41) -> list:
        """Points on the bounding-box boundary that lie inside the block.

        A non-empty result means the sublevel set is not compactly contained
        in the box, usually a sign that ``level`` is too large.
        """
        if self.bbox is None:
            return []
        axes = [np.linspace(lo, hi, n) for lo, hi in self.bbox]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
        lo = np.array([b[0] for b in self.bbox])
        hi = np.array([b[1] for b in self.bbox])
        edge = np.any((grid == lo) | (grid == hi), axis=1)
        return [p for p in grid[edge] if self.contains(p)]


@dataclass
class HitTimes:
    t_s: float
    t_u: float
    in_Ws: bool
    in_Wu: bool
    in_Lambda: bool
    pi_s: Any = None
    pi_u: Any = None

    @property
    def T(self) -> float:
        return self.t_u - self.t_s

    @property
    def transient(self) -> bool:
        return not (self.in_Ws or self.in_Wu)


def hit_times(sys: FlowSystem, block: Block, x, T_max: float = T_MAX) -> HitTimes:
    """Backward and forward exit times of ``x`` from ``block``."""
    x = sys.validate(x)
    if not block.contains(x):
        raise DomainError(f"point outside the block (excess {block.excess(x):.3g})")
    kw = dict(band=block.eta, vectorized=block.vectorized)
    fwd = first_exit(sys, x, block.indicator, block.level, T_max, 1, **kw)
    bwd = first_exit(sys, x, block.indicator, block.level, T_max, -1, **kw)
    in_Ws, in_Wu = not fwd.exited, not bwd.exited
    in_lam = False
    if in_Ws and in_Wu:
        fwd = first_exit(sys, x, block.indicator, block.level, T_max, 1, keep_samples=True, **kw)
        bwd = first_exit(sys, x, block.indicator, block.level, T_max, -1, keep_samples=True, **kw)
        far = max(block.lam_distance(s) for s in fwd.samples + bwd.samples)
        if far > LAMBDA_TOL:
            raise DomainError(
                f"orbit stays in the block for |t| <= {T_max} but wanders {far:.3g} from the isolated set"
            )
        in_lam = True
    return HitTimes(
        t_s=-math.inf if in_Wu else bwd.t,
        t_u=math.inf if in_Ws else fwd.t,
        in_Ws=in_Ws,
        in_Wu=in_Wu,
        in_Lambda=in_lam,
        pi_s=None if in_Wu else bwd.state,
        pi_u=None if in_Ws else fwd.state,
    )


def boundary_projections(sys, block, x, T_max: float = T_MAX):
    """``(pi_s x, pi_u x)``; a side is None on the corresponding invariant manifold."""
    ht = hit_times(sys, block, x, T_max)
    return ht.pi_s, ht.pi_u


def flow_derivative(L, sys: FlowSystem, x, h: float = FD_STEP) -> float:
    """Central difference of ``L`` along the flow, ignoring any domain."""
    return (L(sys._raw(x, h)) - L(sys._raw(x, -h))) / (2 * h)


def boundary_split(sys, block: Block, sample, h: float = FD_STEP, tol: float = TIE_TOL) -> list[str]:
    """Label boundary points as entering, leaving, or tangent (both)."""
    labels = []
    for x in sample:
        x = sys.validate(x)
        if not block.on_boundary(x):
            raise DomainError(f"point off the boundary band (excess {block.excess(x):.3g})")
        d = flow_derivative(block.indicator, sys, x, h)
        labels.append(SIGMA_S if d < -tol else SIGMA_U if d > tol else BOTH)
    return labels


@dataclass(frozen=True)
class UniverseLabel:
    label: str  # Lambda | Ws_minus_Lambda | Wu_minus_Lambda | transient
    forward: str  # Lambda | omega
    backward: str  # Lambda | alpha


def classify_point(sys, block, x, T_max: float = T_MAX) -> UniverseLabel:
    ht = hit_times(sys, block, x, T_max)
    fwd = "Lambda" if ht.in_Ws else "omega"
    bwd = "Lambda" if ht.in_Wu else "alpha"
    if ht.in_Lambda:
        label = "Lambda"
    elif ht.in_Ws:
        label = "Ws_minus_Lambda"
    elif ht.in_Wu:
        label = "Wu_minus_Lambda"
    else:
        label = "transient"
    return UniverseLabel(label, fwd, bwd)


def cocycle_check(sys, block, x, t: float, T_max: float = T_MAX) -> float:
    """Largest of ``|T^u(phi_t x) - T^u(x) + t|``, the ``T^s`` analogue and ``|T(phi_t x) - T(x)|``.

    Infinite sides are skipped.
    """
    a = hit_times(sys, block, x, T_max)
    y = sys.advance(x, t)
    if not y.interior or not block.contains(y.point):
        raise DomainError("phi_t(x) left the block")
    b = hit_times(sys, block, y.point, T_max)
    res = [0.0]
    if math.isfinite(a.t_u) and math.isfinite(b.t_u):
        res.append(abs(b.t_u - (a.t_u - t)))
    if math.isfinite(a.t_s) and math.isfinite(b.t_s):
        res.append(abs(b.t_s - (a.t_s - t)))
    if math.isfinite(a.T) and math.isfinite(b.T):
        res.append(abs(b.T - a.T))
    return max(res)
