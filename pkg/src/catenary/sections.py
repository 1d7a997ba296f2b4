"""Local cross sections of regular flows and sectional metrics.

For a flow without singular points the functional

    theta_x(y) = int_0^tau dist(x, phi_t y) dt

increases along orbits near ``x`` (its rate is ``dist(x, phi_tau y) - dist(x, y)``),
so the level set ``H_eps(x) = {y : dist(x, y) <= eps, theta_x(y) = theta_x(x)}``
is a local cross section.  Following a companion orbit onto the sections of a
moving base point gives the reparametrized product flow
``(x, y) -> (phi_t x, phi_h(t) y)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .discrete import LAMBDA_U, SymbolicPoint, full_shift
from .errors import DomainError, ProjectionError, SpecError
from .fields import smooth_lyapunov
from .flows import SuspensionFlow

SECTION_TOL = 1e-9
DT_MIN = 1e-4


@dataclass(frozen=True)
class SectionSpec:
    """Averaging time, section radius and transversality constants."""

    dist: Callable
    tau: float = 0.3
    eps: float = 0.1
    delta: float = 0.1
    a: float = 0.0
    panels: int = 64

    def __post_init__(self):
        if self.tau <= 0 or self.eps <= 0 or self.delta <= 0:
            raise SpecError("tau, eps and delta must be positive")
        if self.panels < 2 or self.panels % 2:
            raise SpecError("panel count must be even and positive")


def theta(sys, x, y, spec: SectionSpec) -> float:
    """``int_0^tau dist(x, phi_t y) dt`` by composite Simpson."""
    val, _ = smooth_lyapunov(lambda p: spec.dist(x, p), sys, spec.tau, y, spec.panels)
    return max(val, 0.0)


def theta_rate(sys, x, y, spec: SectionSpec) -> float:
    """Exact derivative of ``t -> theta_x(phi_t y)`` at ``t = 0``."""
    end = sys(y, spec.tau)
    return spec.dist(x, end) - spec.dist(x, y)


def fit_section_spec(sys, dist: Callable, pairs, tau: float = 0.3, delta: float = 0.1, eps: float | None = None,
                     panels: int = 64) -> SectionSpec:
    """Estimate ``a`` as the smallest rate over the sampled ``delta``-close pairs."""
    probe = SectionSpec(dist, tau, eps or delta, delta, 0.0, panels)
    rates = [theta_rate(sys, x, y, probe) for x, y in pairs if dist(x, y) <= delta]
    if not rates:
        raise SpecError(f"no sampled pair within delta={delta}")
    a = min(rates)
    if a <= 0:
        raise SpecError(f"rate {a:.3g} <= 0 on a delta-close pair; shrink delta or change tau")
    return SectionSpec(dist, tau, eps or delta, delta, a, panels)


@dataclass
class Projection:
    s: float
    point: object
    residual: float


def _project(sys, xp, y, s0: float, spec: SectionSpec) -> Projection:
    target = theta(sys, xp, xp, spec)

    def g(s):
        return theta(sys, xp, sys(y, s), spec) - target

    start = sys(y, s0)
    if spec.dist(xp, start) > spec.eps:
        raise ProjectionError(f"initial guess at distance {spec.dist(xp, start):.3g} > eps={spec.eps}")
    g0 = g(s0)
    if g0 == 0.0:
        return Projection(s0, start, 0.0)
    step = -1.0 if g0 > 0 else 1.0
    lo, glo = s0, g0
    bracket = None
    for k in range(1, 9):
        s1 = s0 + step * spec.tau * k / 8
        g1 = g(s1)
        if g1 == 0.0 or (g1 > 0) != (glo > 0):
            bracket = (lo, s1)
            break
        lo, glo = s1, g1
    if bracket is None:
        raise ProjectionError(f"theta residual does not change sign within s0 +- tau (g(s0)={g0:.3g})")
    a, b = sorted(bracket)
    s = brentq(g, a, b, xtol=1e-13, rtol=4 * np.finfo(float).eps)
    point = sys(y, s)
    res = abs(g(s))
    if res > SECTION_TOL:
        raise ProjectionError(f"section residual {res:.3g} above {SECTION_TOL}")
    if spec.dist(xp, point) > spec.eps:
        raise ProjectionError("projected point is outside the section radius")
    return Projection(float(s), point, res)


def section_project(sys, xp, y, s0: float, spec: SectionSpec) -> float:
    """Time ``s`` near ``s0`` with ``phi_s y`` in ``H_eps(xp)``."""
    return _project(sys, xp, y, s0, spec).s


def in_section(sys, x, y, spec: SectionSpec, tol: float = SECTION_TOL) -> bool:
    if spec.dist(x, y) > spec.eps:
        return False
    return abs(theta(sys, x, y, spec) - theta(sys, x, x, spec)) <= tol


@dataclass
class ReparamState:
    """Companion time ``s = h(t)`` and the section residual of the last projection."""

    s: float = 0.0
    residual: float = 0.0


@dataclass
class ReparamTrace:
    ts: np.ndarray
    hs: np.ndarray
    residuals: np.ndarray
    halvings: int = 0

    @property
    def increasing(self) -> bool:
        d = np.diff(self.hs) * np.sign(np.diff(self.ts))
        return bool(np.all(d > 0))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "s", "residual"])
            for t, s, r in zip(self.ts, self.hs, self.residuals):
                w.writerow([repr(float(t)), repr(float(s)), repr(float(r))])


def reparametrize(sys, x, y, t_end: float, spec: SectionSpec, dt: float | None = None,
                  state: ReparamState | None = None) -> ReparamTrace:
    """Follow ``y`` onto the sections ``H_eps(phi_t x)`` for ``t`` between 0 and ``t_end``.

    ``y`` is first projected onto ``H_eps(x)`` so that ``h(0)`` is its offset
    (zero when ``y`` already lies in the section).  Steps of ``tau/10`` are
    halved on projection failure down to ``1e-4``.
    """
    state = state or ReparamState()
    first = _project(sys, x, y, state.s, spec)
    state.s, state.residual = first.s, first.residual
    direction = 1.0 if t_end >= 0 else -1.0
    base = dt or spec.tau / 10
    ts, hs, rs = [0.0], [state.s], [state.residual]
    t, step, halvings = 0.0, base, 0
    while direction * (t_end - t) > 1e-15:
        dt_k = min(step, abs(t_end - t))
        t1 = t + direction * dt_k
        try:
            proj = _project(sys, sys(x, t1), y, state.s + direction * dt_k, spec)
        except ProjectionError:
            step /= 2
            halvings += 1
            if step < DT_MIN:
                raise ProjectionError(f"reparametrization stalled at t={t:.6g}")
            continue
        t = t1
        state.s, state.residual = proj.s, proj.residual
        ts.append(t)
        hs.append(state.s)
        rs.append(state.residual)
        step = min(2 * step, base)
    return ReparamTrace(np.array(ts), np.array(hs), np.array(rs), halvings)


def sectional_metric(dpair: Callable, x, y, z, spec: SectionSpec | None = None, sys=None) -> float:
    """``D_x(y, z) = dpair((x, y), (x, z))`` for ``y, z`` in ``H_eps(x)``.

    Membership is checked when ``spec`` and ``sys`` are given.
    """
    if spec is not None and sys is not None:
        for p in (y, z):
            if not in_section(sys, x, p, spec, tol=1e-8):
                raise DomainError("point is not in the local section of the base point")
    return float(dpair((x, y), (x, z)))


@dataclass
class SectionalCheck:
    residual: float
    value: float
    h: float
    times: tuple = ()
    values: tuple = ()
    companions: dict = field(default_factory=dict)
    max_projection_residual: float = 0.0


def sectional_catenary_residual(sys, dpair: Callable, x, y, z, spec: SectionSpec, h: float = 1e-2,
                                a: float = 1.0) -> SectionalCheck:
    """``|D'' - a^2 D|`` at ``t = 0`` along the reparametrized product flow.

    The base point is advanced by ``-h, 0, h``; both companions are projected
    onto the sections of the moved base point.
    """
    times = (-h, 0.0, h)
    vals, comp, worst = [], {"y": [], "z": []}, 0.0
    for t in times:
        xt = sys(x, t)
        pts = []
        for key, p in (("y", y), ("z", z)):
            proj = _project(sys, xt, p, t, spec)
            comp[key].append(proj.s)
            worst = max(worst, proj.residual)
            pts.append(proj.point)
        vals.append(float(dpair((xt, pts[0]), (xt, pts[1]))))
    dd = (vals[2] - 2 * vals[1] + vals[0]) / h**2
    return SectionalCheck(abs(dd - a * a * vals[1]), vals[1], h, times, tuple(vals), comp, worst)


# suspension of the full shift


def suspended_shift(lam: float = LAMBDA_U) -> SuspensionFlow:
    """Suspension of the full 2-shift with return time ``ln lam``."""
    return SuspensionFlow(full_shift(), 1.0 / math.log(lam))


def _weight(m: int, s: float, T: float) -> float:
    return math.exp(-abs(m * T - s))


def suspension_shift_distance(T: float = math.log(LAMBDA_U)) -> Callable:
    """Metric on the suspension of the full shift.

    A state ``(s, x)`` is lifted to ``(s + kT, sigma^-k x)``; on lifts the
    distance is ``|ds| + sum_m |x_m w_m(s) - y_m w_m(s')|`` with
    ``w_m(s) = exp(-|mT - s|)``, and the quotient takes the smallest lift.
    The deck translation preserves the lifted distance, so this is a metric.
    """

    def lifted(sp, X, sq, Y):
        terms = [abs(sp - sq)]
        for m in X | Y:
            a = _weight(m, sp, T) if m in X else 0.0
            b = _weight(m, sq, T) if m in Y else 0.0
            terms.append(abs(a - b))
        return math.fsum(terms)

    def dist(p, q) -> float:
        sp, x = p
        sq, y = q
        X = x.support
        k0 = round((sp - sq) / T)
        best = math.inf
        for j in range(0, 64):
            cands = (k0,) if j == 0 else (k0 - j, k0 + j)
            gaps = [abs(sp - sq - k * T) for k in cands]
            if min(gaps) >= best:
                break
            for k, gap in zip(cands, gaps):
                if gap < best:
                    Y = frozenset(n + k for n in y.support)
                    best = min(best, lifted(sp, X, sq + k * T, Y))
        return best

    return dist


def suspension_section_pseudometric(T: float = math.log(LAMBDA_U)) -> Callable:
    """``D_x(y, z) = sum over m in the symmetric difference of exp(-|mT - s_x|)``.

    ``y`` and ``z`` are read in the lift nearest to the phase of ``x``.  Along
    the product flow the symbol sets do not change, so every term is
    ``exp(-|c - t|)`` and the sum is catenary while it stays below 1.
    """

    def frame(s_base, q):
        sq, y = q
        k = round((s_base - sq) / T)
        return frozenset(n + k for n in y.support)

    def dpair(p, q):
        x, y = p
        x2, z = q
        if x2 != x and (abs(x2[0] - x[0]) > 1e-12 or x2[1] != x[1]):
            raise DomainError("sectional pseudo-metric compares pairs over one base point")
        s = x[0]
        return math.fsum(_weight(m, s, T) for m in frame(s, y) ^ frame(s, z))

    return dpair


def shift_state(s: float, *ones: int) -> tuple[float, SymbolicPoint]:
    return (float(s), SymbolicPoint(frozenset(ones)))
