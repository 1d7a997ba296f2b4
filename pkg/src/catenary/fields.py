"""Lyapunov functions and pseudo-metrics of catenary type.

A field ``L`` is catenary with exponent ``a`` when ``L'' = a^2 L`` along
orbits, so its values along an orbit are ``A e^{at} + B e^{-at}``.  Time
derivatives are central differences along the flow.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from .blocks import T_MAX, Block, hit_times
from .errors import BasinError, DomainError, SpecError, TruncationError
from .flows import FlowSystem, LinearAttractor
from .metric import SizeFunctionSpec, whitney_size

H1 = 1e-5
H2 = 1e-4


class ScalarField:
    """Evaluator ``L`` with exponent ``a`` and finite-difference steps.

    ``orbit(sys, x, ts)`` may be supplied to evaluate ``L`` along the orbit of
    ``x`` at the offsets ``ts`` more accurately than pointwise evaluation
    (the boundary-value field uses the hit-time cocycle this way).
    """

    def __init__(self, func, a: float = 1.0, h1: float = H1, h2: float = H2, positive: bool = False, orbit=None, name: str = ""):
        if not a > 0:
            raise SpecError(f"exponent must be a positive constant, got {a}")
        self.func = func
        self.a = float(a)
        self.h1 = h1
        self.h2 = h2
        self.positive = positive
        self.orbit = orbit
        self.name = name

    def __call__(self, x) -> float:
        return float(self.func(x))

    def along(self, sys: FlowSystem, x, ts) -> np.ndarray:
        if self.orbit is not None:
            return np.asarray(self.orbit(sys, x, ts), dtype=float)
        return np.array([self.func(sys._raw(x, t)) for t in ts], dtype=float)

    def ldot(self, sys, x) -> float:
        lo, hi = self.along(sys, x, (-self.h1, self.h1))
        return (hi - lo) / (2 * self.h1)

    def lddot(self, sys, x) -> float:
        h = self.h2
        lo, mid, hi = self.along(sys, x, (-h, 0.0, h))
        return (lo - 2 * mid + hi) / (h * h)


def _orbit_samples(sys, x, dt, horizon, stop):
    """Forward samples of ``x`` every ``dt`` until ``stop(state)`` holds.

    ``stop.vector`` evaluates the stopping rule on a stacked array of states.
    """
    if hasattr(sys, "batch") and sys.domain is None:
        ts = np.arange(0.0, horizon + dt / 2, dt)
        states = np.asarray(sys.batch(x, ts))
        hit = np.nonzero(stop.vector(states))[0]
        return (states[: hit[0] + 1], True) if hit.size else (states, False)
    states, state, t = [x], x, 0.0
    while t < horizon:
        if stop(state):
            return np.asarray(states), True
        res = sys.advance(state, dt)
        if not res.interior:
            raise BasinError("orbit left the domain before reaching the attractor")
        state, t = res.point, t + dt
        states.append(state)
    return np.asarray(states), bool(stop(state))


def attractor_lyapunov(sys, p, spec: SizeFunctionSpec, x, horizon: float = 50.0, dt: float = 1e-3, ball: float = 1e-6) -> float:
    """Size of the sampled forward orbit of ``x`` together with ``p``.

    Orbit sets shrink along orbits, so the value decreases; it is zero at ``p``.
    """
    x = sys.validate(x)
    p = np.asarray(p, dtype=float)

    def near(z):
        return float(np.linalg.norm(np.asarray(z, dtype=float) - p)) < ball

    near.vector = lambda Z: np.linalg.norm(np.asarray(Z, dtype=float).reshape(len(Z), -1) - p.ravel(), axis=1) < ball
    states, ok = _orbit_samples(sys, x, dt, horizon, near)
    if not ok:
        raise BasinError(f"orbit did not enter the {ball:g}-ball of the attractor before t={horizon}")
    pts = np.vstack([np.asarray(states, dtype=float).reshape(len(states), -1), p.reshape(1, -1)])
    return whitney_size(list(pts), spec)


def smooth_lyapunov(L: Callable, sys, tau: float, x, panels: int = 64) -> tuple[float, float]:
    """``L1(x) = int_0^tau L(phi_t x) dt`` and its exact derivative ``L(phi_tau x) - L(x)``."""
    if panels % 2:
        raise SpecError("Simpson's rule needs an even panel count")
    ts = np.linspace(0.0, tau, panels + 1)
    vals = []
    for t in ts:
        res = sys.advance(x, float(t))
        if not res.interior:
            raise TruncationError(f"orbit leaves the domain at t={res.t_exit:.6g} < tau")
        vals.append(L(res.point))
    vals = np.asarray(vals, dtype=float)
    return float(simpson(vals, x=ts)), float(vals[-1] - vals[0])


def section_time(sys, V: Callable, level: float, x, t_max: float = T_MAX) -> float:
    """Signed time ``tau`` with ``V(phi_tau x) = level`` for ``V`` decreasing along orbits."""

    def g(t):
        res = sys.advance(x, t)
        if not res.interior:
            raise DomainError("orbit leaves the domain before meeting the level set")
        return V(res.point) - level

    g0 = g(0.0)
    if g0 == 0.0:
        return 0.0
    sign = 1.0 if g0 > 0 else -1.0
    lo, hi = 0.0, 0.5
    while True:
        if hi > t_max:
            raise DomainError("orbit misses the level set")
        if g(sign * hi) * g0 <= 0:
            break
        lo, hi = hi, 2 * hi
    t = brentq(lambda s: g(sign * s), lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return sign * t


def exact_decay_lyapunov(sys, V: Callable, level: float, a: float, x, t_max: float = T_MAX) -> float:
    """``L = e^{a tau}`` where ``tau`` is the time for ``x`` to reach ``{V = level}``.

    Then ``L(phi_t x) = e^{-at} L(x)`` exactly and ``L = 1`` on the section.
    """
    if not a > 0:
        raise SpecError("exponent must be positive")
    return math.exp(a * section_time(sys, V, level, x, t_max))


def exact_growth_lyapunov(sys, V: Callable, level: float, a: float, x, t_max: float = T_MAX) -> float:
    """Repeller dual: ``V`` increasing along orbits, ``L(phi_t x) = e^{at} L(x)``."""
    back = _Reversed(sys)
    return exact_decay_lyapunov(back, V, level, a, x, t_max)


class _Reversed:
    def __init__(self, sys):
        self.sys = sys

    def advance(self, x, t):
        return self.sys.advance(x, -t)


def linear_pseudometric(model: LinearAttractor, x, y) -> float:
    """Distance of the cone representations in the square-summable norm."""
    return float(np.linalg.norm(model.embed(x) - model.embed(y)))


@dataclass(frozen=True)
class BVPSpec:
    f: Callable[[Any], float]
    a: float = 1.0
    positive: bool = True

    def __post_init__(self):
        if not self.a > 0:
            raise SpecError(f"exponent must be a positive constant, got {self.a}")


def _sinh_ratio(p: float, q: float) -> float:
    """``sinh(p) / sinh(q)`` for ``q > 0`` and ``p`` not far above ``q``, without overflow."""
    if q == 0.0:
        return 1.0
    return math.exp(p - q) * math.expm1(-2 * p) / math.expm1(-2 * q)


def _boundary_value(spec: BVPSpec, z) -> float:
    v = float(spec.f(z))
    if spec.positive and not v > 0:
        raise SpecError(f"boundary data must be positive, got f={v}")
    return v


def _bvp_from_hits(spec: BVPSpec, ht, shifts) -> np.ndarray:
    a = spec.a
    if ht.in_Lambda:
        return np.zeros(len(shifts))
    fs = _boundary_value(spec, ht.pi_s) if ht.pi_s is not None else None
    fu = _boundary_value(spec, ht.pi_u) if ht.pi_u is not None else None
    out = []
    for s in shifts:
        t_s, t_u = ht.t_s - s, ht.t_u - s
        if ht.in_Ws:
            out.append(fs * math.exp(a * t_s))
        elif ht.in_Wu:
            out.append(fu * math.exp(-a * t_u))
        else:
            T = t_u - t_s
            if T == 0.0:
                out.append(fs)
                continue
            # ratio form of the sinh formula; also valid slightly outside [T^s, T^u]
            out.append(fs * _sinh_ratio(a * t_u, a * T) + fu * _sinh_ratio(-a * t_s, a * T))
    return np.array(out)


def catenary_bvp(sys, block: Block, spec: BVPSpec, x, T_max: float = T_MAX) -> float:
    """Solution of ``L'' = a^2 L`` along orbits with ``L = f`` on the block boundary."""
    x = sys.validate(x)
    if block.on_boundary(x):
        return _boundary_value(spec, x)
    ht = hit_times(sys, block, x, T_max)
    return float(_bvp_from_hits(spec, ht, [0.0])[0])


def catenary_bvp_field(sys, block: Block, spec: BVPSpec, T_max: float = T_MAX) -> ScalarField:
    """The boundary-value solution as a field.

    Along an orbit it shifts the hit times (``T^s(phi_s x) = T^s(x) - s``)
    instead of re-solving them, so stencils see the exact formula.
    """

    def orbit(_sys, x, ts):
        return _bvp_from_hits(spec, hit_times(sys, block, x, T_max), ts)

    return ScalarField(lambda x: catenary_bvp(sys, block, spec, x, T_max), a=spec.a, positive=spec.positive, orbit=orbit, name="bvp")


def catenary_sum_field(L_alpha: ScalarField, L_omega: ScalarField) -> ScalarField:
    """``L_alpha + L_omega`` for an exact-growth and an exact-decay field with the same exponent."""
    if L_alpha.a != L_omega.a:
        raise SpecError(f"exponent mismatch: {L_alpha.a} vs {L_omega.a}")
    orbit = None
    if L_alpha.orbit is not None or L_omega.orbit is not None:
        orbit = lambda sys, x, ts: L_alpha.along(sys, x, ts) + L_omega.along(sys, x, ts)  # noqa: E731
    return ScalarField(lambda x: L_alpha(x) + L_omega(x), a=L_alpha.a, positive=True, orbit=orbit, name="sum")


def catenary_sum_function(L_alpha: ScalarField, L_omega: ScalarField, x) -> float:
    return catenary_sum_field(L_alpha, L_omega)(x)


def catenary_sum_pseudometric(d_alpha: Callable, d_omega: Callable, x, y) -> float:
    """``d_alpha(x, y) + d_omega(x, y)``; exponents are compared when both carry one."""
    a1, a2 = getattr(d_alpha, "a", None), getattr(d_omega, "a", None)
    if a1 is not None and a2 is not None and a1 != a2:
        raise SpecError(f"exponent mismatch: {a1} vs {a2}")
    return float(d_alpha(x, y)) + float(d_omega(x, y))


def derived_decreasing(L: ScalarField, sys, x) -> float:
    """``L1 = -L'``, again catenary and strictly decreasing off the isolated set."""
    return -L.ldot(sys, x)


@dataclass
class CatenaryReport:
    n_points: int
    a: float
    max_residual: float = 0.0
    residual_witness: Any = None
    residual_cells: list = field(default_factory=list)
    hyperbolicity_violations: list = field(default_factory=list)
    positivity_violations: list = field(default_factory=list)
    drift: float = 0.0
    drift_witness: Any = None
    tol_residual: float = 1e-6
    tol_drift: float = 1e-8

    @property
    def passed(self) -> bool:
        return (
            self.max_residual <= self.tol_residual
            and self.drift <= self.tol_drift
            and not self.hyperbolicity_violations
            and not self.positivity_violations
        )

    def to_dict(self) -> dict:
        def pt(p):
            return None if p is None else np.asarray(p, dtype=float).tolist()

        return {
            "n_points": self.n_points,
            "a": self.a,
            "max_residual": self.max_residual,
            "residual_witness": pt(self.residual_witness),
            "residual_cells": [[i, pt(p), r] for i, p, r in self.residual_cells],
            "hyperbolicity_violations": [[i, pt(p)] for i, p in self.hyperbolicity_violations],
            "positivity_violations": [[i, pt(p)] for i, p in self.positivity_violations],
            "drift": self.drift,
            "drift_witness": pt(self.drift_witness),
            "tol_residual": self.tol_residual,
            "tol_drift": self.tol_drift,
            "passed": self.passed,
        }


def verify_catenary(
    L: ScalarField,
    sys,
    grid,
    drift_points=(),
    tol_residual: float = 1e-6,
    tol_drift: float = 1e-8,
    on_lambda: Callable | None = None,
    orbit_length: float = 5.0,
    orbit_samples: int = 51,
    max_cells: int = 20,
) -> CatenaryReport:
    """Check ``L'' = a^2 L`` on a grid, ``L'' > 0`` off the isolated set, and that
    ``c = L'^2 - a^2 L^2`` is constant along orbits started at ``drift_points``.
    """
    a2 = L.a * L.a
    if on_lambda is None:
        on_lambda = lambda z: L(z) == 0.0  # noqa: E731
    rep = CatenaryReport(len(grid), L.a, tol_residual=tol_residual, tol_drift=tol_drift)
    for i, x in enumerate(grid):
        val = L(x)
        ldd = L.lddot(sys, x)
        r = abs(ldd - a2 * val)
        if r > rep.max_residual:
            rep.max_residual, rep.residual_witness = r, x
        if r > tol_residual and len(rep.residual_cells) < max_cells:
            rep.residual_cells.append((i, x, r))
        if not on_lambda(x) and not ldd > 0:
            rep.hyperbolicity_violations.append((i, x))
        if L.positive and val < 0:
            rep.positivity_violations.append((i, x))
    for x in drift_points:
        c0 = None
        for t in np.linspace(0.0, orbit_length, orbit_samples):
            z = sys._raw(x, float(t))
            c = L.ldot(sys, z) ** 2 - a2 * L(z) ** 2
            c0 = c if c0 is None else c0
            if abs(c - c0) > rep.drift:
                rep.drift, rep.drift_witness = abs(c - c0), z
    return rep


def export_grid_csv(path, L: ScalarField, sys, grid) -> None:
    """Write ``coords..., L, Ldot, Lddot, residual`` rows for a grid."""
    grid = [np.atleast_1d(np.asarray(x, dtype=float)) for x in grid]
    dim = len(grid[0]) if grid else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(dim)] + ["L", "Ldot", "Lddot", "residual"])
        for x in grid:
            v, d1, d2 = L(x), L.ldot(sys, x), L.lddot(sys, x)
            w.writerow([repr(float(c)) for c in x] + [repr(v), repr(d1), repr(d2), repr(abs(d2 - L.a**2 * v))])
