"""Evaluators for flows and partial flows.

Every system exposes ``advance(x, t) -> FlowResult``.  A system may carry a
domain indicator ``g`` (interior iff ``g(x) <= 0``); leaving the domain ends
the orbit with an ``exited`` result whose exit time is refined by root
bracketing.  The same marching core (:func:`first_exit`) drives the block hit
times in :mod:`catenary.blocks`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DivergenceError, DomainError, SpecError
from .metric import FinitePointSet, euclidean

INTERIOR = "interior"
EXITED = "exited"

TIME_TOL = 1e-12  # root-bracketing tolerance on exit times, tighter than the 1e-9 contract
BAND = 1e-9  # indicator values in (0, BAND] still count as inside


@dataclass
class FlowResult:
    status: str
    point: Any = None
    t_exit: float | None = None
    exit_point: Any = None

    @property
    def interior(self) -> bool:
        return self.status == INTERIOR


@dataclass
class Exit:
    """Outcome of marching a state while watching an indicator."""

    t: float
    state: Any
    exited: bool
    samples: list = field(default_factory=list)


class FlowSystem:
    """Base class. Subclasses implement ``_step(x, dt)``.

    ``_step`` must be exact for closed forms and a single integrator step
    for ODE systems (``|dt| <= h``).
    """

    kind = "abstract"
    scan_step = 1e-2

    def __init__(self, domain: Callable | None = None):
        self.domain = domain

    def validate(self, x):
        return x

    def _step(self, x, dt):
        raise NotImplementedError

    def _next_dt(self, x, remaining, direction=1):
        return min(self.scan_step, remaining)

    def _raw(self, x, t):
        """State at time ``t`` ignoring the domain."""
        return x if t == 0 else self._step(x, t)

    def advance(self, x, t: float) -> FlowResult:
        x = self.validate(x)
        if t == 0:
            return FlowResult(INTERIOR, x)
        if self.domain is None:
            return FlowResult(INTERIOR, self._raw(x, t))
        if self.domain(x) > BAND:
            raise DomainError("state outside the flow domain")
        ex = first_exit(self, x, self.domain, 0.0, abs(t), 1 if t > 0 else -1)
        if ex.exited:
            return FlowResult(EXITED, None, ex.t, ex.state)
        return FlowResult(INTERIOR, ex.state)

    def __call__(self, x, t: float):
        """Shorthand for ``advance(x, t).point``; raises when the orbit exits."""
        res = self.advance(x, t)
        if not res.interior:
            raise DomainError(f"orbit leaves the domain at t={res.t_exit:.12g}")
        return res.point


def first_exit(
    sys: FlowSystem,
    x,
    indicator: Callable,
    level: float,
    t_max: float,
    direction: int,
    band: float = BAND,
    keep_samples: bool = False,
    vectorized: bool = False,
) -> Exit:
    """March from ``x`` for ``t_max`` time units watching ``indicator - level``.

    The first time the excess becomes positive is refined by Brent's method
    inside the last scan segment.  The returned time is signed.
    """
    excess = lambda z: indicator(z) - level  # noqa: E731
    if vectorized and hasattr(sys, "batch") and sys.domain is None:
        return _first_exit_batch(sys, x, excess, t_max, direction, band, keep_samples)
    samples = [x] if keep_samples else []
    done, state = 0.0, x
    while done < t_max:
        dt = min(sys._next_dt(state, t_max - done, direction), t_max - done)
        nxt = sys._step(state, direction * dt)
        if excess(nxt) > band:
            if excess(state) > 0.0:
                return Exit(direction * done, state, True, samples)
            tau = brentq(lambda s: excess(sys._step(state, direction * s)), 0.0, dt, xtol=TIME_TOL)
            return Exit(direction * (done + tau), sys._step(state, direction * tau), True, samples)
        done += dt
        state = nxt
        if keep_samples:
            samples.append(state)
    return Exit(direction * t_max, state, False, samples)


def _first_exit_batch(sys, x, excess, t_max, direction, band, keep_samples):
    n = max(int(math.ceil(t_max / sys.scan_step)), 1)
    ts = np.linspace(0.0, t_max, n + 1)
    states = sys.batch(x, direction * ts)
    vals = excess(states)
    out = np.nonzero(vals[1:] > band)[0]
    samples = list(states) if keep_samples else []
    if out.size == 0:
        return Exit(direction * t_max, states[-1], False, samples)
    k = out[0] + 1
    if vals[k - 1] > 0.0:
        return Exit(direction * ts[k - 1], states[k - 1], True, samples[:k])
    g = lambda s: excess(sys._step(x, direction * s))  # noqa: E731
    tau = brentq(g, ts[k - 1], ts[k], xtol=TIME_TOL)
    return Exit(direction * tau, sys._step(x, direction * tau), True, samples[:k])


class ClosedFormFlow(FlowSystem):
    """Flow given by an exact formula ``func(x, t)``.

    ``batch(x, ts)``, when supplied, evaluates a whole time grid at once and
    returns an array of shape ``(len(ts), dim)``.
    """

    kind = "closed_form"

    def __init__(self, func, batch=None, domain=None, scan_step=1e-2, name="closed_form"):
        super().__init__(domain)
        self.func = func
        if batch is not None:
            self.batch = batch
        self.scan_step = scan_step
        self.name = name

    def validate(self, x):
        return np.asarray(x, dtype=float)

    def _step(self, x, dt):
        return self.func(x, dt)

    def _raw(self, x, t):
        return self.func(x, t)


def rk4_step(f, x, dt):
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class ODEFlow(FlowSystem):
    """Autonomous vector field integrated by fixed-step RK4 with a final partial step."""

    kind = "ode"

    def __init__(self, field: Callable, h: float = 1e-3, domain=None, name="ode"):
        super().__init__(domain)
        if h <= 0:
            raise SpecError("step h must be positive")
        self.field = field
        self.h = h
        self.scan_step = h
        self.name = name

    def validate(self, x):
        return np.asarray(x, dtype=float)

    def _step(self, x, dt):
        y = rk4_step(self.field, x, dt)
        if not np.all(np.isfinite(y)):
            raise DivergenceError("non-finite state during integration", 0.0)
        return y

    def _raw(self, x, t):
        n = int(abs(t) // self.h)
        rest = abs(t) - n * self.h
        sign = 1.0 if t > 0 else -1.0
        state = x
        for i in range(n):
            nxt = rk4_step(self.field, state, sign * self.h)
            if not np.all(np.isfinite(nxt)):
                raise DivergenceError("non-finite state during integration", sign * i * self.h)
            state = nxt
        if rest > 0:
            nxt = rk4_step(self.field, state, sign * rest)
            if not np.all(np.isfinite(nxt)):
                raise DivergenceError("non-finite state during integration", sign * n * self.h)
            state = nxt
        return state


@dataclass(frozen=True)
class LinearModelSpec:
    """Image of a cross section embedded in the hyperplane ``{v_1 = 1}``."""

    section: np.ndarray

    def __post_init__(self):
        sec = np.atleast_2d(np.asarray(self.section, dtype=float))
        if sec.size == 0:
            raise SpecError("empty section")
        if not np.all(np.isfinite(sec)):
            raise SpecError("section coordinates must be finite")
        if not np.all(sec[:, 0] == 1.0):
            raise SpecError("every section point needs first coordinate exactly 1")
        object.__setattr__(self, "section", sec)


class LinearAttractor(FlowSystem):
    """``psi_t(v) = e^{-t} v`` on the cone over a section.

    States are pairs ``(r, k)`` standing for ``r * section[k]``.  Backward
    orbits leave the cone once ``r e^{-t}`` exceeds 1.
    """

    kind = "linear_model"

    def __init__(self, spec: LinearModelSpec):
        super().__init__(None)
        self.spec = spec

    def validate(self, x):
        r, k = x
        if not 0.0 <= r <= 1.0:
            raise DomainError(f"cone coordinate r={r} outside [0, 1]")
        if not 0 <= int(k) < len(self.spec.section):
            raise DomainError(f"section index {k} out of range")
        return (float(r), int(k))

    def _step(self, x, dt):
        return (x[0] * math.exp(-dt), x[1])

    def advance(self, x, t):
        r, k = self.validate(x)
        if r * math.exp(-t) > 1.0:
            return FlowResult(EXITED, None, math.log(r), (1.0, k))
        return FlowResult(INTERIOR, (r * math.exp(-t), k))

    def embed(self, x) -> np.ndarray:
        r, k = self.validate(x)
        if r == 0.0:
            return np.zeros(self.spec.section.shape[1])
        return r * self.spec.section[k]


def make_linear_attractor(spec: LinearModelSpec) -> LinearAttractor:
    return LinearAttractor(spec)


class SuspensionFlow(FlowSystem):
    """Suspension of an invertible map with return time ``1/nu``.

    States are ``(s, x)`` with ``s`` in ``[0, 1/nu)``; crossing ``s = 1/nu``
    applies the map once.  ``base`` needs ``forward`` and ``backward``.
    """

    kind = "suspension"

    def __init__(self, base, nu: float, domain=None, scan_step: float | None = None):
        super().__init__(domain)
        if nu <= 0:
            raise SpecError("nu must be positive")
        self.base = base
        self.nu = float(nu)
        self.period = 1.0 / self.nu
        self.scan_step = scan_step if scan_step is not None else self.period

    def validate(self, x):
        s, p = x
        if not 0.0 <= s < self.period:
            raise DomainError(f"fiber coordinate {s} outside [0, {self.period})")
        return (float(s), p)

    def _normalize(self, u):
        T = self.period
        n = math.floor(u / T)
        r = u - n * T
        tol = 1e-12 * (1.0 + abs(u))
        if r > T - tol:
            n, r = n + 1, 0.0
        elif r < tol:
            r = 0.0
        return n, r

    def _iterate(self, p, n):
        step = self.base.forward if n > 0 else self.base.backward
        for _ in range(abs(n)):
            p = step(p)
        return p

    def _step(self, x, dt):
        s, p = x
        n, r = self._normalize(s + dt)
        return (r, self._iterate(p, n))

    def _raw(self, x, t):
        return self._step(x, t)

    def _next_dt(self, x, remaining, direction=1):
        # stop at fiber wraps so that segments never straddle an application of the map
        s = x[0]
        to_wrap = self.period - s if direction > 0 else s
        return min(self.scan_step, remaining, to_wrap if to_wrap > 0 else self.period)

    def wraps(self, x, t) -> int:
        return self._normalize(x[0] + t)[0]


def make_suspension(f, nu: float, domain=None) -> SuspensionFlow:
    return SuspensionFlow(f, nu, domain)


@dataclass(frozen=True)
class FakeSingularitySpec:
    """Speed ``W(s, x)`` on ``R x Sigma`` vanishing only at ``p = (0, x_0)``."""

    sigma: FinitePointSet
    base_index: int
    speed: Callable[[float, Any], float]
    h: float = 1e-3

    def __post_init__(self):
        sig = self.sigma if isinstance(self.sigma, FinitePointSet) else FinitePointSet(self.sigma, euclidean)
        object.__setattr__(self, "sigma", sig)
        if not 0 <= self.base_index < len(sig):
            raise SpecError("base index out of range")

    @property
    def base_point(self):
        return self.sigma[self.base_index]

    @property
    def p(self):
        return (0.0, self.base_index)

    @property
    def x_s(self):
        return (-1.0, self.base_index)

    @property
    def x_u(self):
        return (1.0, self.base_index)

    def check(self, n_fiber: int = 41):
        """Raise SpecError unless the sampled invariants hold."""
        W, x0 = self.speed, self.base_point
        if W(0.0, x0) != 0.0:
            raise SpecError("speed must vanish at the fake singularity")
        for k, x in enumerate(self.sigma):
            for s in np.linspace(-1.0, 1.0, n_fiber):
                w = W(float(s), x)
                if w < 0:
                    raise SpecError(f"negative speed {w} at s={s}, sigma index {k}")
                if w == 0 and not (s == 0 and k == self.base_index):
                    raise SpecError(f"speed vanishes away from p at s={s}, sigma index {k}")
        # sufficient condition for a divergent time integral: W(s) <= C|s| near 0
        ladder = 10.0 ** -np.arange(1, 9)
        for side in (-1.0, 1.0):
            ratios = np.array([W(side * s, x0) / s for s in ladder])
            if ratios[-1] > 2.0 * ratios[0]:
                raise SpecError(
                    "speed is not Lipschitz-small at p on the base fiber; the approach time may be finite"
                )


class FakeSingularityFlow(FlowSystem):
    """Horizontal flow ``(s, x) -> (u(t), x)`` with ``du/dt = W(u, x)``.

    States are ``(u, k)`` with ``k`` indexing the section sample.
    """

    kind = "fake_singularity"

    def __init__(self, spec: FakeSingularitySpec):
        super().__init__(None)
        self.spec = spec
        self.h = spec.h

    def validate(self, x):
        u, k = x
        if not 0 <= int(k) < len(self.spec.sigma):
            raise DomainError(f"section index {k} out of range")
        return (float(u), int(k))

    def _w(self, u, xk):
        w = self.spec.speed(u, xk)
        if w < 0:
            raise SpecError(f"negative speed {w} at u={u}")
        return w

    def _step_fiber(self, u, xk, dt, pinned):
        while True:
            f = lambda v: dt * self._w(v, xk)  # noqa: E731
            k1 = f(u)
            k2 = f(u + 0.5 * k1)
            k3 = f(u + 0.5 * k2)
            k4 = f(u + k3)
            v = u + (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
            # a fiber through p is never crossed in finite time
            if pinned and u != 0.0 and (v == 0.0 or (v > 0) != (u > 0)):
                dt *= 0.5
                continue
            return v

    def _step(self, x, dt):
        return self._integrate(x, dt)

    def _integrate(self, x, t):
        u, k = x
        xk = self.spec.sigma[k]
        pinned = self.spec.speed(0.0, xk) == 0.0
        if pinned and u == 0.0:
            return (0.0, k)
        sign = 1.0 if t > 0 else -1.0
        done = 0.0
        while done < abs(t):
            dt = min(self.h, abs(u) / 2 + 1e-12, abs(t) - done)
            u = self._step_fiber(u, xk, sign * dt, pinned)
            if not math.isfinite(u):
                raise DivergenceError("fiber coordinate diverged", sign * done)
            done += dt
        return (u, k)

    def _raw(self, x, t):
        return self._integrate(x, t)


def make_fake_singularity(spec: FakeSingularitySpec, check: bool = True) -> FakeSingularityFlow:
    if check:
        spec.check()
    return FakeSingularityFlow(spec)


@dataclass
class Trace:
    times: np.ndarray
    states: list
    exit_time: float | None = None
    exit_point: Any = None


def orbit_trace(sys: FlowSystem, x, t0: float, t1: float, step: float, indicator=None, level: float = 0.0) -> Trace:
    """States at ``t0, t0+step, ...`` up to ``t1``, truncated at the first exit.

    ``indicator`` (interior iff ``indicator(z) <= level``) adds a block on top
    of the system's own domain.
    """
    if not t0 < t1:
        raise DomainError("orbit_trace needs t0 < t1")
    res = sys.advance(x, t0)
    if not res.interior:
        raise DomainError("starting time lies outside the maximal interval")
    state = res.point
    if indicator is not None and indicator(state) - level > BAND:
        raise DomainError("starting state outside the block")
    n = int(math.floor((t1 - t0) / step + 1e-9))
    times, states = [t0], [state]
    for i in range(1, n + 1):
        t_prev = times[-1]
        t_next = t0 + i * step
        dt = t_next - t_prev
        if indicator is not None:
            ex = first_exit(sys, state, indicator, level, dt, 1)
            if ex.exited:
                return Trace(np.array(times), states, t_prev + ex.t, ex.state)
            nxt = sys.advance(state, dt)
        else:
            nxt = sys.advance(state, dt)
        if not nxt.interior:
            return Trace(np.array(times), states, t_prev + nxt.t_exit, nxt.exit_point)
        state = nxt.point
        times.append(t_next)
        states.append(state)
    return Trace(np.array(times), states)
