"""Desk-scale systems used by the tests, demos and bundled scenarios."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from .flows import ClosedFormFlow, ODEFlow


def saddle() -> ClosedFormFlow:
    """``x' = x, y' = -y`` with ``phi_t(x, y) = (x e^t, y e^-t)``."""

    def func(z, t):
        return np.asarray(z, dtype=float) * np.array([math.exp(t), math.exp(-t)])

    def batch(z, ts):
        ts = np.asarray(ts, dtype=float)
        with np.errstate(over="ignore"):
            grow = np.stack([np.exp(ts), np.exp(-ts)], axis=1)
        return np.asarray(z, dtype=float)[None, :] * grow

    return ClosedFormFlow(func, batch, name="saddle")


def saddle_field(z):
    return np.array([z[0], -z[1]])


def saddle_ode(h: float = 1e-3) -> ODEFlow:
    return ODEFlow(saddle_field, h=h, name="saddle_ode")


def linear(A) -> ClosedFormFlow:
    """Linear flow ``x' = A x`` evaluated with the matrix exponential."""
    A = np.atleast_2d(np.asarray(A, dtype=float))

    def func(z, t):
        return expm(A * t) @ np.asarray(z, dtype=float)

    def batch(z, ts):
        z = np.asarray(z, dtype=float)
        return np.array([expm(A * t) @ z for t in np.asarray(ts, dtype=float)])

    return ClosedFormFlow(func, batch, name="linear")


def contraction(rate: float = 1.0) -> ClosedFormFlow:
    """``x' = -rate x`` in any dimension."""

    def func(z, t):
        return np.asarray(z, dtype=float) * math.exp(-rate * t)

    def batch(z, ts):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return np.exp(-rate * np.asarray(ts, dtype=float))[:, None] * z[None, :]

    return ClosedFormFlow(func, batch, name="contraction")


def expansion(rate: float = 1.0) -> ClosedFormFlow:
    return contraction(-rate)


def circle_flow(speed: float = 1.0, circumference: float = 2 * math.pi) -> ClosedFormFlow:
    """Rotation of a circle; states are arc-length positions in ``[0, circumference)``."""

    def func(z, t):
        return np.mod(np.asarray(z, dtype=float) + speed * t, circumference)

    def batch(z, ts):
        return np.mod(np.asarray(z, dtype=float)[None, :] + speed * np.asarray(ts)[:, None], circumference)

    return ClosedFormFlow(func, batch, name="circle")


def circle_distance(p, q, circumference: float = 2 * math.pi) -> float:
    """Short-arc distance."""
    d = abs(float(np.ravel(p)[0]) - float(np.ravel(q)[0])) % circumference
    return min(d, circumference - d)


def l1(z):
    z = np.asarray(z, dtype=float)
    return np.abs(z).sum(axis=-1)


def saddle_hit_times(z, delta: float = 1.0) -> tuple[float, float]:
    """Closed-form ``(T^s, T^u)`` for the saddle in ``{|x| + |y| <= delta}``.

    Solves ``|x| e^t + |y| e^-t = delta``; the product of the two roots in
    ``e^t`` is ``|y|/|x|``, which gives the backward root without cancellation.
    """
    ax, ay = abs(float(z[0])), abs(float(z[1]))
    disc = delta * delta - 4 * ax * ay
    if disc < 0:
        raise ValueError("point outside the block")
    big = delta + math.sqrt(disc)
    t_u = math.log(big / (2 * ax)) if ax > 0 else math.inf
    t_s = math.log(2 * ay / big) if ay > 0 else -math.inf
    return t_s, t_u
