"""Attractors: a size-function Lyapunov function, a linear model with an
exactly decaying pseudo-metric, and exact decay L(phi_t x) = e^-at L(x).
"""

# %%
import math

import numpy as np

from catenary import (
    LinearModelSpec,
    attractor_lyapunov,
    exact_decay_lyapunov,
    farthest_point_refs,
    linear_pseudometric,
    make_linear_attractor,
)
from catenary.systems import contraction

sys = contraction()  # x' = -x, attractor at the origin

# %% Whitney size of the forward orbit: decreases along orbits, zero at the attractor
rng = np.random.default_rng(1)
refs = farthest_point_refs([tuple(p) for p in rng.uniform(-1, 1, size=(100, 2))] + [(0.0, 0.0)], depth=16)
x = np.array([0.8, -0.3])
for t in (0.0, 0.5, 1.0, 2.0, 4.0):
    print(f"t={t:3.1f}  L={attractor_lyapunov(sys, [0, 0], refs, sys(x, t)):.6f}")

# %% linear attractor: states (r, k) on the cone over a finite section
lin = make_linear_attractor(LinearModelSpec([[1.0, 0.0], [1.0, 2.0], [1.0, -1.0]]))
p, q = (0.9, 1), (0.6, 2)
d0 = linear_pseudometric(lin, p, q)
for t in (0.5, 1.0, 3.0):
    dt = linear_pseudometric(lin, lin(p, t), lin(q, t))
    print(f"t={t}: d={dt:.12f}  e^-t d0={math.exp(-t) * d0:.12f}")

# %% exact decay with a = 2 and the section |x| = 1; here L(x) = |x|^2
V = lambda z: float(np.linalg.norm(z))  # noqa: E731
for z in ([0.5, 0.0], [1.0, 1.0], [-2.0, 0.3]):
    z = np.array(z)
    print(z, "L =", exact_decay_lyapunov(sys, V, 1.0, 2.0, z), " |x|^2 =", float(z @ z))
