"""The saddle x' = x, y' = -y and the catenary function L = |x| + |y|.

Along an orbit L(phi_t(x, y)) = |x| e^t + |y| e^-t, so L'' = L.  We check this
on a grid, rebuild L from its boundary values alone, and look at the hit times.
"""

# %%
import math

import numpy as np

from catenary import BVPSpec, Block, ScalarField, catenary_bvp, catenary_sum_field, hit_times, verify_catenary
from catenary.systems import l1, saddle, saddle_hit_times

sys = saddle()
block = Block(l1, 1.0, lam=[[0.0, 0.0]], vectorized=True)  # the diamond |x|+|y| <= 1

# %% L as the sum of a growth part |x| and a decay part |y|
L = catenary_sum_field(ScalarField(lambda z: abs(z[0])), ScalarField(lambda z: abs(z[1])))
g = np.linspace(-0.5, 0.5, 40)
grid = [np.array([a, b]) for a in g for b in g]
rep = verify_catenary(L, sys, grid, drift_points=[np.array([0.003, 0.9])])
print(f"max |L'' - L| on {len(grid)} points: {rep.max_residual:.2e}")
print(f"drift of L'^2 - L^2 along an orbit: {rep.drift:.2e}")
print("passed:", rep.passed)

# %% hit times of (0.1, 0.5): roots of 0.1 e^t + 0.5 e^-t = 1
x = np.array([0.1, 0.5])
ht = hit_times(sys, block, x)
print("T^u =", ht.t_u, " closed form", math.log((1 + math.sqrt(0.8)) / 0.2))
print("T^s =", ht.t_s, " closed form", math.log((1 - math.sqrt(0.8)) / 0.2))

# %% the boundary-value problem with f = 1 on the boundary gives back |x|+|y|
spec = BVPSpec(lambda z: 1.0)
for z in ([0.1, 0.5], [0.0, 0.5], [0.3, 0.0], [0.0, 0.0], [-0.2, 0.25]):
    print(z, "bvp:", round(catenary_bvp(sys, block, spec, z), 12), " |x|+|y|:", l1(z))

# %% a few closed-form hit times across the block
rng = np.random.default_rng(0)
for z in rng.uniform(-0.4, 0.4, size=(4, 2)):
    ts, tu = saddle_hit_times(z)
    print(np.round(z, 3), f"T^s={ts:+.4f} T^u={tu:+.4f} T={tu - ts:.4f}")
