"""A fake singularity: slowing the speed of a flow box to zero at one point.

On the base fiber the speed is |s|, so s' = |s| and a trajectory from -1
approaches 0 like -e^-t without reaching it; the point 0 becomes a fixed point.
"""

# %%
import math

import numpy as np

from catenary import FakeSingularitySpec, FinitePointSet, make_fake_singularity, orbit_trace

sigma = FinitePointSet([0.0, 0.5, -0.5], lambda p, q: abs(p - q))
fake = make_fake_singularity(FakeSingularitySpec(sigma, 0, lambda s, x: abs(s) + abs(x)))

for t in (1.0, 5.0, 10.0):
    u, _ = fake.advance((-1.0, 0), t).point
    print(f"t={t:4.1f}  u={u:+.10e}  -e^-t={-math.exp(-t):+.10e}")

tr = orbit_trace(fake, (-1.0, 0), 0.0, 10.0, 0.5)
us = np.array([s[0] for s in tr.states])
print("never reaches 0:", bool(np.all(us < 0)))
print("fixed point stays put:", fake.advance((0.0, 0), 3.0).point)
print("off the base fiber the orbit passes through:", fake.advance((-1.0, 1), 5.0).point)
