"""Suspension of the full shift with return time ln lam_u.

The discrete catenary relation shows up on the suspension at integer times,
and the local cross sections H_eps(x) = {theta_x(y) = theta_x(x)} carry a
sectional metric that is catenary along the reparametrized product flow.
"""

# %%
import numpy as np

from catenary import PairSuspension, SymbolicPoint, full_shift
from catenary import sections as sec
from catenary.discrete import recurrence_residuals, suspension_catenary_orbit

susp = PairSuspension(full_shift(), delta=0.5)
pair = (SymbolicPoint(), SymbolicPoint({4, -3}))
ks, vals = suspension_catenary_orbit(susp, pair, 10)
print("k:", ks)
print("L at integer times:", np.round(vals, 6))
print("recurrence residual:", np.max(np.abs(recurrence_residuals(vals))))

# %% cross sections
flow = sec.suspended_shift()
T = flow.period
dist = sec.suspension_shift_distance(T)
x = sec.shift_state(0.4, 1, -2, 5)
rng = np.random.default_rng(0)
pairs = [(x, (float(np.mod(0.4 + rng.uniform(-0.1, 0.1), T)), SymbolicPoint(x[1].support ^ {int(rng.integers(3, 9))})))
         for _ in range(100)]
spec = sec.fit_section_spec(flow, dist, pairs, delta=0.2, eps=0.4)
print(f"fitted a = {spec.a:.4f} (tau={spec.tau}, delta={spec.delta})")

# a point on the orbit of x projects back by exactly its time offset
print("offset recovered:", sec.section_project(flow, x, flow(x, 0.13), 0.0, spec))

# %% companions in the section and the reparametrization h(t)
y = sec._project(flow, x, (0.4, SymbolicPoint(x[1].support ^ {4})), 0.0, spec).point
z = sec._project(flow, x, (0.4, SymbolicPoint(x[1].support ^ {-5})), 0.0, spec).point
tr = sec.reparametrize(flow, x, y, 1.0, spec)
print("h(t):", np.round(tr.hs, 4), " increasing:", tr.increasing)

dpair = sec.suspension_section_pseudometric(T)
chk = sec.sectional_catenary_residual(flow, dpair, x, y, z, spec)
print(f"D_x(y, z) = {chk.value:.6f}, |D'' - D| = {chk.residual:.2e}")
