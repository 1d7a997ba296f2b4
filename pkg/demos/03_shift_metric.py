"""The full 2-shift: the metric sum |x_n - y_n| lam^-|n| with
lam = (3 + sqrt 5)/2 is catenary, and the discrete boundary-value problem
follows u_{k+1} - 3 u_k + u_{k-1} = 0.
"""

# %%
import numpy as np

from catenary import (
    DiscreteCatenarySpec,
    SymbolicPoint,
    catenary_roots,
    discrete_catenary_bvp,
    full_shift,
    pair_system,
    second_difference,
    shift_metric,
)
from catenary.discrete import recurrence_residuals

ls, lu = catenary_roots()
print(f"lambda_s={ls:.12f} lambda_u={lu:.12f} product={ls * lu} sum={ls + lu}")

# %% second difference of the metric equals the metric while d < 1
f = full_shift()
x, y = SymbolicPoint({1, 4}), SymbolicPoint({1, 4, 3, -2})
d = lambda p: shift_metric(*p)  # noqa: E731
print("d =", d((x, y)), " second difference =", second_difference(d, pair_system(f), (x, y)))

# once coordinate 0 differs the relation breaks
z = SymbolicPoint({0})
print("d((), (0)) =", d((SymbolicPoint(), z)), " second difference =",
      second_difference(d, pair_system(f), (SymbolicPoint(), z)))

# %% boundary-value orbit of a pair that separates both ways
res = discrete_catenary_bvp(f, DiscreteCatenarySpec(delta=0.5, N_max=40), (x, y))
print("branch:", res.branch, " exit indices:", res.n_s, res.n_u)
print("values:", np.round(res.values, 6))
print("max recurrence residual:", np.max(np.abs(recurrence_residuals(res.values))))
