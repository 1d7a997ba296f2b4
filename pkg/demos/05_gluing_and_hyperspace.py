"""Metric-space utilities: Hausdorff distance, Whitney sizes, delta-cardinality,
and gluing a locally minimizing local metric into a global one by shortest paths.
"""

# %%
import numpy as np

from catenary import (
    LocalMetric,
    SymbolicPoint,
    delta_cardinality,
    farthest_point_refs,
    full_shift,
    glue_local_metric,
    hausdorff_distance,
    hyperspace_iterate,
    metric_axioms_check,
    whitney_size,
)

A = [(0.0, 0.0), (1.0, 0.0)]
B = [(0.0, 0.1), (1.0, 0.0), (0.5, 0.5)]
print("Hausdorff(A, B) =", hausdorff_distance(A, B))

rng = np.random.default_rng(2)
sample = [tuple(p) for p in rng.uniform(-1, 1, size=(50, 2))]
spec = farthest_point_refs(sample, depth=12)
print("Whitney sizes:", whitney_size(sample[:1], spec), whitney_size(sample[:3], spec), whitney_size(sample, spec))
print("0.5-cardinality of 12 points:", delta_cardinality(sample[:12], 0.5))

# %% gluing a norm-like local metric over a random sample
pts = list(rng.uniform(0, 1, size=(80, 2)))
M = np.array([[1.5, 0.3], [0.0, 0.8]])
D = LocalMetric(lambda x, y, z: float(np.linalg.norm(M @ (np.asarray(y) - np.asarray(z)))), radius=0.2)
rho = glue_local_metric(pts, 0.2, D)
print("locally minimizing violations:", len(D.minimizing_violations(pts)))
rep = metric_axioms_check(lambda i, j: rho[i, j], list(range(len(pts))), same=lambda i, j: i == j)
print(rep.summary())

# %% the shift acting on finite sets of points
orb = hyperspace_iterate(full_shift(), [SymbolicPoint(), SymbolicPoint({3})], 5, delta=0.5)
print("diameters:", np.round(orb.diameters, 4), " first above delta at n =", orb.first_large)
