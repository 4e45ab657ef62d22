"""Patterson-Sullivan measures on the boundary of a covering tree.

Run with ``python3 demos/01_measures.py``.
"""

# %%
# Two genus-2 graphs: the theta graph (two vertices, three parallel edges)
# and the dumbbell (two loops joined by a bridge). Both are 3-regular.
import numpy as np

from sgt.corpus import dumbbell, small_multigraphs, theta
from sgt.covering import critical_exponent, hashimoto_matrix, ps_measure_tree, sphere_sizes
from sgt.boundary import pullback_measure
from sgt.graph import spanning_presentation

for name, G in [("theta", theta()), ("dumbbell", dumbbell())]:
    print(name, "spheres", sphere_sizes(G, 0, 6), "delta", critical_exponent(G))

# %%
# Growth is governed by the non-backtracking (Hashimoto) matrix. For an
# irregular graph its Perron value sits between the extreme branching numbers.
G = small_multigraphs()[4]
B = hashimoto_matrix(G)
print("valencies", [G.valency(v) for v in range(G.num_vertices)])
print("Perron value", np.exp(critical_exponent(G)), "row sums", sorted(set(B.sum(axis=1))))

# %%
# Tree-side cylinder masses: the Markov (perron) construction against the
# extrapolated ratio of Poincare sums.
fast = ps_measure_tree(G, 0, 3, "perron")
slow = ps_measure_tree(G, 0, 3, "poincare")
gap = max(abs(fast[p] - slow[p]) for p in fast.masses)
print("depth-1 masses", {p: round(m, 6) for p, m in fast.level(1).items()})
print("largest disagreement", gap)

# %%
# Pulling back to the free group: cylinders of reduced words. On the theta
# graph the letters that leave through a tree edge get twice the mass.
P = spanning_presentation(theta(), 0)
nu = pullback_measure(P, 2)
for w, m in sorted(nu.level(1).items()):
    print(w, round(m, 6))
print("level-2 total", sum(nu.level(2).values()))
