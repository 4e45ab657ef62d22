"""Visual metric, cross-ratios and tripods on the boundary of F_2.

Run with ``python3 demos/04_boundary_geometry.py``.
"""

# %%
import math
import random

from sgt.boundary import BoundaryPoint, boundary_distance, cross_ratio, tripod_center

def point(*w):
    return BoundaryPoint("freegroup", w)

x, y, z = point(1, 2, 1, 1), point(1, 2, 2, 1), point(-2, 1, 1, 1)
print("d(x, y) =", boundary_distance(x, y), " d(x, z) =", boundary_distance(x, z))
print("tripod center of x, y, z:", tripod_center(x, y, z))

# %%
# The cross-ratio is always a power of two. Its exponent is minus the gap
# between the geodesics ]x1,x3[ and ]x2,x4[ when they are disjoint, plus the
# gap between ]x1,x4[ and ]x2,x3[ when those are, and zero otherwise.
rng = random.Random(0)

def ray(n=8):
    w = [rng.choice((1, -1, 2, -2))]
    while len(w) < n:
        w.append(rng.choice([a for a in (1, -1, 2, -2) if a != -w[-1]]))
    return point(*w)

for _ in range(5):
    pts = [ray() for _ in range(4)]
    if len({p.prefix[:3] for p in pts}) == 4:
        print([p.prefix[:4] for p in pts], "log2 b =", math.log2(cross_ratio(*pts)))
