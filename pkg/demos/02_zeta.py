"""Zeta functions of cylinder symbols and what they remember.

Run with ``python3 demos/02_zeta.py``.
"""

# %%
import mpmath

from sgt.boundary import pullback_measure
from sgt.corpus import dumbbell
from sgt.graph import spanning_presentation
from sgt.spectral import Symbol, detail_coefficients, genus_from_zeta, zeta_eval, zeta_one_closed

# The unit's zeta function depends only on the genus and has a closed form.
for s in (-3.0, -2.0, -1.0, -0.5):
    value, bound = zeta_eval(Symbol.one(), None, s, 25, g=2)
    print(f"s={s:5}  series={value:.12f}  closed={zeta_one_closed(2, s):.12f}  bound={bound:.1e}")

# %%
# Far to the left the correction term identifies the genus. Double precision
# runs out for g >= 3, so the samples are taken in mpmath.
with mpmath.workdps(60):
    samples = [(s, zeta_one_closed(5, mpmath.mpf(s))) for s in (-5, -6, -7)]
print("recovered genus", genus_from_zeta(samples))

# %%
# Cylinder symbols see the measure: at s = -30 only the first detail
# coefficient survives, and it is the cylinder mass.
G = dumbbell()
nu = pullback_measure(spanning_presentation(G, 0), 2)
for w in [(1,), (-2,), (1, 2)]:
    a = Symbol.cylinder(w)
    value, _ = zeta_eval(a, nu, -30.0, 25)
    print(w, "zeta", value, "mass", nu[w], "c_n", [round(float(c), 4) for c in detail_coefficients(a, nu, 4)])
