"""Telling graphs apart by their zeta rows.

Run with ``python3 demos/03_isomorphism.py``.
"""

# %%
import itertools

from sgt.boundary import reconstruct_ball
from sgt.compare import compare, enumerate_choices, fingerprint, iso_oracle
from sgt.corpus import dumbbell, random_relabel, small_multigraphs, theta
from sgt.errors import ReconstructionError
from sgt.graph import spanning_presentation

# A fingerprint is the vector of cylinder masses for one origin and one
# presentation of the fundamental group.
fp = fingerprint(theta(), 2)
print("theta fingerprint", fp.vector.round(4))
print("choices on theta", len(enumerate_choices(theta())[0]))

# %%
# Same graph under a random relabeling: some pair of choices matches.
v = compare(theta(), random_relabel(theta(), 3))
print(v.outcome, v.witness)

# theta and dumbbell share genus and valencies but not their measures.
v = compare(theta(), dumbbell())
print(v.outcome, "closest fingerprints differ by", v.max_deviation)

# %%
# Against the brute-force oracle on every admissible multigraph with at
# most 4 vertices and 7 edges.
graphs = small_multigraphs()
agree = sum(compare(a, b).equal == iso_oracle(a, b) for a, b in itertools.combinations(graphs, 2))
print(f"{agree} of {len(graphs) * (len(graphs) - 1) // 2} pairs agree with the oracle")

# %%
# The boundary map between two presentations rebuilds a tree isometry when
# the graphs match and breaks down otherwise.
P = spanning_presentation(theta(), 0)
print("identity ball size", len(reconstruct_ball(P, P, 3)))
try:
    reconstruct_ball(P, spanning_presentation(dumbbell(), 0), 2)
except ReconstructionError as exc:
    print(exc)
    print("first witness", exc.witnesses[0])
