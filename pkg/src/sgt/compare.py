"""Measure fingerprints, the choice enumeration, and the isomorphism decision.

A fingerprint is the genus together with the vector of pulled-back
cylinder masses up to a fixed depth. Because the constant term of every
zeta function is the integral of its symbol and the trace is linear, this
vector determines the whole indexed row of zeta functions, so rows are
compared through it.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations, product
from math import factorial

import numpy as np

from .boundary import pullback_measure, reduced_words
from .errors import SGTError
from .graph import MultiGraph, require_valid, spanning_presentation, spanning_trees

__all__ = ["Choice", "Fingerprint", "CompareVerdict", "enumerate_choices", "fingerprint",
           "fingerprints", "compare", "iso_oracle"]


@dataclass(frozen=True)
class Choice:
    """Origin, spanning tree, generator order and orientations."""

    origin: int
    tree: tuple[int, ...]
    order: tuple[int, ...]
    orientation: tuple[int, ...]
    index: int = field(default=0, compare=False)

    def presentation(self, G: MultiGraph):
        return spanning_presentation(G, self.origin, self.tree, self.order, self.orientation)

    def describe(self, G: MultiGraph) -> dict:
        return {"id": self.index, "origin": G.vertices[self.origin], "tree": list(self.tree),
                "order": list(self.order), "orientation": list(self.orientation)}


@dataclass(frozen=True)
class Fingerprint:
    genus: int
    depth: int
    vector: np.ndarray
    choice: Choice | None = None

    def deviation(self, other: "Fingerprint") -> float:
        if self.genus != other.genus or self.depth != other.depth:
            return float("inf")
        return float(np.max(np.abs(self.vector - other.vector)))


@dataclass(frozen=True)
class CompareVerdict:
    outcome: str  # "Equal" or "Disjoint"
    genus_pair: tuple[int, int]
    depth: int
    tol: float
    max_deviation: float | None
    budget_truncated: bool
    witness: dict | None = None
    reached_search: bool = False

    @property
    def equal(self) -> bool:
        return self.outcome == "Equal"

    @property
    def label(self) -> str:
        if self.outcome == "Disjoint" and self.budget_truncated:
            return "disjoint-at-budget"
        return self.outcome

    def to_dict(self) -> dict:
        out = {"outcome": self.outcome, "label": self.label, "genus_pair": list(self.genus_pair),
               "depth": self.depth, "tol": self.tol, "max_deviation": self.max_deviation,
               "budget_truncated": self.budget_truncated}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def enumerate_choices(G: MultiGraph, budget: int | None = None) -> tuple[list[Choice], bool]:
    """All (origin, tree, order, orientation) choices, in a fixed order.

    Origins run over all vertices; per origin the BFS tree comes first and
    at most ``budget`` trees are used (``None``: all spanning trees). Every
    tree is combined with all ``g!`` orders and ``2**g`` orientations.
    ``budget=0`` yields the single canonical choice. Returns the choices and
    whether the tree budget truncated the enumeration.
    """
    g = require_valid(G)
    if budget == 0:
        return [Choice(0, spanning_trees(G, 0)[0], tuple(range(g)), (1,) * g, 0)], True
    out = []
    truncated = False
    for origin in range(G.num_vertices):
        trees = spanning_trees(G, origin)
        if budget is not None and len(trees) > budget:
            trees, truncated = trees[:budget], True
        for tree in trees:
            for order in permutations(range(g)):
                for orient in product((1, -1), repeat=g):
                    out.append(Choice(origin, tree, order, orient, len(out)))
    return out, truncated


def _relabel_index(g: int, depth: int, order, orientation) -> np.ndarray:
    """Index map taking the canonical-order mass vector to the permuted one.

    Generator ``i`` of the permuted basis is ``orientation[i]`` times the
    canonical generator at position ``rank(order[i])``.
    """
    words = reduced_words(g, depth)
    pos = {w: k for k, w in enumerate(words)}
    rank = {j: r for r, j in enumerate(sorted(order))}
    mapping = {}
    for i, (j, o) in enumerate(zip(order, orientation), start=1):
        mapping[i] = o * (rank[j] + 1)
        mapping[-i] = -mapping[i]
    return np.array([pos[tuple(mapping[a] for a in w)] for w in words])


def fingerprint(G: MultiGraph, depth: int, choice: Choice | None = None,
                method: str = "geodesic-classify") -> Fingerprint:
    """Fingerprint for one choice (default: the canonical one)."""
    g = require_valid(G)
    if choice is None:
        choice = enumerate_choices(G, budget=0)[0][0]
    nu = pullback_measure(choice.presentation(G), depth, method=method)
    words = reduced_words(g, depth)
    return Fingerprint(g, depth, np.array([nu.masses[w] for w in words]), choice)


def fingerprints(G: MultiGraph, depth: int, choices: list[Choice],
                 workers: int | None = None) -> np.ndarray:
    """Stacked fingerprint vectors for a list of choices (row ``k`` is ``choices[k]``).

    One measure is computed per (origin, tree); order and orientation only
    relabel letters, which permutes the vector.
    """
    g = require_valid(G)
    base_keys = sorted({(c.origin, c.tree) for c in choices})

    def base(key):
        origin, tree = key
        P = spanning_presentation(G, origin, tree)
        nu = pullback_measure(P, depth)
        return np.array([nu.masses[w] for w in reduced_words(g, depth)])

    workers = workers or int(os.environ.get("SGT_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            bases = dict(zip(base_keys, pool.map(base, base_keys)))
    else:
        bases = {k: base(k) for k in base_keys}
    cache: dict = {}
    rows = []
    for c in choices:
        key = (c.order, c.orientation)
        if key not in cache:
            cache[key] = _relabel_index(g, depth, c.order, c.orientation)
        rows.append(bases[(c.origin, c.tree)][cache[key]])
    return np.array(rows)


def _chebyshev_min(A: np.ndarray, B: np.ndarray, block: int = 64) -> np.ndarray:
    """Matrix of max-abs distances between rows of A and rows of B."""
    out = np.empty((A.shape[0], B.shape[0]))
    for i in range(0, A.shape[0], block):
        out[i:i + block] = np.max(np.abs(A[i:i + block, None, :] - B[None, :, :]), axis=2)
    return out


def compare(G1: MultiGraph, G2: MultiGraph, depth: int = 3, tol: float = 1e-4,
            budget: int | None = None, workers: int | None = None) -> CompareVerdict:
    """Decide whether the zeta-row sets of two graphs meet.

    Genera are compared first (the unit's zeta function sees only the
    genus). With equal genera, choice pairs are searched for fingerprints
    within ``tol`` in max norm; the lexicographically smallest matching
    pair of choice ids is the witness.

    Order and orientation act on fingerprints by coordinate permutations
    that preserve the max norm, so a pair matches iff some pair whose first
    member has identity order and orientation matches; only those first
    members are scanned, which yields the same smallest witness.
    """
    g1, g2 = require_valid(G1), require_valid(G2)
    if g1 != g2:
        return CompareVerdict("Disjoint", (g1, g2), depth, tol, None, False)
    c1, t1 = enumerate_choices(G1, budget)
    c2, t2 = enumerate_choices(G2, budget)
    truncated = t1 or t2
    ident = (tuple(range(g1)), (1,) * g1)
    lead = [c for c in c1 if (c.order, c.orientation) == ident]
    F1 = fingerprints(G1, depth, lead, workers)
    F2 = fingerprints(G2, depth, c2, workers)
    D = _chebyshev_min(F1, F2)
    best = float(D.min())
    hits = np.argwhere(D <= tol)
    if len(hits):
        i, j = hits[0]  # argwhere is row-major: smallest first id, then smallest second
        witness = {"first": lead[i].describe(G1), "second": c2[j].describe(G2),
                   "deviation": float(D[i, j])}
        return CompareVerdict("Equal", (g1, g2), depth, tol, float(D[i, j]), truncated,
                              witness, True)
    return CompareVerdict("Disjoint", (g1, g2), depth, tol, best, truncated, None, True)


# --- ground truth ----------------------------------------------------------

def _multiplicities(G: MultiGraph) -> np.ndarray:
    A = np.zeros((G.num_vertices, G.num_vertices), dtype=int)
    for u, v in G.edges:
        A[u, v] += 1
        if u != v:
            A[v, u] += 1
    return A


def iso_oracle(G1: MultiGraph, G2: MultiGraph, max_vertices: int = 12, max_edges: int = 20) -> bool:
    """Exact multigraph isomorphism by backtracking over vertex bijections.

    Candidate images must match valency and loop count; each partial map is
    checked against the edge multiplicities (loops on the diagonal).
    """
    for G in (G1, G2):
        if G.num_vertices > max_vertices or G.num_edges > max_edges:
            raise SGTError(f"iso_oracle is limited to {max_vertices} vertices and {max_edges} edges")
    if (G1.num_vertices, G1.num_edges) != (G2.num_vertices, G2.num_edges):
        return False
    A1, A2 = _multiplicities(G1), _multiplicities(G2)
    n = G1.num_vertices
    sig1 = [(G1.valency(v), A1[v, v]) for v in range(n)]
    sig2 = [(G2.valency(v), A2[v, v]) for v in range(n)]
    if sorted(sig1) != sorted(sig2):
        return False
    order = sorted(range(n), key=lambda v: (-G1.valency(v), v))
    image = [-1] * n
    used = [False] * n

    def extend(k):
        if k == n:
            return True
        u = order[k]
        for w in range(n):
            if used[w] or sig2[w] != sig1[u]:
                continue
            if all(A1[u, order[j]] == A2[w, image[order[j]]] for j in range(k)):
                image[u], used[w] = w, True
                if extend(k + 1):
                    return True
                image[u], used[w] = -1, False
        return False

    return extend(0)
