"""Free-group boundary: the pulled-back measure and boundary geometry.

The identification of the free-group boundary with the tree boundary is
never built as a function. For a spanning-tree presentation a geodesic
ray from the origin spells its free-group word through the non-tree darts
it crosses, and a word prefix determines the ray up to its last letter
(:meth:`Presentation.ray_prefix`); everything here goes through those two
translations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Mapping, Sequence

import numpy as np

from .covering import (CAUCHY_GATE, S_SCHEDULE_KMAX, CylinderMeasure, critical_exponent,
                       cover_distance, geometric_cutoff, hashimoto_matrix, nb_paths, perron,
                       richardson, truncated_geometric)
from .errors import ConvergenceError, ExtendPrefix, ReconstructionError
from .graph import Presentation, reduce_darts, require_valid

__all__ = [
    "BoundaryPoint",
    "letters",
    "reduced_words",
    "pullback_measure",
    "boundary_distance",
    "cross_ratio",
    "tripod_center",
    "gromov_product",
    "witness_rays",
    "reconstruct_ball",
]


@dataclass(frozen=True)
class BoundaryPoint:
    """Finite-depth approximation of a boundary point.

    ``prefix`` is a reduced dart path from the origin (``side="tree"``) or a
    reduced word (``side="freegroup"``). Longer prefixes refine shorter ones.
    """

    side: str
    prefix: tuple[int, ...]

    def __post_init__(self):
        if self.side not in ("tree", "freegroup"):
            raise ValueError(f"unknown side {self.side!r}")
        object.__setattr__(self, "prefix", tuple(self.prefix))


def letters(g: int) -> list[int]:
    """Letters in the canonical order ``x1, x1^-1, x2, x2^-1, ...``."""
    return [a for i in range(1, g + 1) for a in (i, -i)]


def reduced_words(g: int, n: int, exact: bool = False) -> list[tuple[int, ...]]:
    """Reduced words of length ``n`` (or ``<= n``) in shortlex order."""
    out = [()]
    level = [()]
    for _ in range(n):
        level = [w + (a,) for w in level for a in letters(g) if not w or a != -w[-1]]
        out.extend(level)
    return level if exact else out


# --- the pulled-back measure ----------------------------------------------

def _letter_transfer(P: Presentation, z: float):
    """Initial, transfer and closing weights of the word automaton at ``z = exp(-sL)``."""
    G = P.graph
    dist = P.tree_distance
    O = P.origin
    alphabet = letters(P.genus)
    darts = [P.letter_dart(a) for a in alphabet]
    init = np.array([z ** (dist[O][G.tail(d)] + 1) for d in darts])
    fin = np.array([z ** dist[G.head(d)][O] for d in darts])
    M = np.zeros((len(alphabet), len(alphabet)))
    for i, (a, d) in enumerate(zip(alphabet, darts)):
        for j, (b, e) in enumerate(zip(alphabet, darts)):
            if b != -a:
                M[i, j] = z ** (dist[G.head(d)][G.tail(e)] + 1)
    return alphabet, init, M, fin


def _restricted_ratios(P: Presentation, depth: int, s: float, tail_tol: float) -> dict:
    z = math.exp(-s * P.graph.length)
    alphabet, init, M, fin = _letter_transfer(P, z)
    col = {a: i for i, a in enumerate(alphabet)}
    r = float(np.max(np.abs(np.linalg.eigvals(M))))
    R = depth + geometric_cutoff(r, tail_tol)
    # words shorter than `depth` are left out of every sum (finitely many terms)
    tails = {k: truncated_geometric(M, fin, R - k) - truncated_geometric(M, fin, depth - k - 1)
             for k in range(1, depth + 1)}
    raw = {}
    for w in reduced_words(P.genus, depth):
        if not w:
            continue
        wt = init[col[w[0]]]
        for a, b in zip(w, w[1:]):
            wt *= M[col[a], col[b]]
        raw[w] = wt * tails[len(w)][col[w[-1]]]
    total = sum(raw[(a,)] for a in alphabet)
    out = {w: m / total for w, m in raw.items()}
    out[()] = 1.0
    return out


def _classify(P: Presentation, depth: int, tol: float, max_steps: int) -> tuple[dict, float, int]:
    G = P.graph
    B = hashimoto_matrix(G)
    _, v = perron(B)
    out_sum = B @ v
    table = P.dart_letter
    start = G.darts_at[P.origin]
    z = sum(v[d] for d in start)
    assigned: dict[tuple[int, ...], float] = {}
    states: dict[tuple[int, tuple[int, ...]], float] = {}

    def push(bucket, d, word, mass):
        if d in table:
            word = word + (table[d],)
        if len(word) == depth:
            assigned[word] = assigned.get(word, 0.0) + mass
        else:
            bucket[(d, word)] = bucket.get((d, word), 0.0) + mass

    for d in start:
        push(states, d, (), v[d] / z)
    steps = 1
    while states and sum(states.values()) > tol:
        if steps >= max_steps:
            raise ConvergenceError(f"geodesic classification left mass {sum(states.values()):.3g} "
                                   f"unassigned after {steps} steps")
        nxt: dict = {}
        for (d, word), mass in sorted(states.items()):
            for e in G.successors[d]:
                push(nxt, e, word, mass * v[e] / out_sum[d])
        states = nxt
        steps += 1
    return assigned, sum(states.values()), steps


def pullback_measure(P: Presentation, depth: int, method: str = "geodesic-classify",
                     tol: float = 1e-12, max_steps: int = 10_000, kmax: int = S_SCHEDULE_KMAX,
                     tail_tol: float = 1e-3, gate: float = CAUCHY_GATE) -> CylinderMeasure:
    """Masses of the free-group cylinders ``cyl(w)``, ``|w| <= depth``.

    ``"restricted-poincare"``: Poincare sums over group elements whose reduced
    word starts with ``w``, normalized and extrapolated to ``s = delta`` as
    in :func:`~sgt.covering.ps_measure_tree`. Sums are organized by the word
    automaton of the spanning-tree presentation, in which the displacement
    of ``a_1 ... a_n`` is additive over consecutive letter pairs.

    ``"geodesic-classify"``: push the tree-side Perron measure forward by
    reading each tree path's word off its non-tree darts, lengthening paths
    until at most ``tol`` mass is still short of ``depth`` letters.
    """
    G = P.graph
    require_valid(G)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    delta = critical_exponent(G)
    meta = {"method": method, "origin": P.origin, "generators": list(P.generators)}
    if method == "restricted-poincare":
        runs = [_restricted_ratios(P, depth, delta * (1 + 2.0 ** -k), tail_tol)
                for k in range(kmax - 2, kmax + 1)]
        masses = {}
        for w in runs[-1]:
            value, gap = richardson([r[w] for r in runs])
            if gap > gate:
                raise ConvergenceError(f"restricted Poincare ratios for word {list(w)} not Cauchy "
                                       f"(gap {gap:.3g} > {gate:g})")
            masses[w] = value
    elif method == "geodesic-classify":
        assigned, unassigned, steps = _classify(P, depth, tol, max_steps)
        masses = {w: 0.0 for w in reduced_words(P.genus, depth)}
        for w, m in assigned.items():
            for k in range(depth + 1):
                masses[w[:k]] += m
        meta.update(unassigned=unassigned, steps=steps)
    else:
        raise ValueError(f"unknown method {method!r}")
    return CylinderMeasure("freegroup", depth, G.length, delta, masses, meta)


# --- metric geometry -------------------------------------------------------

def _common(p: Sequence[int], q: Sequence[int]) -> int:
    n = 0
    for a, b in zip(p, q):
        if a != b:
            break
        n += 1
    return n


def gromov_product(p: BoundaryPoint, q: BoundaryPoint) -> int:
    """Number of coinciding edges of two rays from the origin."""
    if p.side != q.side:
        raise ValueError("boundary points live on different sides")
    n = _common(p.prefix, q.prefix)
    if n == min(len(p.prefix), len(q.prefix)):
        raise ExtendPrefix(f"prefixes agree on all {n} available steps; extend prefix")
    return n


def boundary_distance(p: BoundaryPoint, q: BoundaryPoint) -> float:
    """Visual distance ``2**-n``, ``n`` the length of the common prefix."""
    return 2.0 ** -gromov_product(p, q)


def cross_ratio(x1: BoundaryPoint, x2: BoundaryPoint, x3: BoundaryPoint, x4: BoundaryPoint) -> float:
    """``[d(x3, x1) / d(x3, x2)] * [d(x4, x2) / d(x4, x1)]``, always a power of two."""
    pts = (x1, x2, x3, x4)
    for a, b in combinations(pts, 2):
        gromov_product(a, b)
    d = boundary_distance
    return (d(x3, x1) / d(x3, x2)) * (d(x4, x2) / d(x4, x1))


def tripod_center(x1: BoundaryPoint, x2: BoundaryPoint, x3: BoundaryPoint) -> tuple[int, ...]:
    """Vertex where the geodesics between three boundary points meet.

    Returned as the prefix (dart path or word) leading to it from the origin.
    """
    pairs = [(x1, x2), (x1, x3), (x2, x3)]
    best = max(pairs, key=lambda pq: gromov_product(*pq))
    return best[0].prefix[: gromov_product(*best)]


# --- tree reconstruction from a boundary map -------------------------------

def witness_rays(P: Presentation, vertex: Sequence[int], length: int) -> dict[int, list[tuple[int, ...]]]:
    """Rays through a covering-tree vertex, grouped by the dart leaving it.

    For every direction two rays are built, continuing with the first and
    with the last admissible dart at each step. Rays are reduced dart paths
    from the origin.
    """
    G = P.graph
    vertex = tuple(vertex)
    end = G.head(vertex[-1]) if vertex else P.origin
    out = {}
    for d in G.darts_at[end]:
        rays = []
        for pick in (0, -1):
            walk = [d]
            for _ in range(length):
                walk.append(G.successors[walk[-1]][pick])
            rays.append(reduce_darts(vertex + tuple(walk)))
        out[d] = rays
    return out


def _image(P1: Presentation, P2: Presentation, ray: Sequence[int], letter_map) -> BoundaryPoint:
    word = P1.letters_of(ray)
    if letter_map is not None:
        word = tuple(letter_map[a] for a in word)
    return BoundaryPoint("tree", P2.ray_prefix(word))


def reconstruct_ball(P1: Presentation, P2: Presentation, radius: int,
                     letter_map: Mapping[int, int] | None = None,
                     ray_length: int | None = None, max_ray_length: int = 4096) -> dict:
    """Rebuild the map of covering trees induced by a boundary identification.

    The boundary map sends the ray spelling word ``w`` in the first
    presentation to the ray spelling ``letter_map(w)`` in the second. Every
    vertex ``x`` of the radius-``radius`` ball around the first origin is
    sent to the tripod center of the images of three rays leaving ``x`` in
    distinct directions; all such witness triples must agree, and the
    resulting vertex map must be injective and preserve adjacency.

    Returns ``{x: F(x)}`` with vertices as dart paths from the origins.
    Raises :class:`ReconstructionError` carrying the offending witnesses.
    """
    if P1.genus != P2.genus:
        raise ReconstructionError("genera differ; no equivariant boundary map", [])
    if letter_map is not None:
        letter_map = dict(letter_map)
        for a, b in list(letter_map.items()):
            if letter_map.get(-a, -b) != -b:
                raise ValueError("letter_map must commute with inversion")
            letter_map[-a] = -b
    length = ray_length or 4 * (radius + 2) * max(P1.graph.num_vertices, P2.graph.num_vertices)
    ball = nb_paths(P1.graph, P1.origin, radius, exact=False)
    witnesses = []
    F: dict[tuple[int, ...], tuple[int, ...]] = {}
    for x in ball:
        while True:
            try:
                centers = _centers(P1, P2, x, length, letter_map)
                break
            except ExtendPrefix:
                if 2 * length > max_ray_length:
                    raise
                length *= 2
        distinct = sorted(set(centers.values()))
        if len(distinct) > 1:
            by_center = {}
            for triple, c in centers.items():
                by_center.setdefault(c, triple)
            witnesses.append({"kind": "ill-defined center", "vertex": list(x),
                              "centers": [{"center": list(c), "directions": list(t)}
                                          for c, t in sorted(by_center.items())]})
        F[x] = distinct[0]
    seen: dict[tuple[int, ...], tuple[int, ...]] = {}
    for x in ball:
        if F[x] in seen:
            witnesses.append({"kind": "not injective", "vertices": [list(seen[F[x]]), list(x)],
                              "image": list(F[x])})
        seen.setdefault(F[x], x)
        if x and cover_distance(F[x[:-1]], F[x]) != 1:
            witnesses.append({"kind": "adjacency broken", "edge": [list(x[:-1]), list(x)],
                              "images": [list(F[x[:-1]]), list(F[x])],
                              "image_distance": cover_distance(F[x[:-1]], F[x])})
    if witnesses:
        raise ReconstructionError(f"tripod map is not an isometry of radius-{radius} balls "
                                  f"({len(witnesses)} witnesses)", witnesses)
    return F


def _centers(P1, P2, x, length, letter_map) -> dict[tuple, tuple[int, ...]]:
    rays = witness_rays(P1, x, length)
    images = {d: [_image(P1, P2, r, letter_map) for r in rs] for d, rs in rays.items()}
    out = {}
    for dirs in combinations(sorted(images), 3):
        for picks in product(range(2), repeat=3):
            pts = [images[d][k] for d, k in zip(dirs, picks)]
            out[tuple(zip(dirs, picks))] = tripod_center(*pts)
    return out
