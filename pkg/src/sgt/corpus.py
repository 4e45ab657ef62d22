"""Named test graphs and the exhaustive small-multigraph corpus."""

from __future__ import annotations

from itertools import combinations_with_replacement, permutations

import numpy as np

from .graph import MultiGraph, validate

__all__ = ["rose", "theta", "dumbbell", "k4", "cycle", "named_corpus",
           "small_multigraphs", "random_relabel"]


def _graph(n: int, edges, length: float = 1.0, names=None) -> MultiGraph:
    names = tuple(names or "ABCDEFGHIJKLMNOPQRSTUVWXYZ"[:n])
    return MultiGraph(names, tuple(edges), length)


def rose(g: int, length: float = 1.0) -> MultiGraph:
    """One vertex with ``g`` loops."""
    return _graph(1, [(0, 0)] * g, length)


def theta(length: float = 1.0) -> MultiGraph:
    return _graph(2, [(0, 1)] * 3, length)


def dumbbell(length: float = 1.0) -> MultiGraph:
    """Two loops joined by a bridge (3-regular, genus 2)."""
    return _graph(2, [(0, 0), (0, 1), (1, 1)], length)


def k4(length: float = 1.0) -> MultiGraph:
    return _graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], length)


def cycle(n: int) -> MultiGraph:
    return _graph(n, [(i, (i + 1) % n) for i in range(n)])


def named_corpus() -> dict[str, MultiGraph]:
    return {"rose2": rose(2), "rose3": rose(3), "theta": theta(),
            "dumbbell": dumbbell(), "k4": k4()}


def _canonical(n: int, edges) -> tuple:
    best = None
    for perm in permutations(range(n)):
        key = tuple(sorted(tuple(sorted((perm[u], perm[v]))) for u, v in edges))
        if best is None or key < best:
            best = key
    return best


def small_multigraphs(max_vertices: int = 4, max_edges: int = 7,
                      genera: tuple[int, ...] = (2, 3)) -> list[MultiGraph]:
    """Every admissible multigraph in the size window, one per isomorphism class.

    Admissible means connected with all valencies >= 3 and genus in ``genera``.
    Ordered by (vertices, edges, canonical edge list).
    """
    found = {}
    for n in range(1, max_vertices + 1):
        slots = [(u, v) for u in range(n) for v in range(u, n)]
        for g in genera:
            m = n + g - 1
            if m > max_edges:
                continue
            for edges in combinations_with_replacement(slots, m):
                key = _canonical(n, edges)
                if (n, key) in found:
                    continue
                G = _graph(n, key)
                if validate(G).ok:
                    found[(n, key)] = G
    return [found[k] for k in sorted(found, key=lambda k: (k[0], len(k[1]), k[1]))]


def random_relabel(G: MultiGraph, seed: int) -> MultiGraph:
    """Isomorphic copy with shuffled vertices, edges and edge directions."""
    rng = np.random.default_rng(seed)
    vperm = rng.permutation(G.num_vertices).tolist()
    eperm = rng.permutation(G.num_edges).tolist()
    flips = rng.integers(0, 2, G.num_edges).astype(bool).tolist()
    return G.relabel(vperm, eperm, flips)
