"""Finite multigraphs in dart form and free-group presentations of their
fundamental groups.

Darts (half-edges) are integers. Edge ``k`` joining ``u`` and ``v`` owns
dart ``2k`` (``u -> v``) and dart ``2k + 1`` (``v -> u``), so the reversal
involution is ``d ^ 1``. A loop contributes two darts at the same vertex.

Free-group letters are signed generator indices: ``+i`` is ``x_i`` and
``-i`` is its inverse (``i`` is 1-based).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

from .errors import GraphFormatError, HypothesisError

__all__ = [
    "MultiGraph",
    "ValidationReport",
    "Presentation",
    "parse_graph",
    "format_graph",
    "betti",
    "validate",
    "require_valid",
    "free_reduce",
    "reduce_darts",
    "reverse_path",
    "bfs_tree",
    "spanning_trees",
    "spanning_presentation",
]


def reverse(d: int) -> int:
    return d ^ 1


@dataclass(frozen=True)
class MultiGraph:
    """Connected-or-not multigraph with loops and parallel edges.

    Parameters
    ----------
    vertices : tuple of str
        Vertex ids, in file order. Internally vertices are their indices.
    edges : tuple of (int, int)
        Endpoint indices of each edge; ``(u, u)`` is a loop.
    length : float
        The common edge length ``L`` of the covering tree metric.
    """

    vertices: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    length: float = 1.0

    def __post_init__(self):
        if not self.length > 0 or not math.isfinite(self.length):
            raise GraphFormatError(f"edge length must be a positive real, got {self.length!r}")
        n = len(self.vertices)
        if len(set(self.vertices)) != n:
            raise GraphFormatError("duplicate vertex id")
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u}, {v}) references a missing vertex")

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_darts(self) -> int:
        return 2 * len(self.edges)

    def tail(self, d: int) -> int:
        return self.edges[d >> 1][d & 1]

    def head(self, d: int) -> int:
        return self.edges[d >> 1][1 - (d & 1)]

    @cached_property
    def darts_at(self) -> tuple[tuple[int, ...], ...]:
        """Darts grouped by tail vertex, each group in dart order."""
        out: list[list[int]] = [[] for _ in self.vertices]
        for d in range(self.num_darts):
            out[self.tail(d)].append(d)
        return tuple(tuple(x) for x in out)

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        """Non-backtracking successors of every dart."""
        return tuple(
            tuple(e for e in self.darts_at[self.head(d)] if e != reverse(d))
            for d in range(self.num_darts)
        )

    def valency(self, v: int) -> int:
        return len(self.darts_at[v])

    def index(self, name: str) -> int:
        try:
            return self.vertices.index(name)
        except ValueError:
            raise KeyError(f"unknown vertex {name!r}") from None

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for d in self.darts_at[u]:
                w = self.head(d)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.num_vertices

    def with_length(self, length: float) -> "MultiGraph":
        return MultiGraph(self.vertices, self.edges, length)

    def relabel(self, vertex_perm: Sequence[int], edge_perm: Sequence[int] | None = None,
                flips: Sequence[bool] | None = None) -> "MultiGraph":
        """Isomorphic copy: vertex ``i`` becomes vertex ``vertex_perm[i]``.

        ``edge_perm[k]`` is the new position of edge ``k`` and ``flips[k]``
        reverses its stored direction.
        """
        n, m = self.num_vertices, self.num_edges
        edge_perm = list(range(m)) if edge_perm is None else list(edge_perm)
        flips = [False] * m if flips is None else list(flips)
        names = [""] * n
        for i, name in enumerate(self.vertices):
            names[vertex_perm[i]] = name
        edges: list[tuple[int, int]] = [(0, 0)] * m
        for k, (u, v) in enumerate(self.edges):
            a, b = vertex_perm[u], vertex_perm[v]
            edges[edge_perm[k]] = (b, a) if flips[k] else (a, b)
        return MultiGraph(tuple(names), tuple(edges), self.length)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking the standing hypotheses on a graph.

    ``failures`` holds ``(hypothesis, witness, message)`` triples; the
    witness is a vertex id or ``None`` for global properties.
    """

    failures: tuple[tuple[str, str | None, str], ...] = ()
    genus: int | None = None

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok

    def messages(self) -> list[str]:
        return [msg for _, _, msg in self.failures]


# --- file format -----------------------------------------------------------

def parse_graph(text: str) -> MultiGraph:
    """Parse the line-oriented graph format.

    ``# comment``, ``L <positive real>`` (at most once), ``v <id>`` and
    ``e <u> <v>``. No hypothesis checks are made here; see :func:`validate`.
    """
    names: list[str] = []
    lookup: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    length = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        if kind == "v":
            if len(tok) != 2:
                raise GraphFormatError("expected 'v <id>'", lineno)
            if tok[1] in lookup:
                raise GraphFormatError(f"duplicate vertex {tok[1]!r}", lineno)
            lookup[tok[1]] = len(names)
            names.append(tok[1])
        elif kind == "e":
            if len(tok) == 4:
                raise GraphFormatError("per-edge lengths are not supported; use a single 'L' line",
                                       lineno)
            if len(tok) != 3:
                raise GraphFormatError("expected 'e <u> <v>'", lineno)
            ends = []
            for name in tok[1:]:
                if name not in lookup:
                    raise GraphFormatError(f"unknown vertex {name!r}", lineno)
                ends.append(lookup[name])
            edges.append((ends[0], ends[1]))
        elif kind == "L":
            if length is not None:
                raise GraphFormatError("edge length given twice", lineno)
            if len(tok) != 2:
                raise GraphFormatError("expected 'L <positive-real>'", lineno)
            try:
                length = float(tok[1])
            except ValueError:
                raise GraphFormatError(f"bad edge length {tok[1]!r}", lineno) from None
            if not (length > 0 and math.isfinite(length)):
                raise GraphFormatError(f"edge length must be positive, got {tok[1]}", lineno)
        else:
            raise GraphFormatError(f"unknown directive {kind!r}", lineno)
    return MultiGraph(tuple(names), tuple(edges), 1.0 if length is None else length)


def format_graph(G: MultiGraph) -> str:
    lines = []
    if G.length != 1.0:
        lines.append(f"L {G.length!r}")
    lines += [f"v {name}" for name in G.vertices]
    lines += [f"e {G.vertices[u]} {G.vertices[v]}" for u, v in G.edges]
    return "\n".join(lines) + "\n"


# --- hypotheses ------------------------------------------------------------

def betti(G: MultiGraph) -> int:
    """First Betti number ``#edges - #vertices + 1`` of a connected graph."""
    if not G.is_connected():
        raise HypothesisError("graph is disconnected; genus is undefined")
    return G.num_edges - G.num_vertices + 1


def validate(G: MultiGraph) -> ValidationReport:
    failures = []
    connected = G.is_connected()
    if not connected:
        failures.append(("connected", None, "graph is disconnected"))
    for v, name in enumerate(G.vertices):
        k = G.valency(v)
        if k < 3:
            failures.append(("valency", name, f"valency {k} at {name}"))
    genus = G.num_edges - G.num_vertices + 1 if connected else None
    if genus is not None and genus < 2:
        failures.append(("genus", None, f"genus {genus}"))
    return ValidationReport(tuple(failures), genus)


def require_valid(G: MultiGraph) -> int:
    """Raise :class:`HypothesisError` unless ``G`` is admissible; return the genus."""
    report = validate(G)
    if not report.ok:
        raise HypothesisError("; ".join(report.messages()))
    return report.genus


# --- words and walks -------------------------------------------------------

def free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    """Cancel adjacent inverse pairs ``x x^-1`` until none remain."""
    out: list[int] = []
    for a in letters:
        if a == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def reduce_darts(darts: Iterable[int]) -> tuple[int, ...]:
    """Free reduction of a dart walk (cancels ``d`` followed by its reverse)."""
    out: list[int] = []
    for d in darts:
        if out and out[-1] == reverse(d):
            out.pop()
        else:
            out.append(d)
    return tuple(out)


def reverse_path(darts: Sequence[int]) -> tuple[int, ...]:
    return tuple(reverse(d) for d in reversed(darts))


# --- spanning trees --------------------------------------------------------

def bfs_tree(G: MultiGraph, origin: int) -> tuple[int, ...]:
    """Edge indices of the BFS spanning tree from ``origin``, darts in file order."""
    seen = {origin}
    queue = deque([origin])
    tree = []
    while queue:
        u = queue.popleft()
        for d in G.darts_at[u]:
            w = G.head(d)
            if w not in seen:
                seen.add(w)
                tree.append(d >> 1)
                queue.append(w)
    if len(seen) != G.num_vertices:
        raise HypothesisError("graph is disconnected")
    return tuple(sorted(tree))


def _is_spanning_tree(G: MultiGraph, edge_ids: Sequence[int]) -> bool:
    parent = list(range(G.num_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k in edge_ids:
        a, b = (find(x) for x in G.edges[k])
        if a == b:
            return False
        parent[a] = b
    return True


def spanning_trees(G: MultiGraph, origin: int | None = None) -> list[tuple[int, ...]]:
    """All spanning trees as sorted edge-index tuples.

    The BFS tree from ``origin`` (default vertex 0) comes first; the rest
    follow in lexicographic order. Parallel edges give distinct trees.
    """
    first = bfs_tree(G, 0 if origin is None else origin)
    candidates = [k for k, (u, v) in enumerate(G.edges) if u != v]
    trees = [first]
    for combo in combinations(candidates, G.num_vertices - 1):
        if combo != first and _is_spanning_tree(G, combo):
            trees.append(combo)
    return trees


@dataclass(frozen=True)
class Presentation:
    """A free basis of the fundamental group at ``origin`` read off a spanning tree.

    ``generators[i]`` is the oriented non-tree dart of generator ``x_{i+1}``;
    ``loop_reps[i]`` its closed reduced dart walk at the origin.
    """

    graph: MultiGraph
    origin: int
    tree: tuple[int, ...]
    generators: tuple[int, ...]
    parent: tuple[int | None, ...] = field(repr=False)

    @property
    def genus(self) -> int:
        return len(self.generators)

    def letter_dart(self, a: int) -> int:
        d = self.generators[abs(a) - 1]
        return d if a > 0 else reverse(d)

    @cached_property
    def dart_letter(self) -> dict[int, int]:
        """Non-tree dart -> signed letter."""
        out = {}
        for i, d in enumerate(self.generators, start=1):
            out[d] = i
            out[reverse(d)] = -i
        return out

    def path_to_root(self, v: int) -> tuple[int, ...]:
        """Tree darts leading from ``v`` to the origin."""
        out = []
        while self.parent[v] is not None:
            d = self.parent[v]  # dart parent(v) -> v
            out.append(reverse(d))
            v = self.graph.tail(d)
        return tuple(out)

    def tree_path(self, u: int, v: int) -> tuple[int, ...]:
        """Reduced tree geodesic from ``u`` to ``v``."""
        return reduce_darts(self.path_to_root(u) + reverse_path(self.path_to_root(v)))

    @cached_property
    def tree_distance(self) -> tuple[tuple[int, ...], ...]:
        n = self.graph.num_vertices
        return tuple(tuple(len(self.tree_path(u, v)) for v in range(n)) for u in range(n))

    @cached_property
    def loop_reps(self) -> tuple[tuple[int, ...], ...]:
        G = self.graph
        reps = []
        for d in self.generators:
            walk = self.tree_path(self.origin, G.tail(d)) + (d,) + self.tree_path(G.head(d), self.origin)
            reps.append(reduce_darts(walk))
        return tuple(reps)

    def word_walk(self, word: Iterable[int]) -> tuple[int, ...]:
        """Reduced closed dart walk at the origin representing ``word``."""
        walk: list[int] = []
        for a in word:
            rep = self.loop_reps[abs(a) - 1]
            walk.extend(rep if a > 0 else reverse_path(rep))
        return reduce_darts(walk)

    def ray_prefix(self, word: Sequence[int]) -> tuple[int, ...]:
        """Dart path from the origin up to and including the last letter's edge.

        Every boundary point in the cylinder of ``word`` has a geodesic ray
        starting with this path.
        """
        G = self.graph
        walk: list[int] = []
        here = self.origin
        for a in word:
            d = self.letter_dart(a)
            walk.extend(self.tree_path(here, G.tail(d)))
            walk.append(d)
            here = G.head(d)
        return tuple(walk)

    def letters_of(self, darts: Iterable[int]) -> tuple[int, ...]:
        """Word spelled by the non-tree darts of a non-backtracking path."""
        table = self.dart_letter
        return tuple(table[d] for d in darts if d in table)


def spanning_presentation(G: MultiGraph, origin: int | str, tree: Sequence[int] | None = None,
                          order: Sequence[int] | None = None,
                          orientation: Sequence[int] | None = None) -> Presentation:
    """Free basis from a spanning tree.

    Generators are the non-tree edges in file order, permuted by ``order``
    (generator ``i`` uses the ``order[i]``-th non-tree edge) and oriented by
    ``orientation`` (``+1`` keeps dart ``2k``, ``-1`` uses ``2k + 1``).
    The tree defaults to the BFS tree from the origin.
    """
    if isinstance(origin, str):
        origin = G.index(origin)
    if not 0 <= origin < G.num_vertices:
        raise KeyError(f"origin {origin} is not a vertex")
    tree = bfs_tree(G, origin) if tree is None else tuple(sorted(tree))
    if len(tree) != G.num_vertices - 1 or not _is_spanning_tree(G, tree):
        raise ValueError(f"edges {tree} do not form a spanning tree")
    in_tree = set(tree)
    others = [k for k in range(G.num_edges) if k not in in_tree]
    g = len(others)
    order = list(range(g)) if order is None else list(order)
    orientation = [1] * g if orientation is None else list(orientation)
    if sorted(order) != list(range(g)) or len(orientation) != g or any(o not in (1, -1) for o in orientation):
        raise ValueError("order must be a permutation and orientation a list of +-1 of length g")
    generators = tuple(2 * others[j] + (0 if o == 1 else 1) for j, o in zip(order, orientation))

    parent: list[int | None] = [None] * G.num_vertices
    seen = {origin}
    queue = deque([origin])
    while queue:
        u = queue.popleft()
        for d in G.darts_at[u]:
            w = G.head(d)
            if (d >> 1) in in_tree and w not in seen:
                seen.add(w)
                parent[w] = d
                queue.append(w)
    return Presentation(G, origin, tree, generators, tuple(parent))
