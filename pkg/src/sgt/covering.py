"""Universal covering tree: growth, critical exponent and Patterson-Sullivan
measures on tree-side boundary cylinders.

Vertices of the covering tree are reduced dart paths starting at the base
lift of the origin; a boundary cylinder ``U_P`` is named by such a path.
Group elements correspond one-to-one to reduced closed dart walks at the
origin, which is what makes the Poincare sums below countable by transfer
matrices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceError, ExtendPrefix
from .graph import MultiGraph, Presentation, reduce_darts, require_valid, reverse_path

__all__ = [
    "CylinderMeasure",
    "PoincarePartial",
    "hashimoto_matrix",
    "perron",
    "critical_exponent",
    "sphere_sizes",
    "nb_paths",
    "cover_distance",
    "displacement",
    "poincare_partial",
    "ps_measure_tree",
    "busemann",
    "richardson",
    "geometric_cutoff",
    "truncated_geometric",
    "S_SCHEDULE_KMAX",
]

#: default schedule s_k = delta * (1 + 2**-k), k <= S_SCHEDULE_KMAX
S_SCHEDULE_KMAX = 12
CAUCHY_GATE = 1e-4


@dataclass
class CylinderMeasure:
    """Cylinder masses up to a fixed depth.

    ``side`` is ``"tree"`` (keys are dart paths from the origin) or
    ``"freegroup"`` (keys are reduced words of signed letters).
    """

    side: str
    depth: int
    length: float
    delta: float
    masses: dict[tuple[int, ...], float]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.masses = {tuple(int(x) for x in k): float(v) for k, v in self.masses.items()}
        self.delta = float(self.delta)

    def __getitem__(self, key: Sequence[int]) -> float:
        return self.masses[tuple(key)]

    def level(self, n: int) -> dict[tuple[int, ...], float]:
        return {k: v for k, v in self.masses.items() if len(k) == n}

    def additivity_defect(self) -> float:
        """Largest ``|mass(P) - sum of its one-step extensions|``."""
        sums: dict[tuple[int, ...], float] = {}
        for k in sorted(self.masses):
            if k:
                sums[k[:-1]] = sums.get(k[:-1], 0.0) + self.masses[k]
        worst = abs(self.masses.get((), 1.0) - 1.0)
        for k, m in self.masses.items():
            if len(k) < self.depth:
                worst = max(worst, abs(m - sums.get(k, 0.0)))
        return worst

    def to_dict(self) -> dict:
        keyname = "path" if self.side == "tree" else "word"
        entries = [{keyname: list(k), "mass": self.masses[k]}
                   for k in sorted(self.masses, key=list)]
        return {"side": self.side, "depth": self.depth, "L": self.length,
                "delta": self.delta, "entries": entries}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "CylinderMeasure":
        keyname = "path" if data["side"] == "tree" else "word"
        masses = {tuple(e[keyname]): float(e["mass"]) for e in data["entries"]}
        return cls(data["side"], int(data["depth"]), float(data["L"]), float(data["delta"]), masses)


# --- matrices and growth ---------------------------------------------------

def hashimoto_matrix(G: MultiGraph) -> np.ndarray:
    """Dart-indexed 0/1 matrix of non-backtracking transitions."""
    B = np.zeros((G.num_darts, G.num_darts))
    for d, succ in enumerate(G.successors):
        B[d, list(succ)] = 1.0
    return B


def perron(A: np.ndarray, tol: float = 1e-12, maxiter: int = 100_000) -> tuple[float, np.ndarray]:
    """Perron value and right Perron vector of an irreducible nonnegative matrix.

    Power iteration from the all-ones vector on ``A + I``; the shift removes
    the oscillation of imprimitive (periodic) matrices such as the
    Hashimoto matrix of a bipartite graph without changing the eigenvector.
    The vector is scaled to unit sum.
    """
    n = A.shape[0]
    shifted = A + np.eye(n)
    v = np.full(n, 1.0 / n)
    rho = 0.0
    for _ in range(maxiter):
        w = shifted @ v
        w /= w.sum()
        Av = A @ w
        rho_new = Av.sum() / w.sum()
        done = np.max(np.abs(w - v)) <= tol * np.max(np.abs(w)) and abs(rho_new - rho) <= tol * rho_new
        v, rho = w, rho_new
        if done:
            return float(rho), v
    raise ConvergenceError(f"power iteration did not converge in {maxiter} steps")


def critical_exponent(G: MultiGraph) -> float:
    """``log(rho) / L`` with ``rho`` the Perron value of the Hashimoto matrix."""
    require_valid(G)
    rho, _ = perron(hashimoto_matrix(G))
    return math.log(rho) / G.length


def sphere_sizes(G: MultiGraph, origin: int, n: int) -> list[int]:
    """Number of non-backtracking paths of each length ``0..n`` from ``origin``."""
    counts = {d: 1 for d in G.darts_at[origin]}
    sizes = [1]
    for k in range(1, n + 1):
        sizes.append(sum(counts.values()))
        if k == n:
            break
        nxt: dict[int, int] = {}
        for d, c in counts.items():
            for e in G.successors[d]:
                nxt[e] = nxt.get(e, 0) + c
        counts = nxt
    return sizes[: n + 1]


def nb_paths(G: MultiGraph, origin: int, n: int, exact: bool = True) -> list[tuple[int, ...]]:
    """Non-backtracking paths from ``origin`` of length ``n`` (or ``<= n``)."""
    out = [()]
    frontier = [()]
    for _ in range(n):
        nxt = []
        for p in frontier:
            for d in (G.darts_at[origin] if not p else G.successors[p[-1]]):
                nxt.append(p + (d,))
        frontier = nxt
        out.extend(frontier)
    return frontier if exact else out


def cover_distance(x: Sequence[int], y: Sequence[int]) -> int:
    """Tree distance between two covering-tree vertices given as reduced paths."""
    return len(reduce_darts(reverse_path(x) + tuple(y)))


def displacement(P: Presentation, word: Iterable[int]) -> int:
    """``d(O, gamma O) / L`` for the deck transformation named by ``word``."""
    return len(P.word_walk(word))


# --- Poincare sums ---------------------------------------------------------

def geometric_cutoff(ratio: float, tail_tol: float = 1e-3) -> int:
    """Smallest ``R`` with geometric tail ``r**(R+1) / (1 - r**(R+1)) < tail_tol``."""
    if not 0 < ratio < 1:
        raise ValueError(f"geometric ratio must lie in (0, 1), got {ratio}")
    return max(1, math.ceil(math.log(tail_tol / (1 + tail_tol)) / math.log(ratio)))


def truncated_geometric(X: np.ndarray, b: np.ndarray, R: int) -> np.ndarray:
    """``sum_{m=0}^{R} X^m b`` in closed form."""
    n = X.shape[0]
    if R < 0:
        return np.zeros_like(b)
    XR = np.linalg.matrix_power(X, R + 1)
    return np.linalg.solve(np.eye(n) - X, b - XR @ b)


def richardson(values: Sequence[float]) -> tuple[float, float]:
    """Two-level Richardson extrapolation for step sizes halving each time.

    Returns the extrapolated limit and the gap between the two first-level
    extrapolants, which serves as the Cauchy check.
    """
    f0, f1, f2 = values[-3:]
    a1 = 2 * f1 - f0
    a2 = 2 * f2 - f1
    return (4 * a2 - a1) / 3, abs(a2 - a1)


@dataclass(frozen=True)
class PoincarePartial:
    terms: dict[tuple[int, ...], float]
    total: float
    s: float
    cutoff: int


def poincare_partial(P: Presentation, s: float, R: int, depth: int = 1) -> PoincarePartial:
    """Poincare sum over reduced words of length ``<= R`` at exponent ``s``.

    ``terms`` groups ``exp(-s L d(O, gamma O))`` by the first ``depth`` darts
    of the geodesic ``[O, gamma O]``; elements with shorter displacement
    enter only ``total``. Identical terms are merged by counting, so the
    sums are exact up to rounding.
    """
    G = P.graph
    delta = critical_exponent(G)
    if not s > delta:
        raise ValueError(f"the Poincare series diverges for s <= delta = {delta:.12g}")
    dist = P.tree_distance
    O = P.origin
    close = {}
    for a in [i for i in range(1, P.genus + 1)] + [-i for i in range(1, P.genus + 1)]:
        d = P.letter_dart(a)
        close[a] = (dist[G.head(d)][O], P.tree_path(G.head(d), O))

    def weight(length):
        return math.exp(-s * G.length * length)

    terms: dict[tuple[int, ...], float] = {}
    total = 1.0
    # state: (last letter, walk prefix or frozen key) -> {prefix length: count}
    states: dict[tuple, dict[int, int]] = {}
    for a in close:
        d = P.letter_dart(a)
        pw = P.tree_path(O, G.tail(d)) + (d,)
        key = ("k", pw[:depth]) if len(pw) >= depth else ("w", pw)
        states.setdefault((a, key), {})
        states[(a, key)][len(pw)] = states[(a, key)].get(len(pw), 0) + 1
    for _ in range(R):
        for (a, key), lens in sorted(states.items(), key=repr):
            cl, cpath = close[a]
            for ln, cnt in sorted(lens.items()):
                term = cnt * weight(ln + cl)
                total += term
                if key[0] == "k":
                    group = key[1]
                else:
                    full = key[1] + cpath
                    group = full[:depth] if len(full) >= depth else None
                if group is not None:
                    terms[group] = terms.get(group, 0.0) + term
        nxt: dict[tuple, dict[int, int]] = {}
        for (a, key), lens in states.items():
            for b in close:
                if b == -a:
                    continue
                d = P.letter_dart(b)
                step = P.tree_path(G.head(P.letter_dart(a)), G.tail(d)) + (d,)
                if key[0] == "k":
                    nkey = key
                else:
                    pw = key[1] + step
                    nkey = ("k", pw[:depth]) if len(pw) >= depth else ("w", pw)
                bucket = nxt.setdefault((b, nkey), {})
                for ln, cnt in lens.items():
                    bucket[ln + len(step)] = bucket.get(ln + len(step), 0) + cnt
        states = nxt
    return PoincarePartial(terms, total, s, R)


# --- Patterson-Sullivan measure --------------------------------------------

def _perron_tree(G: MultiGraph, origin: int, depth: int) -> dict[tuple[int, ...], float]:
    B = hashimoto_matrix(G)
    _, v = perron(B)
    out_sum = B @ v
    start = G.darts_at[origin]
    z = sum(v[d] for d in start)
    masses = {(): 1.0}
    frontier = {(d,): v[d] / z for d in start}
    masses.update(frontier)
    for _ in range(depth - 1):
        nxt = {}
        for p, m in frontier.items():
            d = p[-1]
            for e in G.successors[d]:
                nxt[p + (e,)] = m * v[e] / out_sum[d]
        masses.update(nxt)
        frontier = nxt
    return masses


def _poincare_ratios_tree(G: MultiGraph, origin: int, depth: int, s: float, delta: float,
                          tail_tol: float) -> dict[tuple[int, ...], float]:
    B = hashimoto_matrix(G)
    z = math.exp(-s * G.length)
    X = z * B
    h = np.array([1.0 if G.head(d) == origin else 0.0 for d in range(G.num_darts)])
    R = depth + geometric_cutoff(math.exp(-(s - delta) * G.length), tail_tol)
    # orbit points closer than `depth` are dropped everywhere, so every level
    # sees the same finite set of group elements and additivity is exact
    sums = {k: truncated_geometric(X, h, R - k) - truncated_geometric(X, h, depth - k - 1)
            for k in range(1, depth + 1)}
    total = sum(z * sums[1][d] for d in G.darts_at[origin])
    out = {(): 1.0}
    for p in nb_paths(G, origin, depth, exact=False):
        if p:
            k = len(p)
            out[p] = z ** k * sums[k][p[-1]] / total
    return out


def ps_measure_tree(G: MultiGraph, origin: int | str, depth: int, method: str = "perron",
                    kmax: int = S_SCHEDULE_KMAX, tail_tol: float = 1e-3,
                    gate: float = CAUCHY_GATE) -> CylinderMeasure:
    """Patterson-Sullivan masses of all tree cylinders ``U_P`` with ``|P| <= depth``.

    ``method="perron"`` uses the Markov description: first dart ``d`` at the
    origin with weight ``v(d)``, then ``d -> d'`` with probability
    ``B(d, d') v(d') / (B v)(d)``, ``v`` the right Perron vector of the
    Hashimoto matrix ``B``.

    ``method="poincare"`` evaluates normalized Poincare sums restricted to
    each cylinder at ``s_k = delta (1 + 2**-k)`` for the last three ``k <= kmax``,
    with the displacement cutoff chosen from the geometric tail estimate,
    and extrapolates to ``s = delta``. The two first-level extrapolants must
    agree within ``gate``.
    """
    if isinstance(origin, str):
        origin = G.index(origin)
    require_valid(G)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    delta = critical_exponent(G)
    if method == "perron":
        masses = _perron_tree(G, origin, depth)
    elif method == "poincare":
        runs = [_poincare_ratios_tree(G, origin, depth, delta * (1 + 2.0 ** -k), delta, tail_tol)
                for k in range(kmax - 2, kmax + 1)]
        masses = {}
        for p in runs[-1]:
            value, gap = richardson([r[p] for r in runs])
            if gap > gate:
                raise ConvergenceError(f"Poincare ratios for cylinder {list(p)} not Cauchy "
                                       f"(gap {gap:.3g} > {gate:g})")
            masses[p] = value
    else:
        raise ValueError(f"unknown method {method!r}")
    return CylinderMeasure("tree", depth, G.length, delta, masses, {"method": method, "origin": origin})


def busemann(G: MultiGraph, other: Sequence[int], path: Sequence[int]) -> int:
    """Stabilized ``d(O', x_k) - d(O, x_k)`` along ``path``.

    Both ``other`` (the second origin ``O'``) and ``path`` are reduced dart
    paths from the base origin ``O`` of the covering tree.
    """
    path = tuple(path)
    if len(path) < 1:
        raise ExtendPrefix("path too short for the Busemann cocycle; extend prefix")
    diffs = [cover_distance(other, path[:k]) - k for k in (len(path) - 1, len(path))]
    if diffs[0] != diffs[1]:
        raise ExtendPrefix("Busemann difference has not stabilized; extend prefix")
    return diffs[1]
