import json
import math
from collections import deque

import numpy as np
import pytest

from sgt.boundary import reduced_words
from sgt.corpus import cycle, dumbbell, k4, named_corpus, rose, small_multigraphs, theta
from sgt.covering import (CylinderMeasure, busemann, cover_distance, critical_exponent,
                          displacement, hashimoto_matrix, nb_paths, perron, poincare_partial,
                          ps_measure_tree, sphere_sizes)
from sgt.errors import ConvergenceError, ExtendPrefix, HypothesisError
from sgt.graph import reverse, spanning_presentation

GENUS2 = [G for G in small_multigraphs() if G.num_edges - G.num_vertices + 1 == 2]


# --- growth -------------------------------------------------------------------

def test_sphere_sizes_examples():
    assert sphere_sizes(rose(2), 0, 3) == [1, 4, 12, 36]
    assert sphere_sizes(theta(), 0, 3) == [1, 3, 6, 12]
    assert sphere_sizes(theta(), 1, 3) == [1, 3, 6, 12]
    # K4 is 3-regular: s_k = 3 * 2^(k-1)
    assert sphere_sizes(k4(), 2, 6) == [1] + [3 * 2 ** (k - 1) for k in range(1, 7)]


@pytest.mark.parametrize("name", ["rose2", "rose3", "theta", "dumbbell", "k4"])
def test_sphere_sizes_brute_force_and_hashimoto(name):
    G = named_corpus()[name]
    B = hashimoto_matrix(G).astype(np.int64)
    assert (B.sum(axis=1) == [G.valency(G.head(d)) - 1 for d in range(G.num_darts)]).all()
    for O in range(G.num_vertices):
        sizes = sphere_sizes(G, O, 6)
        start = np.zeros(G.num_darts, dtype=np.int64)
        start[list(G.darts_at[O])] = 1
        for k in range(7):
            assert sizes[k] == len(nb_paths(G, O, k))
            if k:
                assert sizes[k] == int(start @ np.linalg.matrix_power(B, k - 1) @ np.ones(G.num_darts, dtype=np.int64))


def test_growth_matches_exponent_on_genus2_corpus():
    for G in GENUS2:
        s20 = sphere_sizes(G, 0, 20)[20]
        assert abs(math.log(s20) / 20 - critical_exponent(G) * G.length) <= 0.05


# --- critical exponent -------------------------------------------------------

@pytest.mark.parametrize("g", [2, 3, 4, 6])
def test_critical_exponent_rose(g):
    assert critical_exponent(rose(g)) == pytest.approx(math.log(2 * g - 1), abs=1e-10)
    assert critical_exponent(rose(g, length=2.0)) == pytest.approx(math.log(2 * g - 1) / 2, abs=1e-10)


@pytest.mark.parametrize("G", [theta(), k4(), dumbbell()], ids=["theta", "k4", "dumbbell"])
def test_critical_exponent_cubic(G):
    # every 3-regular graph has Hashimoto row sums 2, hence Perron value 2
    assert critical_exponent(G) == pytest.approx(math.log(2), abs=1e-10)
    assert critical_exponent(G.with_length(2.0)) == pytest.approx(math.log(2) / 2, abs=1e-10)


def test_critical_exponent_irregular_between_bounds():
    for G in small_multigraphs():
        vals = [G.valency(v) - 1 for v in range(G.num_vertices)]
        delta = critical_exponent(G)
        assert math.log(min(vals)) - 1e-12 <= delta <= math.log(max(vals)) + 1e-12


def test_perron_residual():
    G = small_multigraphs()[-1]
    B = hashimoto_matrix(G)
    rho, v = perron(B)
    assert np.allclose(B @ v, rho * v, rtol=1e-10, atol=0)
    assert (v > 0).all()


def test_critical_exponent_rejects_invalid():
    with pytest.raises(HypothesisError):
        critical_exponent(cycle(3))


# --- displacement --------------------------------------------------------------

def _lift_by_walking(G, walk):
    """Follow an unreduced dart walk in an explicit cover ball, then BFS back to the root."""
    nodes, adj = {(): 0}, {0: {}}
    for p in nb_paths(G, 0, 6, exact=False):
        if p:
            a, b = nodes[p[:-1]], nodes.setdefault(p, len(nodes))
            adj.setdefault(b, {})
            adj[a][p[-1]] = b
            adj[b][reverse(p[-1])] = a
    here = 0
    for d in walk:
        here = adj[here][d]
    dist = {0: 0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for w in adj[u].values():
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist[here]


def test_displacement_examples():
    assert displacement(spanning_presentation(rose(2), 0), ()) == 0
    assert displacement(spanning_presentation(rose(2), 0), (1,)) == 1
    P = spanning_presentation(theta(), 0, tree=(0,))
    assert displacement(P, (1, -2)) == 2
    walk = P.loop_reps[0] + tuple(reverse(d) for d in reversed(P.loop_reps[1]))
    assert _lift_by_walking(theta(), walk) == 2


@pytest.mark.parametrize("name", ["theta", "dumbbell", "k4"])
def test_displacement_against_cover_bfs(name):
    G = named_corpus()[name]
    P = spanning_presentation(G, 0)
    for w in reduced_words(P.genus, 2):
        walk = []
        for a in w:
            rep = P.loop_reps[abs(a) - 1]
            walk += rep if a > 0 else [reverse(d) for d in reversed(rep)]
        if cover_distance((), walk) <= 6:
            assert displacement(P, w) == _lift_by_walking(G, walk)


# --- Poincare partial sums -------------------------------------------------------

def test_poincare_partial_identity_only():
    P = spanning_presentation(theta(), 0)
    assert poincare_partial(P, 1.0, 0).total == 1.0


def test_poincare_partial_large_s():
    P = spanning_presentation(rose(2), 0)
    assert poincare_partial(P, 60.0, 10).total == pytest.approx(1.0, abs=1e-20)


def test_poincare_partial_rose_direct_sum():
    P = spanning_presentation(rose(2), 0)
    s = math.log(3) + 0.1
    totals = [poincare_partial(P, s, R).total for R in range(13)]
    assert all(a < b for a, b in zip(totals, totals[1:]))
    # rose: 4 * 3^(n-1) elements at displacement n
    direct = 1 + sum(4 * 3 ** (n - 1) * math.exp(-s * n) for n in range(1, 13))
    assert totals[12] == pytest.approx(direct, rel=1e-13)


@pytest.mark.parametrize("name", ["theta", "dumbbell"])
def test_poincare_partial_grouping_brute_force(name):
    G = named_corpus()[name]
    P = spanning_presentation(G, 0)
    s, R, depth = critical_exponent(G) + 0.3, 6, 2
    part = poincare_partial(P, s, R, depth)
    terms, total = {}, 0.0
    for w in reduced_words(P.genus, R):
        walk = P.word_walk(w)
        t = math.exp(-s * displacement(P, w))
        total += t
        if len(walk) >= depth:
            terms[walk[:depth]] = terms.get(walk[:depth], 0.0) + t
    assert part.total == pytest.approx(total, rel=1e-12)
    assert part.terms.keys() == terms.keys()
    for k in terms:
        assert part.terms[k] == pytest.approx(terms[k], rel=1e-12)


def test_poincare_partial_rejects_divergent_s():
    P = spanning_presentation(theta(), 0)
    with pytest.raises(ValueError, match="diverges"):
        poincare_partial(P, math.log(2), 5)


def test_divergence_group_sanity():
    P = spanning_presentation(dumbbell(), 0)
    delta = critical_exponent(dumbbell())
    totals = [poincare_partial(P, delta * (1 + eps), 60).total for eps in (0.4, 0.2, 0.1, 0.05, 0.02)]
    assert all(a < b for a, b in zip(totals, totals[1:]))
    assert totals[-1] > 5 * totals[0]


# --- Patterson-Sullivan measure ------------------------------------------------------

@pytest.mark.parametrize("g", [2, 3])
@pytest.mark.parametrize("method", ["perron", "poincare"])
def test_rose_depth1_uniform(g, method):
    mu = ps_measure_tree(rose(g), 0, 1, method)
    assert mu[()] == 1.0
    for p, m in mu.level(1).items():
        assert m == pytest.approx(1 / (2 * g), abs=1e-10)


@pytest.mark.parametrize("method", ["perron", "poincare"])
def test_regular_graph_cylinders(method):
    mu = ps_measure_tree(k4(), 0, 3, method)
    for n in (1, 2, 3):
        for m in mu.level(n).values():
            assert m == pytest.approx(1 / (3 * 2 ** (n - 1)), abs=1e-9)


def test_theta_methods_agree():
    a = ps_measure_tree(theta(), 0, 2, "perron")
    b = ps_measure_tree(theta(), 0, 2, "poincare")
    assert a.masses.keys() == b.masses.keys()
    assert max(abs(a[k] - b[k]) for k in a.masses) <= 1e-4


@pytest.mark.parametrize("G", small_multigraphs()[::3], ids=lambda G: f"{G.num_vertices}v{G.num_edges}e")
def test_measure_probability_and_additivity(G):
    for method in ("perron", "poincare"):
        mu = ps_measure_tree(G, 0, 3, method)
        assert mu[()] == 1.0
        assert mu.additivity_defect() <= 1e-10
        assert min(mu.masses.values()) > 0
        assert sum(mu.level(3).values()) == pytest.approx(1.0, abs=1e-12)


def test_measure_json_round_trip():
    mu = ps_measure_tree(dumbbell(), "B", 2)
    data = json.loads(mu.to_json())
    assert data["side"] == "tree" and data["depth"] == 2 and data["L"] == 1.0
    keys = [e["path"] for e in data["entries"]]
    assert keys == sorted(keys)
    back = CylinderMeasure.from_dict(data)
    assert back.masses == mu.masses


def test_measure_errors():
    with pytest.raises(ValueError, match="unknown method"):
        ps_measure_tree(theta(), 0, 2, "magic")
    with pytest.raises(ValueError, match="depth"):
        ps_measure_tree(theta(), 0, 0)
    with pytest.raises(HypothesisError):
        ps_measure_tree(cycle(4), 0, 1)
    with pytest.raises(ConvergenceError, match=r"cylinder \["):
        ps_measure_tree(small_multigraphs()[-1], 0, 1, "poincare", gate=0.0)


# --- Busemann cocycle and conformality --------------------------------------------

def test_busemann_examples():
    G = theta()
    P = (0, 3, 0)
    assert busemann(G, (), P) == 0
    assert busemann(G, (0,), P) == -1
    assert busemann(G, (2,), P) == 1
    with pytest.raises(ExtendPrefix):
        busemann(G, (0, 3, 0), (0, 3))


def _reroot(P, d):
    """Cylinder ``U_P`` seen from the neighbouring origin reached by dart ``d``."""
    return P[1:] if P[0] == d else (reverse(d),) + P


@pytest.mark.parametrize("G", [theta(), dumbbell(), k4()] + small_multigraphs()[4:8],
                         ids=lambda G: f"{G.num_vertices}v{G.num_edges}e{len(set(G.edges))}")
def test_conformality(G):
    """mu_O'(U) / mu_O(U) = c(O, O') exp(-delta L beta), c = Z_O / Z_O' from the Perron vector."""
    delta = critical_exponent(G)
    _, v = perron(hashimoto_matrix(G))
    Z = [sum(v[d] for d in G.darts_at[u]) for u in range(G.num_vertices)]
    muO = ps_measure_tree(G, 0, 4, "poincare")
    regular = len({G.valency(u) for u in range(G.num_vertices)}) == 1
    for d in G.darts_at[0]:
        muP = ps_measure_tree(G, G.head(d), 5, "poincare")
        c = Z[0] / Z[G.head(d)]
        if regular:
            assert c == pytest.approx(1.0, abs=1e-12)
        for P in nb_paths(G, 0, 3):
            beta = busemann(G, (d,), P)
            ratio = muP[_reroot(P, d)] / muO[P]
            assert ratio == pytest.approx(c * math.exp(-delta * G.length * beta), rel=1e-3)


@pytest.mark.parametrize("name", ["theta", "dumbbell", "k4"])
def test_deck_invariance(name):
    """mu_{gamma O}(gamma U_P) = mu_O(U_P), with mu_{gamma O} obtained from mu_O by conformality."""
    G = named_corpus()[name]
    Pres = spanning_presentation(G, 0)
    delta = critical_exponent(G)
    mu = ps_measure_tree(G, 0, 8)
    checked = 0
    for rep in Pres.loop_reps:
        for P in nb_paths(G, 0, 2):
            gP = rep + P
            if reverse(rep[-1]) == P[0]:
                continue
            checked += 1
            # gamma U_P is the cylinder of gP seen from gamma O; compare back at O
            beta = busemann(G, rep, gP)
            assert mu[gP] * math.exp(-delta * G.length * beta) == pytest.approx(mu[P], rel=1e-6)
    assert checked >= 4
