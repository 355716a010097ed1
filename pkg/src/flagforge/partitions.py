"""Three-part vertex partitions of 3-graphs: transversal counts and bad/missing statistics."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np
from scipy.optimize import brentq

from .constructions import s2_complete_tripartite
from .errors import InputError, UnsupportedUniformity
from .hypergraph import Hypergraph, count_s2

ALPHA_32 = Fraction(675468913113, 3407872000000)
EXHAUSTIVE_LIMIT = 12


def _check(H: Hypergraph, P) -> tuple:
    if H.r != 3:
        raise UnsupportedUniformity("partition statistics need a 3-graph")
    P = tuple(int(p) for p in P)
    if len(P) != H.n:
        raise InputError(f"partition covers {len(P)} vertices but the graph has {H.n}")
    if any(p not in (1, 2, 3) for p in P):
        raise InputError("part indices must be 1, 2 or 3")
    return P


def part_sizes(P) -> tuple:
    return tuple(sum(1 for p in P if p == i) for i in (1, 2, 3))


def classify_edge(e, P) -> str:
    """'transversal', 'bad' or 'inside' according to the part profile of ``e``."""
    k = len({P[v] for v in e})
    return ("inside", "bad", "transversal")[k - 1]


@dataclass(frozen=True)
class PartitionMetrics:
    transversal: int
    mu: Fraction
    bad_edges: tuple
    missing_triples: tuple
    bad_s2: int
    missing_s2: int
    inside_edges: tuple
    sizes: tuple

    @property
    def n_bad(self) -> int:
        return len(self.bad_edges)

    @property
    def n_missing(self) -> int:
        return len(self.missing_triples)


def transversal_count(H: Hypergraph, P) -> int:
    return sum(1 for e in H.edges if P[e[0]] != P[e[1]] and P[e[0]] != P[e[2]] and P[e[1]] != P[e[2]])


def metrics(H: Hypergraph, P) -> PartitionMetrics:
    P = _check(H, P)
    n = H.n
    trans, bad, inside = [], [], []
    for e in H.edges:
        kind = classify_edge(e, P)
        (trans if kind == "transversal" else bad if kind == "bad" else inside).append(e)
    parts = [[v for v in range(n) if P[v] == i] for i in (1, 2, 3)]
    edge_set = H.edge_set
    missing = tuple(sorted(t for t in (tuple(sorted((a, b, c))) for a in parts[0]
                                       for b in parts[1] for c in parts[2]) if t not in edge_set))
    # S2 copies are pairs of edges through a common pair; a copy is bad iff one edge is bad
    good_nb: dict = {}
    for e in trans + inside:
        for i in range(3):
            t = e[:i] + e[i + 1:]
            good_nb[t] = good_nb.get(t, 0) + 1
    bad_s2 = sum(comb(len(s), 2) - comb(good_nb.get(t, 0), 2) for t, s in H.neighborhoods.items())
    HK = Hypergraph(3, n, tuple(trans))
    sizes = tuple(len(p) for p in parts)
    missing_s2 = s2_complete_tripartite(sizes) - count_s2(HK)
    mu = Fraction(6 * len(trans), n ** 3) if n else Fraction(0)
    return PartitionMetrics(len(trans), mu, tuple(bad), missing, bad_s2, missing_s2, tuple(inside), sizes)


def inside_counts(H: Hypergraph, P) -> tuple:
    """Edge counts of H[V1], H[V2], H[V3]."""
    P = _check(H, P)
    out = [0, 0, 0]
    for e in H.edges:
        if P[e[0]] == P[e[1]] == P[e[2]]:
            out[P[e[0]] - 1] += 1
    return tuple(out)


def missing_s2_incidence(H: Hypergraph, P) -> dict:
    """For each missing triple, the number of S2 copies of K[V1,V2,V3] through it that are absent from H.

    Every such copy is missing, so the count is the number of transversal
    triples that share two vertices with it.
    """
    P = _check(H, P)
    m = metrics(H, P)
    parts = [[v for v in range(H.n) if P[v] == i] for i in (1, 2, 3)]
    out = {}
    for t in m.missing_triples:
        count = 0
        for v in t:
            for w in parts[P[v] - 1]:
                if w != v:
                    count += 1
        out[t] = count
    return out


def max_missing_per_s2(H: Hypergraph, P) -> int:
    """Largest number of missing triples inside one missing S2 copy of K[V1,V2,V3]."""
    P = _check(H, P)
    parts = [[v for v in range(H.n) if P[v] == i] for i in (1, 2, 3)]
    best = 0
    for i in range(3):
        others = [parts[j] for j in range(3) if j != i]
        for a, b in combinations(parts[i], 2):
            for x in others[0]:
                for y in others[1]:
                    t1 = tuple(sorted((a, x, y)))
                    t2 = tuple(sorted((b, x, y)))
                    k = (t1 not in H.edge_set) + (t2 not in H.edge_set)
                    best = max(best, k)
    return best


# ---------------------------------------------------------------- local search

def _move_gains(incident, P: list, v: int) -> list:
    """Transversal count change from moving v into part q, for q = 1, 2, 3."""
    out = [0, 0, 0]
    p = P[v]
    for e in incident[v]:
        x, y = (P[u] for u in e if u != v)
        if x == y:
            continue
        now = p != x and p != y
        for q in (1, 2, 3):
            out[q - 1] += (q != x and q != y) - now
    return out


def is_locally_maximal(H: Hypergraph, P) -> bool:
    P = list(_check(H, P))
    incident = _incidence(H)
    return all(max(_move_gains(incident, P, v)) <= 0 for v in range(H.n))


def _incidence(H: Hypergraph) -> list:
    inc = [[] for _ in range(H.n)]
    for e in H.edges:
        for v in e:
            inc[v].append(e)
    return inc


def local_max_search(H: Hypergraph, P0) -> tuple:
    """Apply strictly improving single-vertex moves until none remains.

    Sweeps vertices in index order and, for each, target parts in index
    order, taking the first strict improvement; repeats until a sweep makes
    no move.
    """
    P = list(_check(H, P0))
    incident = _incidence(H)
    moved = True
    while moved:
        moved = False
        for v in range(H.n):
            p = P[v]
            gains = _move_gains(incident, P, v)
            for q in (1, 2, 3):
                if q != p and gains[q - 1] > 0:
                    P[v] = q
                    moved = True
                    break
    return tuple(P)


def empty_parts(P) -> list:
    return [i for i in (1, 2, 3) if i not in P]


def canonical_partition(P) -> tuple:
    """Relabel parts in order of first appearance."""
    relabel: dict = {}
    for p in P:
        if p not in relabel:
            relabel[p] = len(relabel) + 1
    return tuple(relabel[p] for p in P)


def _exhaustive_max_cut(H: Hypergraph) -> tuple:
    n = H.n
    if n == 0:
        return ()
    # vertex 0 pinned to part 1; rows in lexicographic order
    grids = np.indices((3,) * (n - 1), dtype=np.int8).reshape(n - 1, -1).T + 1
    A = np.hstack([np.ones((grids.shape[0], 1), dtype=np.int8), grids])
    score = np.zeros(A.shape[0], dtype=np.int32)
    for a, b, c in H.edges:
        pa, pb, pc = A[:, a], A[:, b], A[:, c]
        score += (pa != pb) & (pa != pc) & (pb != pc)
    best = int(np.argmax(score))
    return tuple(int(x) for x in A[best])


def max_cut(H: Hypergraph, restarts: int = 20, seed: int = 0) -> tuple:
    """Best 3-partition found: exhaustive when n <= 12, else seeded restarts of local search.

    Ties are broken toward the lexicographically smallest canonical encoding.
    """
    if H.r != 3:
        raise UnsupportedUniformity("max-cut needs a 3-graph")
    if H.n <= EXHAUSTIVE_LIMIT:
        P = _exhaustive_max_cut(H)
    else:
        best_key, P = None, None
        for i in range(max(restarts, 1)):
            rng = random.Random(f"{seed}:{i}")
            P0 = tuple(rng.randint(1, 3) for _ in range(H.n))
            Q = canonical_partition(local_max_search(H, P0))
            key = (-transversal_count(H, Q), Q)
            if best_key is None or key < best_key:
                best_key, P = key, Q
    return P, metrics(H, P)


def random_partition(n: int, seed: int) -> tuple:
    rng = random.Random(seed)
    return tuple(rng.randint(1, 3) for _ in range(n))


# ---------------------------------------------------------------- diagnostics

@dataclass(frozen=True)
class Prop33Report:
    value: Fraction
    satisfied: bool
    locally_maximal: bool
    mu: Fraction
    mu_ok: bool
    family_free: bool | None
    alert: bool


def check_prop33(H: Hypergraph, P, family=None, mu_threshold=Fraction(198, 1000)) -> Prop33Report:
    """|B| - (3/4)|M| with the hypotheses under which it should be nonpositive.

    ``alert`` is set when every hypothesis holds yet the value is positive.
    This is only a finite-size diagnostic.
    """
    from .families import is_family_free

    m = metrics(H, P)
    value = m.n_bad - Fraction(3, 4) * m.n_missing
    lm = is_locally_maximal(H, P)
    free = None if family is None else is_family_free(H, family)
    mu_ok = m.mu >= mu_threshold
    hyp = lm and mu_ok and free is not False
    return Prop33Report(value, value <= 0, lm, m.mu, mu_ok, free, hyp and value > 0)


def part_size_window(alpha) -> tuple[float, float]:
    """Range of a coordinate x on the simplex when x1*x2*x3 >= alpha/6.

    For fixed x the product peaks at ((1-x)/2)^2 in the other two
    coordinates, so the window is where x(1-x)^2/4 >= alpha/6.
    """
    a = Fraction(alpha)
    if not 0 < a <= Fraction(6, 27):
        raise InputError("alpha must lie in (0, 6/27]")
    if a == Fraction(6, 27):
        return 1 / 3, 1 / 3
    target = float(a) / 6

    def g(x):
        return x * (1 - x) ** 2 / 4 - target

    lo = brentq(g, 0.0, 1 / 3, xtol=1e-14, rtol=1e-15)
    hi = brentq(g, 1 / 3, 1.0, xtol=1e-14, rtol=1e-15)
    return lo, hi
