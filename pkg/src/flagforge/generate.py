"""Isomorph-free generation of family-free r-graphs on a fixed vertex set.

Canonical augmentation by edges: a graph is grown one edge at a time and a
child is accepted only when the added edge lies in the automorphism orbit of
its canonical deletion edge (the edge whose canonical image comes last).
Parents are taken one per isomorphism class and augmentations one per
Aut(parent)-orbit of non-edges, so every class is produced exactly once.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from .canon import canonical_labeling, subset_table, _UnionFind
from .families import Family, is_family_free
from .hypergraph import Hypergraph


def _edge_image(g, e):
    return tuple(sorted(g[v] for v in e))


def _nonedge_orbit_reps(G: Hypergraph, gens) -> list:
    index, subsets = subset_table(G.n, G.r)
    uf = _UnionFind(len(subsets))
    for g in gens:
        for i, s in enumerate(subsets):
            uf.union(i, index[_edge_image(g, s)])
    reps, seen = [], set()
    for i, s in enumerate(subsets):
        if s in G.edge_set:
            continue
        root = uf.find(i)
        if root not in seen:
            seen.add(root)
            reps.append(s)
    return reps


def _edge_orbit(e, gens) -> set:
    orbit = {e}
    frontier = [e]
    while frontier:
        nxt = []
        for f in frontier:
            for g in gens:
                h = _edge_image(g, f)
                if h not in orbit:
                    orbit.add(h)
                    nxt.append(h)
        frontier = nxt
    return orbit


def _canonical(G: Hypergraph):
    lab, code, gens, order = canonical_labeling(G.n, G.r, G.edges)
    return lab, code, gens


def children(G: Hypergraph, family: Family | None = None) -> list:
    """Canonical children of ``G`` (itself in canonical labeling) with one more edge."""
    _, _, gens = _canonical(G)
    index = subset_table(G.n, G.r)[0]
    out = []
    for e in _nonedge_orbit_reps(G, gens):
        C = G.with_edges([e])
        if family is not None and not is_family_free(C, family, must_use=e):
            continue
        lab, code, cgens = _canonical(C)
        last = max(C.edges, key=lambda f: index[_edge_image(lab, f)])
        if e == last or e in _edge_orbit(last, cgens):
            out.append(C.relabel(lab))
    return out


def iter_levels(n: int, r: int = 3, family: Family | None = None, threads: int = 1,
                start=None):
    """Yield ``(edge_count, graphs)`` level by level, graphs canonical and sorted by code.

    ``start`` resumes from a saved frontier ``(edge_count, graphs)``.
    """
    if start is None:
        level, frontier = 0, [Hypergraph(r, n)]
    else:
        level, frontier = start
    while frontier:
        yield level, frontier
        if threads > 1 and len(frontier) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                batches = list(pool.map(lambda G: children(G, family), frontier))
        else:
            batches = [children(G, family) for G in frontier]
        nxt = [C for batch in batches for C in batch]
        nxt.sort(key=lambda C: C.mask)
        frontier = nxt
        level += 1


def all_classes(n: int, r: int = 3, family: Family | None = None, threads: int = 1) -> list:
    """Every isomorphism class of family-free r-graphs on ``n`` vertices, canonical representatives."""
    out = []
    for _, graphs in iter_levels(n, r, family, threads):
        out.extend(graphs)
    return out
