"""Canonical labeling of small colored hypergraphs.

Individualization-refinement search in the style of nauty: an equitable
partition refinement on the vertex/edge incidence structure, then a
depth-first search over individualized vertices with automorphism pruning.
The canonical labeling is the leaf with the smallest edge code; the order of
the automorphism group is read off the first path by orbit-stabilizer.

Roots (the first ``k`` vertices) are fixed pointwise, vertex colors are
respected. Everything here is sized for n <= 16.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations


@lru_cache(maxsize=None)
def subset_table(n: int, r: int) -> tuple[dict, tuple]:
    """Lexicographic enumeration of the r-subsets of range(n): (index map, list)."""
    subsets = tuple(combinations(range(n), r))
    return {s: i for i, s in enumerate(subsets)}, subsets


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


def orbits(n: int, generators) -> list[int]:
    """Orbit representative (smallest element) of every point under the generated group."""
    uf = _UnionFind(n)
    for g in generators:
        for v in range(n):
            uf.union(v, g[v])
    return [uf.find(v) for v in range(n)]


def group_closure(n: int, generators, limit: int | None = None) -> list[tuple]:
    """All elements of the permutation group generated by ``generators``."""
    identity = tuple(range(n))
    seen = {identity}
    frontier = [identity]
    gens = [tuple(g) for g in generators]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(g[p[v]] for v in range(n))
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
                    if limit is not None and len(seen) > limit:
                        raise ValueError("group larger than limit")
        frontier = nxt
    return sorted(seen)


class _Search:
    def __init__(self, n, r, edges, colors, k):
        self.n = n
        self.r = r
        self.edges = [tuple(e) for e in edges]
        self.index = subset_table(n, r)[0]
        inc = [[] for _ in range(n)]
        for e in self.edges:
            for v in e:
                inc[v].append(tuple(u for u in e if u != v))
        self.inc = inc
        self.first = None
        self.best = None
        self.gens: list[tuple] = []
        cells = [[v] for v in range(k)]
        by_color: dict = {}
        for v in range(k, n):
            by_color.setdefault(colors[v], []).append(v)
        for c in sorted(by_color):
            cells.append(by_color[c])
        self.initial = cells

    def refine(self, cells):
        n = self.n
        inc = self.inc
        while True:
            cell_of = [0] * n
            for i, c in enumerate(cells):
                for v in c:
                    cell_of[v] = i
            out = []
            split = False
            for c in cells:
                if len(c) == 1:
                    out.append(c)
                    continue
                sig: dict = {}
                for v in c:
                    s = tuple(sorted(tuple(sorted(cell_of[u] for u in o)) for o in inc[v]))
                    sig.setdefault(s, []).append(v)
                if len(sig) == 1:
                    out.append(c)
                    continue
                split = True
                for s in sorted(sig):
                    out.append(sig[s])
            cells = out
            if not split:
                return cells

    def code(self, lab):
        index = self.index
        mask = 0
        for e in self.edges:
            mask |= 1 << index[tuple(sorted([lab[v] for v in e]))]
        return mask

    def _automorphism(self, lab_a, lab_b):
        inv_b = [0] * self.n
        for v, p in enumerate(lab_b):
            inv_b[p] = v
        return tuple(inv_b[lab_a[v]] for v in range(self.n))

    def leaf(self, cells, path):
        lab = [0] * self.n
        for i, c in enumerate(cells):
            lab[c[0]] = i
        code = self.code(lab)
        if self.first is None:
            self.first = self.best = (lab, code, list(path))
            return None
        if code == self.first[1]:
            self.gens.append(self._automorphism(lab, self.first[0]))
            return _common_prefix(path, self.first[2])
        if code == self.best[1]:
            self.gens.append(self._automorphism(lab, self.best[0]))
            return _common_prefix(path, self.best[2])
        if code < self.best[1]:
            self.best = (lab, code, list(path))
        return None

    def equivalent(self, w, explored, path):
        gens = [g for g in self.gens if all(g[v] == v for v in path)]
        if not gens:
            return False
        rep = orbits(self.n, gens)
        return any(rep[w] == rep[x] for x in explored)

    def run(self, cells, path):
        cells = self.refine(cells)
        if len(cells) == self.n:
            return self.leaf(cells, path)
        ti = next(i for i, c in enumerate(cells) if len(c) > 1)
        target = sorted(cells[ti])
        depth = len(path)
        explored: list[int] = []
        for w in target:
            if explored and self.equivalent(w, explored, path):
                continue
            explored.append(w)
            rest = [x for x in target if x != w]
            child = cells[:ti] + [[w], rest] + cells[ti + 1:]
            path.append(w)
            jump = self.run(child, path)
            path.pop()
            if jump is not None and jump < depth:
                return jump
        return None

    def group_order(self):
        path = self.first[2]
        order = 1
        for d in range(len(path)):
            prefix = path[:d]
            gens = [g for g in self.gens if all(g[v] == v for v in prefix)]
            rep = orbits(self.n, gens)
            order *= sum(1 for v in range(self.n) if rep[v] == rep[path[d]])
        return order


def _common_prefix(a, b):
    i = 0
    while i < len(a) and i < len(b) and a[i] == b[i]:
        i += 1
    return i


def canonical_labeling(n, r, edges, colors=None, k=0):
    """Canonically label a colored r-graph whose first ``k`` vertices are roots.

    Returns ``(labeling, code, generators, group_order)`` where ``labeling[v]``
    is the new label of vertex ``v``, ``code`` is the edge bitmask of the
    relabeled graph (bit i set iff the i-th r-subset in lexicographic order is
    an edge), and ``generators`` generate the automorphism group.
    """
    if colors is None:
        colors = (0,) * n
    if n == 0:
        return [], 0, [], 1
    s = _Search(n, r, edges, colors, k)
    s.run(s.initial, [])
    lab, code, _ = s.best
    return lab, code, list(s.gens), s.group_order()
