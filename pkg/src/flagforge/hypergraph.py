"""Small uniform hypergraphs with exact counting primitives.

A :class:`Hypergraph` is an immutable r-graph on vertices ``0..n-1``, edges
kept as sorted tuples in lexicographic order, with an optional vertex
coloring. All counts are exact integers or :class:`fractions.Fraction`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from math import comb

from .canon import canonical_labeling, group_closure, subset_table
from .errors import InputError, UnsupportedUniformity


@dataclass(frozen=True)
class Hypergraph:
    r: int
    n: int
    edges: tuple = ()
    colors: tuple | None = field(default=None)

    def __post_init__(self):
        if self.r not in (2, 3):
            raise UnsupportedUniformity(f"only 2- and 3-graphs are supported, got r={self.r}")
        if self.n < 0:
            raise InputError("vertex count must be nonnegative")
        norm = set()
        for e in self.edges:
            t = tuple(sorted(int(v) for v in e))
            if len(t) != self.r or len(set(t)) != self.r:
                raise InputError(f"edge {tuple(e)} is not a set of {self.r} distinct vertices")
            if t[0] < 0 or t[-1] >= self.n:
                raise InputError(f"edge {t} has a vertex outside 0..{self.n - 1}")
            norm.add(t)
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        if self.colors is not None:
            colors = tuple(int(c) for c in self.colors)
            if len(colors) != self.n:
                raise InputError(f"expected {self.n} colors, got {len(colors)}")
            object.__setattr__(self, "colors", colors)

    def __len__(self):
        return len(self.edges)

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    @cached_property
    def mask(self) -> int:
        index = subset_table(self.n, self.r)[0]
        m = 0
        for e in self.edges:
            m |= 1 << index[e]
        return m

    @cached_property
    def neighborhoods(self) -> dict:
        """(r-1)-set -> frozenset of vertices completing it to an edge."""
        nb: dict = {}
        for e in self.edges:
            for v in e:
                nb.setdefault(tuple(u for u in e if u != v), set()).add(v)
        return {t: frozenset(s) for t, s in nb.items()}

    def has_edge(self, e) -> bool:
        return tuple(sorted(e)) in self.edge_set

    def color_of(self, v: int) -> int:
        return 1 if self.colors is None else self.colors[v]

    def relabel(self, perm) -> "Hypergraph":
        """Image under the vertex map ``v -> perm[v]``."""
        colors = None
        if self.colors is not None:
            colors = [0] * self.n
            for v, c in enumerate(self.colors):
                colors[perm[v]] = c
        return Hypergraph(self.r, self.n, tuple(tuple(perm[v] for v in e) for e in self.edges), colors)

    def induced(self, vertices) -> "Hypergraph":
        """Sub-hypergraph on ``vertices``, relabeled 0.. in the given order."""
        pos = {v: i for i, v in enumerate(vertices)}
        edges = [tuple(pos[v] for v in e) for e in self.edges if all(v in pos for v in e)]
        colors = None if self.colors is None else tuple(self.colors[v] for v in vertices)
        return Hypergraph(self.r, len(pos), tuple(edges), colors)

    def with_edges(self, extra) -> "Hypergraph":
        return Hypergraph(self.r, self.n, self.edges + tuple(extra), self.colors)

    def without_edges(self, drop) -> "Hypergraph":
        drop = {tuple(sorted(e)) for e in drop}
        return Hypergraph(self.r, self.n, tuple(e for e in self.edges if e not in drop), self.colors)

    def uncolored(self) -> "Hypergraph":
        return Hypergraph(self.r, self.n, self.edges)

    def with_colors(self, colors) -> "Hypergraph":
        return Hypergraph(self.r, self.n, self.edges, colors)

    def canonical_form(self, roots: int = 0) -> "CanonicalForm":
        return canonical_form(self, roots)


@dataclass(frozen=True)
class CanonicalForm:
    relabeling: tuple
    canonical_edges: tuple
    automorphism_count: int
    colors: tuple | None
    code: int
    generators: tuple

    def key(self):
        return (self.colors, self.code)


def canonical_form(H: Hypergraph, roots: int = 0) -> CanonicalForm:
    """Canonical representative of ``H`` (first ``roots`` vertices fixed pointwise)."""
    lab, code, gens, order = canonical_labeling(H.n, H.r, H.edges, H.colors, roots)
    G = H.relabel(lab)
    # generators act on the original labels; move them to canonical labels
    inv = [0] * H.n
    for v, p in enumerate(lab):
        inv[p] = v
    cgens = tuple(tuple(lab[g[inv[p]]] for p in range(H.n)) for g in gens)
    return CanonicalForm(tuple(lab), G.edges, order, G.colors, code, cgens)


def canonical_key(H: Hypergraph, roots: int = 0) -> tuple:
    """Hashable isomorphism invariant that is complete: equal iff isomorphic."""
    lab, code, _, _ = canonical_labeling(H.n, H.r, H.edges, H.colors, roots)
    colors = None
    if H.colors is not None:
        colors = [0] * H.n
        for v, c in enumerate(H.colors):
            colors[lab[v]] = c
        colors = tuple(colors)
    return (H.r, H.n, roots, colors, code)


def automorphisms(H: Hypergraph, roots: int = 0) -> list[tuple]:
    """Every automorphism of ``H`` as a tuple ``p`` with ``p[v]`` the image of ``v``."""
    _, _, gens, _ = canonical_labeling(H.n, H.r, H.edges, H.colors, roots)
    return group_closure(H.n, gens)


def is_isomorphic(A: Hypergraph, B: Hypergraph) -> bool:
    return canonical_key(A) == canonical_key(B)


# ---------------------------------------------------------------- counting

def shadow(H: Hypergraph) -> frozenset:
    return frozenset(H.neighborhoods)


def _check_subset(H: Hypergraph, T, size: int) -> tuple:
    t = tuple(sorted(T))
    if len(t) != size or len(set(t)) != size or (t and (t[0] < 0 or t[-1] >= H.n)):
        raise InputError(f"{tuple(T)} is not a set of {size} distinct vertices of the graph")
    return t


def codegree(H: Hypergraph, T) -> int:
    t = _check_subset(H, T, H.r - 1)
    return len(H.neighborhoods.get(t, ()))


def link(H: Hypergraph, v: int) -> frozenset:
    if not 0 <= v < H.n:
        raise InputError(f"vertex {v} out of range")
    return frozenset(tuple(u for u in e if u != v) for e in H.edges if v in e)


def degree(H: Hypergraph, v: int) -> int:
    return len(link(H, v))


def lp_norm(H: Hypergraph, p: int) -> int:
    """Sum of codegree^p over the shadow."""
    if p < 1:
        raise InputError("p must be at least 1")
    return sum(len(s) ** p for s in H.neighborhoods.values())


def count_s2(H: Hypergraph) -> int:
    """Number of copies of the two-edge 4-vertex 3-graph."""
    if H.r != 3:
        raise UnsupportedUniformity("S2 counting needs a 3-graph")
    return sum(comb(len(s), 2) for s in H.neighborhoods.values())


def induced_density(F: Hypergraph, H: Hypergraph) -> Fraction:
    k = F.n
    if k > H.n:
        raise InputError("pattern has more vertices than host")
    target = canonical_key(F)
    hits = sum(1 for S in combinations(range(H.n), k) if canonical_key(H.induced(S)) == target)
    return Fraction(hits, comb(H.n, k))


def blowup(H: Hypergraph, k: int) -> Hypergraph:
    """Replace each vertex ``x`` by clones ``x*k .. x*k+k-1``."""
    if k < 1:
        raise InputError("blowup factor must be positive")
    edges = []
    for e in H.edges:
        for choice in product(range(k), repeat=H.r):
            edges.append(tuple(v * k + c for v, c in zip(e, choice)))
    colors = None if H.colors is None else tuple(c for c in H.colors for _ in range(k))
    return Hypergraph(H.r, H.n * k, tuple(edges), colors)


def complete_partite(r: int, sizes) -> Hypergraph:
    """Complete r-partite r-graph K[V_1..V_r] with consecutive parts."""
    if len(sizes) != r:
        raise InputError("need one part size per uniformity")
    parts, start = [], 0
    for s in sizes:
        parts.append(range(start, start + s))
        start += s
    return Hypergraph(r, start, tuple(product(*parts)))


# ---------------------------------------------------------------- embeddings

def _vertex_order(F: Hypergraph, fixed=()):
    order = list(fixed)
    placed = set(order)
    remaining = [v for v in range(F.n) if v not in placed]
    while remaining:
        # most edges back into the placed set, then highest degree
        def score(v):
            back = sum(1 for e in F.edges if v in e and all(u in placed or u == v for u in e))
            touch = sum(1 for e in F.edges if v in e and any(u in placed for u in e))
            deg = sum(1 for e in F.edges if v in e)
            return (back, touch, deg, -v)
        v = max(remaining, key=score)
        order.append(v)
        placed.add(v)
        remaining.remove(v)
    return order


def _edge_schedule(F: Hypergraph, order):
    """For each position, the F-edges that become fully mapped there."""
    pos = {v: i for i, v in enumerate(order)}
    sched = [[] for _ in order]
    for e in F.edges:
        sched[max(pos[v] for v in e)].append(e)
    return sched


def _backtrack(F, H, order, sched, phi, used, start, injective):
    if start == len(order):
        return True
    x = order[start]
    # candidate restriction from an edge that closes at x
    cands = None
    for e in sched[start]:
        others = tuple(sorted(phi[u] for u in e if u != x))
        if injective and len(set(others)) < len(others):
            return False
        nb = H.neighborhoods.get(others)
        if nb is None:
            return False
        cands = nb if cands is None else cands & nb
        if not cands:
            return False
    if cands is None:
        cands = range(H.n)
    for y in sorted(cands):
        if injective and y in used:
            continue
        phi[x] = y
        ok = True
        for e in sched[start]:
            img = tuple(sorted(phi[u] for u in e))
            if len(set(img)) < len(img) or img not in H.edge_set:
                ok = False
                break
        if ok:
            used.add(y)
            if _backtrack(F, H, order, sched, phi, used, start + 1, injective):
                return True
            used.discard(y)
        del phi[x]
    return False


def find_embedding(F: Hypergraph, H: Hypergraph, must_use=None):
    """Injective edge-preserving map V(F) -> V(H) as a dict, or None.

    Subgraph (not induced) containment; colors are ignored. With ``must_use``
    only embeddings whose image contains that edge of ``H`` are searched.
    """
    if F.r != H.r or F.n > H.n:
        return None
    if len(F) > len(H):
        return None
    if must_use is None:
        order = _vertex_order(F)
        sched = _edge_schedule(F, order)
        phi: dict = {}
        if _backtrack(F, H, order, sched, phi, set(), 0, True):
            return dict(phi)
        return None
    target = tuple(sorted(must_use))
    if target not in H.edge_set:
        return None
    for fe in F.edges:
        order = _vertex_order(F, fe)
        sched = _edge_schedule(F, order)
        for img in set(_permutations(target)):
            phi = dict(zip(fe, img))
            # edges inside the seeded prefix are checked here
            for i in range(F.r):
                for e in sched[i]:
                    if tuple(sorted(phi[u] for u in e)) not in H.edge_set:
                        break
                else:
                    continue
                break
            else:
                if _backtrack(F, H, order, sched, phi, set(img), F.r, True):
                    return dict(phi)
    return None


def _permutations(t):
    from itertools import permutations
    return permutations(t)


def contains(H: Hypergraph, F: Hypergraph, must_use=None) -> bool:
    return find_embedding(F, H, must_use) is not None


def homomorphism_exists(F: Hypergraph, G: Hypergraph) -> bool:
    """Whether some vertex map sends every edge of F onto an edge of G."""
    if F.r != G.r:
        return False
    if not F.edges:
        return G.n > 0 or F.n == 0
    order = _vertex_order(F)
    sched = _edge_schedule(F, order)
    return _backtrack(F, G, order, sched, {}, set(), 0, False)


# ---------------------------------------------------------------- text format

def parse_hypergraph(text: str) -> tuple[Hypergraph, dict]:
    """Parse the ``r n m`` edge-list format.

    Returns the hypergraph and a dict of trailer fields (``parts``, ``root``)
    when present. A ``colors:`` trailer is attached to the hypergraph.
    """
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise InputError("empty hypergraph text")
    try:
        r, n, m = (int(x) for x in lines[0].split())
    except ValueError:
        raise InputError(f"bad header line {lines[0]!r}; expected 'r n m'") from None
    if len(lines) < 1 + m:
        raise InputError(f"expected {m} edge lines, found {len(lines) - 1}")
    edges = []
    for line in lines[1:1 + m]:
        try:
            e = tuple(int(x) for x in line.split())
        except ValueError:
            raise InputError(f"bad edge line {line!r}") from None
        edges.append(e)
    extras: dict = {}
    colors = None
    for line in lines[1 + m:]:
        key, _, rest = line.partition(":")
        key = key.strip().lower()
        try:
            values = [int(x) for x in rest.split()]
        except ValueError:
            raise InputError(f"bad trailer line {line!r}") from None
        if key == "colors":
            colors = tuple(values)
        elif key == "parts":
            extras["parts"] = tuple(values)
        elif key == "root":
            if len(values) != 1:
                raise InputError("root line takes one integer")
            extras["root"] = values[0]
        else:
            raise InputError(f"unknown trailer {key!r}")
    H = Hypergraph(r, n, tuple(edges), colors)
    if len(H) != m:
        raise InputError("duplicate edges in input")
    return H, extras


def format_hypergraph(H: Hypergraph, parts=None, root=None) -> str:
    out = [f"{H.r} {H.n} {len(H)}"]
    out.extend(" ".join(str(v) for v in e) for e in H.edges)
    if H.colors is not None:
        out.append("colors: " + " ".join(str(c) for c in H.colors))
    if parts is not None:
        out.append("parts: " + " ".join(str(p) for p in parts))
    if root is not None:
        out.append(f"root: {root}")
    return "\n".join(out) + "\n"


def read_hypergraph(path) -> tuple[Hypergraph, dict]:
    with open(path) as fh:
        return parse_hypergraph(fh.read())
