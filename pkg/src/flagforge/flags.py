"""Colored flags: enumeration, densities, products and the averaging operator.

A flag is a vertex-colored r-graph whose first ``k`` vertices are roots; the
root-induced part is its type. Flags are stored in canonical labeling with
roots fixed pointwise, so two flags are equal iff their keys are equal.
Freeness ignores colors.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations, permutations, product
from math import comb, perm

from .canon import canonical_labeling, group_closure, subset_table
from .errors import DimensionMismatch, InputError
from .families import Family, family_from_keywords, is_family_free
from .generate import all_classes
from .hypergraph import Hypergraph


@dataclass(frozen=True)
class Theory:
    r: int
    colors: int
    forbidden: Family | None = None
    name: str = ""

    def __post_init__(self):
        if self.r not in (2, 3):
            raise InputError("only 2- and 3-uniform theories are supported")
        if self.colors < 1:
            raise InputError("need at least one color")
        if self.forbidden is not None and self.forbidden.r != self.r:
            raise InputError("forbidden family has the wrong uniformity")

    def admits(self, G: Hypergraph) -> bool:
        return self.forbidden is None or is_family_free(G.uncolored(), self.forbidden)

    def descriptor(self) -> str:
        fam = self.forbidden.name if self.forbidden is not None else "none"
        return f"r={self.r};colors={self.colors};forbidden={fam}"


def colored_theory() -> Theory:
    """3-colored {K4-, C5-}-free 3-graphs."""
    return Theory(3, 3, family_from_keywords("k4m,c5m"), "colored3")


def mantel_theory() -> Theory:
    """Triangle-free graphs, uncolored."""
    return Theory(2, 1, family_from_keywords("k3"), "mantel")


def theory_from_args(family: str | None, colors: int, r: int = 3) -> Theory:
    fam = family_from_keywords(family) if family else None
    if fam is not None:
        r = fam.r
    return Theory(r, colors, fam, f"{family or 'none'}/{colors}")


def theory_from_descriptor(text: str) -> Theory:
    """Inverse of :meth:`Theory.descriptor`."""
    fields = {}
    for part in text.split(";"):
        key, sep, value = part.partition("=")
        if not sep:
            raise InputError(f"bad theory descriptor {text!r}")
        fields[key.strip()] = value.strip()
    try:
        r, colors = int(fields["r"]), int(fields["colors"])
    except (KeyError, ValueError):
        raise InputError(f"bad theory descriptor {text!r}") from None
    fam = fields.get("forbidden", "none")
    return Theory(r, colors, None if fam == "none" else family_from_keywords(fam), text)


# ---------------------------------------------------------------- flags

def _key(r, n, edges, colors, k) -> tuple:
    lab, code, _, _ = canonical_labeling(n, r, edges, colors, k)
    cols = [0] * n
    for v, c in enumerate(colors):
        cols[lab[v]] = c
    return (r, n, k, tuple(cols), code)


def _from_key(key) -> Hypergraph:
    r, n, k, colors, code = key
    subsets = subset_table(n, r)[1]
    edges = tuple(s for i, s in enumerate(subsets) if code >> i & 1)
    return Hypergraph(r, n, edges, colors)


@dataclass(frozen=True)
class Flag:
    """Canonical flag; build with :func:`make_flag`."""

    key: tuple

    @property
    def r(self) -> int:
        return self.key[0]

    @property
    def n(self) -> int:
        return self.key[1]

    @property
    def k(self) -> int:
        return self.key[2]

    @cached_property
    def graph(self) -> Hypergraph:
        return _from_key(self.key)

    @cached_property
    def type_key(self) -> tuple:
        """Key of the fully rooted type on the first k vertices."""
        return induced_key(self.graph, tuple(range(self.k)), self.k)

    def __str__(self) -> str:
        G = self.graph
        edges = " ".join("".join(str(v) for v in e) for e in G.edges) or "-"
        cols = "".join(str(c) for c in G.colors)
        return f"[{self.n}:{cols}|{edges}|k={self.k}]"


def make_flag(G: Hypergraph, k: int = 0) -> Flag:
    """Flag of ``G`` with its first ``k`` vertices as labeled roots."""
    if not 0 <= k <= G.n:
        raise InputError("root count out of range")
    colors = G.colors if G.colors is not None else (1,) * G.n
    return Flag(_key(G.r, G.n, G.edges, colors, k))


def make_type(G: Hypergraph) -> Flag:
    return make_flag(G, G.n)


def empty_type(r: int) -> Flag:
    return make_flag(Hypergraph(r, 0, (), ()), 0)


def induced_key(G: Hypergraph, vs: tuple, k: int) -> tuple:
    """Key of the flag induced on ``vs`` (in order) with its first ``k`` entries as roots."""
    pos = {v: i for i, v in enumerate(vs)}
    edges = [tuple(pos[v] for v in e) for e in G.edges if all(v in pos for v in e)]
    colors = tuple(G.colors[v] for v in vs) if G.colors is not None else (1,) * len(vs)
    return _key(G.r, len(vs), [tuple(sorted(e)) for e in edges], colors, k)


# ---------------------------------------------------------------- bases

@dataclass(frozen=True)
class FlagBasis:
    theory: Theory
    sigma: Flag
    m: int
    flags: tuple
    index: dict = field(compare=False, repr=False)

    def __len__(self):
        return len(self.flags)

    def __iter__(self):
        return iter(self.flags)

    def position(self, F: Flag) -> int:
        try:
            return self.index[F.key]
        except KeyError:
            raise InputError(f"flag {F} is not in this basis") from None

    @cached_property
    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.theory.descriptor()}|m={self.m}|sigma={self.sigma.key}|count={len(self.flags)}".encode())
        for F in self.flags:
            h.update(repr(F.key).encode())
        return f"{len(self.flags)}:{h.hexdigest()[:16]}"

    def dump(self) -> str:
        """One flag per blank-line separated block in the hypergraph text format, with colors and root count."""
        from .hypergraph import format_hypergraph
        return "\n".join(format_hypergraph(F.graph, root=F.k) for F in self.flags)


def _sort_key(F: Flag):
    return (F.key[4], F.key[3])


def _basis(theory, sigma, m, keys) -> FlagBasis:
    flags = sorted((Flag(k) for k in keys), key=_sort_key)
    return FlagBasis(theory, sigma, m, tuple(flags), {F.key: i for i, F in enumerate(flags)})


def _colorings_up_to(n, colors, group):
    for c in product(range(1, colors + 1), repeat=n):
        rep = True
        for g in group:
            img = [0] * n
            for v in range(n):
                img[g[v]] = c[v]
            if tuple(img) < c:
                rep = False
                break
        if rep:
            yield c


_BASIS_CACHE: dict = {}


def enumerate_flags(theory: Theory, m: int, sigma: Flag | None = None, threads: int = 1) -> FlagBasis:
    """All flags of ``theory`` on ``m`` vertices extending ``sigma``, canonically ordered."""
    if sigma is None:
        sigma = empty_type(theory.r)
    k = sigma.n
    if m < k:
        raise InputError(f"m={m} is smaller than the type size {k}")
    if sigma.k != k:
        raise InputError("a type must have every vertex rooted")
    if not theory.admits(sigma.graph):
        raise InputError("type is not free of the forbidden family")
    ckey = (theory, m, sigma.key)
    if ckey in _BASIS_CACHE:
        return _BASIS_CACHE[ckey]
    keys = set()
    if k == 0:
        for G in all_classes(m, theory.r, theory.forbidden, threads):
            _, _, gens, _ = canonical_labeling(G.n, G.r, G.edges)
            group = group_closure(G.n, gens)
            for c in _colorings_up_to(m, theory.colors, group):
                keys.add(_key(G.r, m, G.edges, c, 0))
    else:
        S = sigma.graph
        index, subsets = subset_table(m, theory.r)
        free = [s for s in subsets if s[-1] >= k]
        if len(free) > 20:
            raise InputError("typed enumeration this large is not supported")
        base_colors = tuple(S.colors)
        for tail in product(range(1, theory.colors + 1), repeat=m - k):
            colors = base_colors + tail
            for mask in range(1 << len(free)):
                edges = S.edges + tuple(free[i] for i in range(len(free)) if mask >> i & 1)
                G = Hypergraph(theory.r, m, edges, colors)
                if theory.admits(G):
                    keys.add(_key(theory.r, m, G.edges, colors, k))
    basis = _basis(theory, sigma, m, keys)
    _BASIS_CACHE[ckey] = basis
    return basis


def flag_types(theory: Theory, k: int) -> list:
    """Representatives of every type of size ``k`` (one per isomorphism class)."""
    return [make_type(F.graph) for F in enumerate_flags(theory, k)]


# ---------------------------------------------------------------- densities

@lru_cache(maxsize=200_000)
def subflag_distribution(key: tuple, s: int) -> dict:
    """key of size-s subflag -> count, over s-k subsets of non-root vertices."""
    G = _from_key(key)
    k = key[2]
    roots = tuple(range(k))
    out: dict = {}
    for S in combinations(range(k, G.n), s - k):
        kk = induced_key(G, roots + S, k)
        out[kk] = out.get(kk, 0) + 1
    return out


def _check_same_type(F: Flag, G: Flag):
    if F.k != G.k or F.type_key != G.type_key:
        raise InputError("flags have different types")
    if F.r != G.r:
        raise InputError("flags have different uniformity")


def flag_density(F: Flag, G: Flag) -> Fraction:
    _check_same_type(F, G)
    if F.n > G.n:
        raise InputError("pattern flag is larger than host flag")
    dist = subflag_distribution(G.key, F.n)
    return Fraction(dist.get(F.key, 0), comb(G.n - G.k, F.n - G.k))


def density_in(basis: FlagBasis, H: Hypergraph, k: int | None = None) -> "DensityVector":
    """Vector of p(F, H) over ``basis`` for a colored host whose first ``k`` vertices are roots."""
    k = basis.sigma.n if k is None else k
    host = make_flag(H, k)
    if host.type_key != basis.sigma.key:
        raise InputError("host does not carry the basis type")
    dist = subflag_distribution(host.key, basis.m)
    total = comb(H.n - k, basis.m - k)
    coeffs = [Fraction(dist.get(F.key, 0), total) for F in basis.flags]
    return DensityVector(basis, tuple(coeffs))


@lru_cache(maxsize=200_000)
def pair_distribution(key: tuple, a: int, b: int) -> dict:
    """(key1, key2) -> count over ordered disjoint (a-k, b-k) subsets of non-root vertices."""
    G = _from_key(key)
    k = key[2]
    roots = tuple(range(k))
    rest = range(k, G.n)
    out: dict = {}
    for A in combinations(rest, a - k):
        ka = induced_key(G, roots + A, k)
        remaining = [v for v in rest if v not in A]
        for B in combinations(remaining, b - k):
            kb = induced_key(G, roots + B, k)
            out[(ka, kb)] = out.get((ka, kb), 0) + 1
    return out


def pair_total(n: int, k: int, a: int, b: int) -> int:
    return comb(n - k, a - k) * comb(n - a, b - k)


@dataclass(frozen=True)
class DensityVector:
    basis: FlagBasis
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != len(self.basis):
            raise DimensionMismatch("coefficient count does not match the basis")

    def __add__(self, other):
        self._same(other)
        return DensityVector(self.basis, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._same(other)
        return DensityVector(self.basis, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, c):
        c = Fraction(c)
        return DensityVector(self.basis, tuple(c * a for a in self.coeffs))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def plus_constant(self, c) -> "DensityVector":
        """Add a constant, using that the basis densities sum to one."""
        c = Fraction(c)
        return DensityVector(self.basis, tuple(a + c for a in self.coeffs))

    def _same(self, other):
        if self.basis is not other.basis and self.basis.digest != other.basis.digest:
            raise DimensionMismatch("density vectors live on different bases")

    def support(self) -> list:
        return [i for i, c in enumerate(self.coeffs) if c != 0]

    def evaluate(self, densities) -> Fraction:
        if isinstance(densities, DensityVector):
            if densities.basis.flags != self.basis.flags:
                raise InputError("densities are over a different basis")
            densities = densities.coeffs
        return sum((a * b for a, b in zip(self.coeffs, densities)), Fraction(0))


def zero_vector(basis: FlagBasis) -> DensityVector:
    return DensityVector(basis, (Fraction(0),) * len(basis))


def indicator(basis: FlagBasis, F: Flag) -> DensityVector:
    c = [Fraction(0)] * len(basis)
    c[basis.position(F)] = Fraction(1)
    return DensityVector(basis, tuple(c))


def lift(vec: DensityVector, target: FlagBasis) -> DensityVector:
    """Express a vector over a smaller basis of the same type in ``target``."""
    src = vec.basis
    if src.sigma.key != target.sigma.key:
        raise InputError("lift needs matching types")
    if src.m > target.m:
        raise InputError("cannot lift to a smaller basis")
    total = comb(target.m - target.sigma.n, src.m - src.sigma.n)
    out = []
    for G in target.flags:
        dist = subflag_distribution(G.key, src.m)
        s = sum((c * dist.get(F.key, 0) for F, c in zip(src.flags, vec.coeffs) if c), Fraction(0))
        out.append(s / total)
    return DensityVector(target, tuple(out))


def product_expand(F1: Flag, F2: Flag, basis: FlagBasis) -> DensityVector:
    """Coefficients p(F1, F2; G) over a typed basis."""
    _check_same_type(F1, F2)
    if F1.type_key != basis.sigma.key:
        raise InputError("product factors do not carry the basis type")
    k = F1.k
    if F1.n + F2.n - k > basis.m:
        raise InputError(f"product of {F1.n}- and {F2.n}-vertex flags does not fit in {basis.m} vertices")
    total = pair_total(basis.m, k, F1.n, F2.n)
    out = []
    for G in basis.flags:
        dist = pair_distribution(G.key, F1.n, F2.n)
        out.append(Fraction(dist.get((F1.key, F2.key), 0), total))
    return DensityVector(basis, tuple(out))


def multiply(u: DensityVector, v: DensityVector, target: FlagBasis) -> DensityVector:
    """Product of two vectors of one type, expanded in ``target``."""
    if u.basis.sigma.key != v.basis.sigma.key or u.basis.sigma.key != target.sigma.key:
        raise InputError("product needs a common type")
    k = target.sigma.n
    a, b = u.basis.m, v.basis.m
    if a + b - k > target.m:
        raise InputError("product does not fit in the target basis")
    total = pair_total(target.m, k, a, b)
    us = [(F.key, c) for F, c in zip(u.basis.flags, u.coeffs) if c]
    vs = [(F.key, c) for F, c in zip(v.basis.flags, v.coeffs) if c]
    out = []
    for G in target.flags:
        dist = pair_distribution(G.key, a, b)
        s = Fraction(0)
        for ka, ca in us:
            for kb, cb in vs:
                cnt = dist.get((ka, kb))
                if cnt:
                    s += ca * cb * cnt
        out.append(s / total)
    return DensityVector(target, tuple(out))


def root_placements(G: Flag, k: int):
    """Injective ordered k-tuples of vertices of an untyped flag."""
    return permutations(range(G.n), k)


@lru_cache(maxsize=200_000)
def typed_versions(key: tuple, k: int) -> dict:
    """typed key -> number of injective root placements producing it."""
    G = _from_key(key)
    out: dict = {}
    for theta in permutations(range(G.n), k):
        rest = tuple(v for v in range(G.n) if v not in theta)
        kk = induced_key(G, theta + rest, k)
        out[kk] = out.get(kk, 0) + 1
    return out


def downward(vec: DensityVector, target: FlagBasis | None = None) -> DensityVector:
    """Averaging operator: unlabel a typed vector by uniform injective root placement."""
    src = vec.basis
    k = src.sigma.n
    if target is None:
        target = enumerate_flags(src.theory, src.m)
    if target.m != src.m or target.sigma.n != 0:
        raise InputError("downward target must be the untyped basis of the same size")
    total = perm(src.m, k)
    out = []
    for G in target.flags:
        s = Fraction(0)
        for kk, cnt in typed_versions(G.key, k).items():
            i = src.index.get(kk)
            if i is not None and vec.coeffs[i]:
                s += vec.coeffs[i] * cnt
        out.append(s / total)
    return DensityVector(target, tuple(out))


# ---------------------------------------------------------------- named flags

def _color_triples(colors):
    return sorted({tuple(sorted(t)) for t in product(range(1, colors + 1), repeat=3)})


def named_flags(theory: Theory, m: int) -> dict:
    """Named density vectors over the untyped m-vertex basis, plus typed K vectors.

    Untyped names: ``V{i}``, ``E{abc}``, ``Ebar{abc}``, ``edges``, ``S``,
    ``Sb``, ``Sm``. Typed names ``K{i}_{ab}`` live over the 3-vertex basis of
    the 1-vertex type of color i. The S-vectors need ``m >= 4``.
    """
    if theory.r != 3:
        raise InputError("named flags are defined for 3-graph theories")
    if m < 1:
        raise InputError("m must be positive")
    target = enumerate_flags(theory, m)
    out: dict = {}
    K = theory.colors
    b1 = enumerate_flags(theory, 1)
    for i in range(1, K + 1):
        F = make_flag(Hypergraph(3, 1, (), (i,)))
        out[f"V{i}"] = lift(indicator(b1, F), target)
    if m >= 3:
        b3 = enumerate_flags(theory, 3)
        edges = zero_vector(b3)
        for t in _color_triples(K):
            name = "".join(map(str, t))
            E = make_flag(Hypergraph(3, 3, ((0, 1, 2),), t))
            Eb = make_flag(Hypergraph(3, 3, (), t))
            out[f"E{name}"] = lift(indicator(b3, E), target)
            out[f"Ebar{name}"] = lift(indicator(b3, Eb), target)
            edges = edges + indicator(b3, E)
        out["edges"] = lift(edges, target)
    if m >= 4:
        b4 = enumerate_flags(theory, 4)
        S = [Fraction(0)] * len(b4)
        Sb = [Fraction(0)] * len(b4)
        Sm = [Fraction(0)] * len(b4)
        for idx, F in enumerate(b4.flags):
            G = F.graph
            colors = G.colors
            profiles = [len({colors[v] for v in e}) for e in G.edges]
            if len(G.edges) == 2:
                S[idx] = Fraction(1)
                if any(p == 2 for p in profiles):
                    Sb[idx] = Fraction(1)
            if len(set(colors)) == 3 and len(G.edges) <= 1 and all(p == 3 for p in profiles):
                Sm[idx] = Fraction(1)
        for name, c in (("S", S), ("Sb", Sb), ("Sm", Sm)):
            out[name] = lift(DensityVector(b4, tuple(c)), target)
    if m >= 1 and K >= 1:
        out.update(typed_k_vectors(theory))
    return out


def one_vertex_type(theory: Theory, color: int) -> Flag:
    return make_type(Hypergraph(theory.r, 1, (), (color,)))


def typed_k_vectors(theory: Theory) -> dict:
    """K^c_{a,b}: rooted 3-vertex edge flags with root color c and leaf colors a, b."""
    out = {}
    K = theory.colors
    for c in range(1, K + 1):
        sigma = one_vertex_type(theory, c)
        basis = enumerate_flags(theory, 3, sigma)
        for a in range(1, K + 1):
            for b in range(a, K + 1):
                F = make_flag(Hypergraph(3, 3, ((0, 1, 2),), (c, a, b)), 1)
                out[f"K{c}_{a}{b}"] = indicator(basis, F)
    return out
