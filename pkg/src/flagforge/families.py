"""Named 3-graphs and family freeness."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .hypergraph import Hypergraph, canonical_key, find_embedding, homomorphism_exists


def make_tight_cycle(length: int) -> Hypergraph:
    if length < 4:
        raise InputError(f"tight cycle needs at least 4 vertices, got {length}")
    return Hypergraph(3, length, tuple((i, (i + 1) % length, (i + 2) % length) for i in range(length)))


def make_tight_cycle_minus(length: int) -> Hypergraph:
    """Tight cycle with the edge through vertices ``length-1, 0, 1`` removed."""
    C = make_tight_cycle(length)
    return C.without_edges([(length - 1, 0, 1)])


def make_k4_minus() -> Hypergraph:
    return Hypergraph(3, 4, ((0, 1, 2), (0, 1, 3), (0, 2, 3)))


def make_f32() -> Hypergraph:
    return Hypergraph(3, 5, ((0, 1, 2), (0, 1, 3), (0, 1, 4), (2, 3, 4)))


def make_s2() -> Hypergraph:
    return Hypergraph(3, 4, ((0, 1, 2), (0, 1, 3)))


def make_k4() -> Hypergraph:
    return Hypergraph(3, 4, ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)))


def make_triangle() -> Hypergraph:
    return Hypergraph(2, 3, ((0, 1), (0, 2), (1, 2)))


@dataclass(frozen=True)
class Family:
    name: str
    members: tuple

    def __post_init__(self):
        if not self.members:
            raise InputError("a family needs at least one member")
        r = {F.r for F in self.members}
        if len(r) != 1:
            raise InputError("family members must share a uniformity")
        seen, uniq = set(), []
        for F in self.members:
            F = F.uncolored()
            key = canonical_key(F)
            if key not in seen:
                seen.add(key)
                uniq.append(F)
        # smallest members first: cheapest rejections
        uniq.sort(key=lambda F: (F.n, len(F), F.edges))
        object.__setattr__(self, "members", tuple(uniq))

    @property
    def r(self) -> int:
        return self.members[0].r

    def __iter__(self):
        return iter(self.members)


_KEYWORDS = {
    "k4m": make_k4_minus,
    "c5m": lambda: make_tight_cycle_minus(5),
    "c7m": lambda: make_tight_cycle_minus(7),
    "c8m": lambda: make_tight_cycle_minus(8),
    "f32": make_f32,
    "k4": make_k4,
    "k3": make_triangle,
}


def family_from_keywords(spec: str) -> Family:
    """Build a family from a comma-joined keyword list such as ``k4m,c5m``."""
    names = [s.strip().lower() for s in spec.split(",") if s.strip()]
    if not names:
        raise InputError("empty family specification")
    members = []
    for name in names:
        if name not in _KEYWORDS:
            raise InputError(f"unknown family keyword {name!r}; known: {', '.join(sorted(_KEYWORDS))}")
        members.append(_KEYWORDS[name]())
    return Family(",".join(names), tuple(members))


def is_family_free(H: Hypergraph, fam: Family, must_use=None) -> bool:
    """No member of ``fam`` is a (not necessarily induced) subgraph of ``H``.

    With ``must_use`` set, only copies through that edge are searched, which
    is the incremental check used when an edge is added to a free graph.
    """
    if H.r != fam.r:
        return True
    return all(find_embedding(F, H, must_use) is None for F in fam.members)


def reduction_hom_chain(length: int) -> bool:
    """C_length^- maps homomorphically to C_5^-, which maps to K_4^-."""
    if length < 5:
        raise InputError("chain needs length at least 5")
    if length % 3 == 0:
        raise InputError("the reduction does not apply when length is divisible by 3")
    c5 = make_tight_cycle_minus(5)
    return homomorphism_exists(make_tight_cycle_minus(length), c5) and homomorphism_exists(c5, make_k4_minus())
