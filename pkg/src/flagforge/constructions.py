"""Extremal constructions and the arithmetic around them.

The recursive construction places a complete 3-partite 3-graph across a
vertex split and recurses into each part; its l2-norm obeys

    t(n) = max_{n1+n2+n3=n, ni>=1} n1*n2*n3*n + t(n1) + t(n2) + t(n3),  t(n)=0 for n<=2.

The bipartite construction B(V1, V2) takes every triple with two vertices in
V1 and one in V2.
"""
from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Callable, NamedTuple

from scipy.optimize import minimize_scalar

from .errors import InputError
from .hypergraph import Hypergraph

DP_LIMIT = 400

# ---------------------------------------------------------------- recurrence

_T = [0, 0, 0]
_SPLIT: list = [None, None, None]
_lock = threading.Lock()


def _extend(n: int) -> None:
    with _lock:
        for m in range(len(_T), n + 1):
            best, arg = -1, None
            for a in range(1, m // 3 + 1):
                ta = _T[a]
                for b in range(a, (m - a) // 2 + 1):
                    c = m - a - b
                    v = a * b * c * m + ta + _T[b] + _T[c]
                    if v > best:
                        best, arg = v, (a, b, c)
            _T.append(best)
            _SPLIT.append(arg)


def t_rec_2(n: int) -> tuple[int, tuple | None]:
    """Maximum l2-norm of the recursive construction on ``n`` vertices, with a witness split.

    Among optimal splits the sorted, lexicographically smallest one is returned.
    Exact for n <= DP_LIMIT; use :func:`t_rec_2_balanced` beyond.
    """
    if n < 0:
        raise InputError("n must be nonnegative")
    if n > DP_LIMIT:
        raise InputError(f"exact recurrence is capped at n={DP_LIMIT}; use t_rec_2_balanced for a lower bound")
    if n >= len(_T):
        _extend(n)
    return _T[n], _SPLIT[n]


def t_rec_2_balanced(n: int) -> int:
    """Lower bound on the recurrence from always splitting as evenly as possible."""
    if n < 0:
        raise InputError("n must be nonnegative")

    @_memo
    def go(k):
        if k <= 2:
            return 0
        q, r = divmod(k, 3)
        parts = [q + (1 if i < r else 0) for i in range(3)]
        return parts[0] * parts[1] * parts[2] * k + sum(go(p) for p in parts)

    return go(n)


def _memo(fn):
    cache: dict = {}

    def inner(k):
        if k not in cache:
            cache[k] = fn(k)
        return cache[k]
    return inner


def t_rec_limit_estimate(k: int) -> Fraction:
    """t(3^k) / 3^(4k); tends to 1/26."""
    if k < 1:
        raise InputError("k must be at least 1")
    n = 3 ** k
    value = t_rec_2(n)[0] if n <= DP_LIMIT else t_rec_2_balanced(n)
    return Fraction(value, n ** 4)


# ---------------------------------------------------------------- part trees

@dataclass(frozen=True)
class PartTree:
    """A node of the recursive split. ``children`` is None for an edgeless leaf."""

    size: int
    children: tuple | None = None

    def __post_init__(self):
        if self.size < 0:
            raise InputError("tree sizes must be nonnegative")
        if self.children is not None:
            if len(self.children) != 3:
                raise InputError("an internal node has exactly three children")
            if any(c.size < 1 for c in self.children):
                raise InputError("children of an internal node must be nonempty")
            if sum(c.size for c in self.children) != self.size:
                raise InputError(f"children sizes {[c.size for c in self.children]} do not sum to {self.size}")

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def __str__(self) -> str:
        if self.is_leaf:
            return str(self.size)
        return f"({self.size}: " + " ".join(str(c) for c in self.children) + ")"


_TOKEN = re.compile(r"\s*(\(|\)|:|\d+)")


def parse_tree(text: str) -> PartTree:
    """Parse ``(9: (3: 1 1 1) 3 3)``; a bare integer is an edgeless leaf."""
    tokens, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise InputError(f"unexpected character in tree at offset {pos}: {text[pos:pos + 10]!r}")
        tokens.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    idx = [0]

    def peek():
        return tokens[idx[0]] if idx[0] < len(tokens) else None

    def take(expected=None):
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise InputError(f"malformed tree: expected {expected or 'token'}, got {tok!r}")
        idx[0] += 1
        return tok

    def node():
        tok = take()
        if tok.isdigit():
            return PartTree(int(tok))
        if tok != "(":
            raise InputError(f"malformed tree: unexpected {tok!r}")
        size = take()
        if not size.isdigit():
            raise InputError("malformed tree: node must start with its size")
        take(":")
        kids = []
        while peek() != ")":
            if peek() is None:
                raise InputError("malformed tree: unbalanced parentheses")
            kids.append(node())
        take(")")
        return PartTree(int(size), tuple(kids))

    tree = node()
    if idx[0] != len(tokens):
        raise InputError("malformed tree: trailing tokens")
    return tree


def optimal_tree(n: int) -> PartTree:
    """The tree realizing :func:`t_rec_2` with its tie-break."""
    _, split = t_rec_2(n)
    if split is None:
        return PartTree(n)
    return PartTree(n, tuple(optimal_tree(s) for s in split))


def balanced_tree(n: int) -> PartTree:
    if n <= 2:
        return PartTree(n)
    q, r = divmod(n, 3)
    return PartTree(n, tuple(balanced_tree(q + (1 if i < r else 0)) for i in range(3)))


def build_t_rec(tree: PartTree) -> Hypergraph:
    """Realize a part tree; vertices are numbered left to right through the tree."""
    if not isinstance(tree, PartTree):
        raise InputError("expected a PartTree")
    edges: list = []

    def place(node, start):
        if node.is_leaf:
            return
        bounds, s = [], start
        for c in node.children:
            bounds.append(range(s, s + c.size))
            s += c.size
        for x in bounds[0]:
            for y in bounds[1]:
                for z in bounds[2]:
                    edges.append((x, y, z))
        for c, b in zip(node.children, bounds):
            place(c, b.start)

    place(tree, 0)
    return Hypergraph(3, tree.size, tuple(edges))


def top_partition(tree: PartTree) -> tuple:
    """Part index (1..3) of each vertex under the root split of ``tree``."""
    if tree.is_leaf:
        raise InputError("a leaf has no top-level split")
    out = []
    for i, c in enumerate(tree.children, start=1):
        out.extend([i] * c.size)
    return tuple(out)


def build_bipartite_B(n1: int, n2: int) -> Hypergraph:
    """Triples with two vertices in V1 = {0..n1-1} and one in V2."""
    if n1 < 0 or n2 < 0:
        raise InputError("part sizes must be nonnegative")
    edges = [(a, b, n1 + c) for a, b in combinations(range(n1), 2) for c in range(n2)]
    return Hypergraph(3, n1 + n2, tuple(edges))


# ---------------------------------------------------------------- F32 profile

def f32_profile(a):
    """Limiting normalized l2-norm of B with |V1| = a*n; works for floats and Fractions."""
    return a * a * (1 - a) ** 2 / 2 + a ** 3 * (1 - a)


def f32_profile_optimize(grid_step=Fraction(1, 1000)) -> tuple[float, float]:
    """Grid search over (0, 1) followed by bounded scalar refinement."""
    step = float(grid_step)
    if not 0 < step < 1:
        raise InputError("grid_step must lie in (0, 1)")
    k = int(math.floor(1 / step))
    grid = [i * step for i in range(1, k + 1) if i * step < 1]
    a0 = max(grid, key=f32_profile)
    lo, hi = max(a0 - step, 0.0), min(a0 + step, 1.0)
    res = minimize_scalar(lambda a: -f32_profile(a), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    a = float(res.x)
    return a, f32_profile(a)


def f32_certify(a: float, max_denominator: int = 10 ** 8) -> tuple[Fraction, Fraction]:
    """Exact profile value at a rational rounding of ``a``."""
    q = Fraction(a).limit_denominator(max_denominator)
    return q, f32_profile(q)


# ---------------------------------------------------------------- simplex facts

ONE_26 = Fraction(1, 26)


class Fact22(NamedTuple):
    lhs1: object
    holds1: bool | None
    lhs3: object
    holds3: bool | None
    rhs3: object


def fact22_check(x, tol: float = 1e-12) -> Fact22:
    """Evaluate both simplex inequalities at ``x``.

    ``holds1``/``holds3`` are None when the point is outside that
    inequality's domain. Exact for Fraction input; floats use ``tol``.
    """
    if len(x) != 3:
        raise InputError("a simplex point has three coordinates")
    exact = all(isinstance(v, (int, Fraction)) for v in x)
    x1, x2, x3 = (Fraction(v) for v in x) if exact else (float(v) for v in x)
    if min(x1, x2, x3) < 0:
        raise InputError("simplex coordinates must be nonnegative")
    s = x1 + x2 + x3
    if (s != 1) if exact else abs(s - 1) > 1e-9:
        raise InputError(f"coordinates sum to {s}, not 1")
    eps = 0 if exact else tol
    third = Fraction(1, 3) if exact else 1 / 3
    c26 = ONE_26 if exact else 1 / 26
    prod = x1 * x2 * x3
    quart = x1 ** 4 + x2 ** 4 + x3 ** 4
    denom = 1 - quart
    lhs1 = holds1 = None
    if min(x1, x2, x3) > 0 and denom != 0:
        lhs1 = prod / denom
        holds1 = lhs1 <= c26 + eps
    lhs3 = prod + quart / 26
    rhs3 = c26 - sum((v - third) ** 2 for v in (x1, x2, x3)) / 15
    holds3 = None
    if min(x1, x2, x3) >= (Fraction(1, 5) if exact else 0.2 - 1e-15):
        holds3 = lhs3 <= rhs3 + eps
    return Fact22(lhs1, holds1, lhs3, holds3, rhs3)


def simplex_grid(denominator: int):
    """Rational simplex points with coordinates in (1/denominator)Z, in lexicographic order."""
    if denominator < 1:
        raise InputError("denominator must be positive")
    for i in range(denominator + 1):
        for j in range(denominator + 1 - i):
            yield (Fraction(i, denominator), Fraction(j, denominator), Fraction(denominator - i - j, denominator))


def fact22_grid(step=Fraction(1, 200), exact: bool = False):
    """Check both inequalities on the step grid; returns counts and failures."""
    step = Fraction(step)
    if step <= 0 or (1 / step).denominator != 1:
        raise InputError("step must be 1/k for a positive integer k")
    k = int(1 / step)
    checked1 = checked3 = 0
    failures = []
    for p in simplex_grid(k):
        pt = p if exact else tuple(float(v) for v in p)
        r = fact22_check(pt)
        if r.holds1 is not None:
            checked1 += 1
            if not r.holds1:
                failures.append(("i", p))
        if r.holds3 is not None:
            checked3 += 1
            if not r.holds3:
                failures.append(("iii", p))
    return {"points": (k + 1) * (k + 2) // 2, "checked_i": checked1, "checked_iii": checked3,
            "failures": failures}


# ---------------------------------------------------------------- recursive bound

def s2_complete_tripartite(sizes) -> int:
    """Number of S2 copies in the complete 3-partite 3-graph with the given part sizes."""
    a, b, c = sizes
    return a * b * comb(c, 2) + a * comb(b, 2) * c + comb(a, 2) * b * c


_S2 = [0, 0, 0]


def s2_rec(n: int) -> int:
    """Most S2 copies in a recursive construction on ``n`` vertices (exact DP).

    Edges from different levels share at most one vertex, so counts add up.
    """
    if n < 0:
        raise InputError("n must be nonnegative")
    if n > DP_LIMIT:
        raise InputError(f"exact recurrence is capped at n={DP_LIMIT}")
    with _lock:
        for m in range(len(_S2), n + 1):
            _S2.append(max(s2_complete_tripartite((a, b, m - a - b)) + _S2[a] + _S2[b] + _S2[m - a - b]
                           for a in range(1, m // 3 + 1) for b in range(a, (m - a) // 2 + 1)))
    return _S2[n]


def recursive_bound_rhs(n: int, sizes, s2_inside, eps, bs2: int, ms2: int) -> Fraction:
    """|V1||V2||V3|n/2 + sum s2_inside + eps*n^4 - max(bs2/9, ms2/10)."""
    if len(sizes) != 3 or len(s2_inside) != 3:
        raise InputError("need three part sizes and three inside counts")
    if any(s < 0 for s in sizes) or sum(sizes) != n:
        raise InputError(f"part sizes {tuple(sizes)} do not sum to n={n}")
    eps = Fraction(eps)
    a, b, c = sizes
    return (Fraction(a * b * c * n, 2) + sum(s2_inside) + eps * n ** 4
            - max(Fraction(bs2, 9), Fraction(ms2, 10)))


# ---------------------------------------------------------------- stability budget

@dataclass(frozen=True)
class StabilityBudget:
    eps: Fraction
    delta: Fraction
    part_slack: float
    edge_slack: Fraction
    inner_slack: Fraction
    removal: Callable
    chain_ok: bool
    step_coefficient: Fraction
    inner_scaling_ok: bool

    def removal_budget(self, n, m) -> Fraction:
        return self.removal(n, m)


def stability_budget(eps) -> StabilityBudget:
    """Constants of the stability induction for a given epsilon.

    ``chain_ok`` records 600*delta/eps^12 <= eps/2; ``step_coefficient`` is
    25 + (3/8)*600, the factor of delta/eps^12 m^3 reached in the inductive
    step, which must not exceed 600. ``inner_scaling_ok`` records
    2400*delta*(n/(2v))^12 <= delta*(n/v)^12.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise InputError("epsilon must lie in (0, 1)")
    delta = eps ** 13 / 1200
    ratio = delta / eps ** 12

    def removal(n, m):
        return 600 * ratio * Fraction(m) ** 3 + eps * Fraction(n) ** 2 * m / 6

    step = 25 + Fraction(3, 8) * 600
    return StabilityBudget(
        eps=eps,
        delta=delta,
        part_slack=6 * math.sqrt(eps),
        edge_slack=25 * eps,
        inner_slack=2400 * eps,
        removal=removal,
        chain_ok=600 * ratio <= eps / 2,
        step_coefficient=step,
        inner_scaling_ok=Fraction(2400, 2 ** 12) <= 1 and step <= 600,
    )


def base_case_holds(eps, n: int, m: int) -> bool:
    """C(m,3) <= eps*n^2*m/6 whenever m < eps*n."""
    eps = Fraction(eps)
    if not m < eps * n:
        raise InputError("base case applies only when m < eps*n")
    return comb(m, 3) <= eps * n * n * m / 6
