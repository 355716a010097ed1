"""Brute-force extremal oracle over family-free 3-graphs on few vertices."""
from __future__ import annotations

import json
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from pathlib import Path

from .canon import subset_table
from .constructions import s2_rec
from .errors import InputError
from .families import Family, is_family_free
from .generate import iter_levels
from .hypergraph import Hypergraph, count_s2, lp_norm

EXHAUSTIVE_MAX = 7
OBJECTIVES = ("edges", "l2norm", "s2count")


def objective_value(H: Hypergraph, objective: str) -> int:
    if objective == "edges":
        return len(H)
    if objective == "l2norm":
        return lp_norm(H, 2)
    if objective == "s2count":
        return count_s2(H)
    raise InputError(f"unknown objective {objective!r}; expected one of {', '.join(OBJECTIVES)}")


@dataclass(frozen=True)
class SearchTask:
    n: int
    family: Family
    objective: str = "s2count"
    mode: str = "exhaustive"
    restarts: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise InputError(f"unknown objective {self.objective!r}")
        if self.mode not in ("exhaustive", "augmenting"):
            raise InputError("mode must be exhaustive or augmenting")
        if self.n < 0:
            raise InputError("n must be nonnegative")
        if self.mode == "exhaustive" and self.n > EXHAUSTIVE_MAX:
            raise InputError(f"exhaustive search is limited to n <= {EXHAUSTIVE_MAX}; "
                             "use --mode augmenting for a lower bound")


@dataclass(frozen=True)
class SearchResult:
    value: int
    witness: Hypergraph
    classes_visited: int
    exact: bool


def _graph_from_code(n: int, code: int) -> Hypergraph:
    subsets = subset_table(n, 3)[1]
    return Hypergraph(3, n, tuple(s for i, s in enumerate(subsets) if code >> i & 1))


def search_max(task: SearchTask, threads: int = 1, checkpoint=None, progress=None) -> SearchResult:
    """Maximize the objective over family-free 3-graphs on ``task.n`` vertices.

    Exhaustive mode walks every isomorphism class by canonical edge
    augmentation; among tied classes the first one generated is kept, which
    is deterministic because generation order does not depend on threads.
    With ``checkpoint`` the frontier is saved after each level and a matching
    saved state is resumed.
    """
    if task.mode == "augmenting":
        return _augmenting(task)
    n = task.n
    best_val, best_G, visited = -1, None, 0
    start = None
    ck = Path(checkpoint) if checkpoint else None
    ident = {"n": n, "family": task.family.name, "objective": task.objective}
    if ck is not None and ck.exists():
        try:
            state = json.loads(ck.read_text())
        except json.JSONDecodeError:
            raise InputError(f"checkpoint {ck} is not valid JSON") from None
        if state.get("task") == ident:
            best_val = state["best"]
            best_G = _graph_from_code(n, state["witness"]) if state["witness"] is not None else None
            visited = state["visited"]
            frontier = [_graph_from_code(n, c) for c in state["frontier"]]
            start = (state["level"], frontier)
            if not frontier:
                return SearchResult(best_val, best_G, visited, True)
    for level, graphs in iter_levels(n, 3, task.family, threads, start=start):
        for G in graphs:
            v = objective_value(G, task.objective)
            if v > best_val:
                best_val, best_G = v, G
        visited += len(graphs)
        if progress is not None:
            progress(level, len(graphs), visited, best_val)
        if ck is not None:
            # the next level is regenerated from this frontier on resume
            ck.write_text(json.dumps({
                "task": ident, "level": level, "frontier": [G.mask for G in graphs],
                "best": best_val, "witness": best_G.mask if best_G is not None else None,
                "visited": visited - len(graphs),
            }))
    if ck is not None:
        ck.write_text(json.dumps({"task": ident, "level": None, "frontier": [], "best": best_val,
                                  "witness": best_G.mask, "visited": visited}))
    return SearchResult(best_val, best_G, visited, True)


def _augmenting(task: SearchTask) -> SearchResult:
    """Random maximal family-free graphs; the best is a lower bound only."""
    n = task.n
    triples = list(combinations(range(n), 3))
    best_val, best_G = -1, Hypergraph(3, n)
    for i in range(max(task.restarts, 1)):
        rng = random.Random(f"{task.seed}:{i}")
        order = triples[:]
        rng.shuffle(order)
        H = Hypergraph(3, n)
        for t in order:
            C = H.with_edges([t])
            if is_family_free(C, task.family, must_use=t):
                H = C
        v = objective_value(H, task.objective)
        if v > best_val or (v == best_val and H.edges < best_G.edges):
            best_val, best_G = v, H
    return SearchResult(best_val, best_G, task.restarts, False)


REFERENCE_S2 = Fraction(6, 13)


def density_report(results: dict) -> list:
    """Rows (n, ex, C(n,4), ratio, recursive lower bound, its ratio) for S2-count results."""
    rows = []
    for n in sorted(results):
        r = results[n]
        total = comb(n, 4)
        lb = s2_rec(n)
        rows.append({
            "n": n,
            "ex": r.value,
            "c_n_4": total,
            "ratio": Fraction(r.value, total) if total else None,
            "trec_lb": lb,
            "trec_ratio": Fraction(lb, total) if total else None,
            "exact": r.exact,
        })
    return rows


def format_report(rows: list, fmt: str = "text") -> str:
    cols = ["n", "ex", "c_n_4", "ratio", "trec_lb", "trec_ratio", "exact"]

    def cell(v):
        if isinstance(v, Fraction):
            return f"{float(v):.6f}"
        if v is None:
            return "-"
        return str(v).lower() if isinstance(v, bool) else str(v)

    if fmt == "csv":
        out = [",".join(cols)] + [",".join(cell(r[c]) for c in cols) for r in rows]
        out.append(f"reference,6/13,{float(REFERENCE_S2):.6f}")
        return "\n".join(out) + "\n"
    table = [cols] + [[cell(r[c]) for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    out = ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in table]
    out.append(f"reference 6/13 = {float(REFERENCE_S2):.6f} (small n values are far from the limit)")
    return "\n".join(out) + "\n"


def _stderr_progress(level, count, visited, best):
    print(f"level {level}: {count} classes, visited {visited}, best {best}", file=sys.stderr)
