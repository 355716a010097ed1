"""Flag-algebra semidefinite programs: assembly, SDPA export and solution import.

The program bounds an objective ``obj`` over the untyped m-vertex basis by
finding the smallest ``u`` with, for every basis flag G,

    u - obj_G = sum_b <Q_b, M_b(G)> + sum_j lambda_j a_j(G) + c_G,

Q_b PSD, lambda >= 0, c >= 0. ``M_b(G)`` is the averaged product tensor of a
typed block after the invariant/anti-invariant change of basis; ``a_j`` are
inequality constraints multiplied by a flag and averaged.

SDPA layout (primal variables x_G, one per basis flag):
PSD blocks in assembly order, then a diagonal block for the multipliers
(omitted when there are none), a diagonal block of slacks x_G >= 0, and a
two-entry normalization block sum x - 1 >= 0, 1 - sum x >= 0. The SDPA dual
matrix then carries (Q_b, lambda, c, y+, y-) and u = y- - y+.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import perm
from pathlib import Path

import numpy as np

from .canon import canonical_labeling, group_closure
from .errors import DimensionMismatch, InputError
from .flags import (
    DensityVector,
    Flag,
    FlagBasis,
    Theory,
    downward,
    enumerate_flags,
    flag_types,
    indicator,
    lift,
    mantel_theory,
    multiply,
    named_flags,
    pair_distribution,
    pair_total,
    typed_versions,
    zero_vector,
)

MAX_M = 6


@dataclass(frozen=True)
class LinearConstraint:
    """``lhs (sense) rhs`` with lhs over an untyped or a typed basis."""

    name: str
    sense: str
    lhs: DensityVector
    rhs: Fraction = Fraction(0)

    def __post_init__(self):
        if self.sense not in (">=", "<="):
            raise InputError(f"constraint sense must be >= or <=, got {self.sense!r}")

    def as_nonnegative(self) -> DensityVector:
        """The vector g with the constraint equivalent to g >= 0."""
        g = self.lhs.plus_constant(-Fraction(self.rhs))
        return g if self.sense == ">=" else -g


@dataclass
class Block:
    name: str
    sigma: Flag
    parity: str
    flags: tuple
    rows: tuple
    tensors: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.rows)


@dataclass
class SdpProblem:
    theory: Theory
    m: int
    basis: FlagBasis
    objective: DensityVector
    objective_name: str
    blocks: list
    constraints: list
    multiplier_columns: list
    multiplier_groups: dict

    @property
    def digest(self) -> str:
        return self.basis.digest

    @property
    def n_multipliers(self) -> int:
        return len(self.multiplier_columns)

    def block_layout(self) -> list:
        """(name, signed size) for every SDPA block in order."""
        out = [(b.name, b.size) for b in self.blocks]
        if self.multiplier_columns:
            out.append(("multipliers", -len(self.multiplier_columns)))
        out.append(("slacks", -len(self.basis)))
        out.append(("normalization", -2))
        return out


@dataclass(frozen=True)
class SdpConfig:
    """``type_sizes`` None means k = m-2, m-4, ... down to 0 or 1.

    ``multiplier_size`` None multiplies each constraint by flags that fill
    the remaining vertices exactly.
    """

    type_sizes: tuple | None = None
    constraints: bool | None = None
    multiplier_size: int | None = None
    split_symmetry: bool = True


# ---------------------------------------------------------------- symmetry split

def _type_group(sigma: Flag) -> list:
    G = sigma.graph
    _, _, gens, _ = canonical_labeling(G.n, G.r, G.edges, G.colors, 0)
    return group_closure(G.n, gens)


def _act(F: Flag, g) -> tuple:
    """Key of F with roots relabeled by g."""
    from .flags import _key
    G = F.graph
    k = F.k
    p = [g[v] if v < k else v for v in range(F.n)]
    inv = [0] * F.n
    for v, q in enumerate(p):
        inv[q] = v
    edges = [tuple(sorted(p[v] for v in e)) for e in G.edges]
    colors = tuple(G.colors[inv[q]] for q in range(F.n))
    return _key(G.r, F.n, edges, colors, k)


def symmetry_split(sigma: Flag, flags: FlagBasis) -> tuple[list, list]:
    """Rows spanning the invariant and anti-invariant subspaces of the type's symmetry action.

    Invariant rows are orbit indicators; anti-invariant rows are differences
    inside an orbit, which are orthogonal to every orbit indicator.
    """
    group = _type_group(sigma)
    d = len(flags)
    seen, orbits = set(), []
    for i, F in enumerate(flags.flags):
        if i in seen:
            continue
        orbit = sorted({flags.index[_act(F, g)] for g in group})
        seen.update(orbit)
        orbits.append(orbit)
    inv, anti = [], []
    for orbit in orbits:
        row = [0] * d
        for i in orbit:
            row[i] = 1
        inv.append(tuple(row))
        for j in orbit[1:]:
            row = [0] * d
            row[orbit[0]] = 1
            row[j] = -1
            anti.append(tuple(row))
    return inv, anti


# ---------------------------------------------------------------- tensors

@lru_cache(maxsize=100_000)
def _type_of(key: tuple) -> tuple:
    return Flag(key).type_key


def product_tensor(G: Flag, sigma: Flag, flags: FlagBasis) -> dict:
    """Averaged E_theta p(F_i, F_j; (G, theta)) as a sparse symmetric dict {(i, j): value}."""
    k = sigma.n
    s = flags.m
    counts: dict = {}
    for kk, cnt in typed_versions(G.key, k).items():
        if _type_of(kk) != sigma.key:
            continue
        for (ka, kb), c in pair_distribution(kk, s, s).items():
            i, j = flags.index[ka], flags.index[kb]
            counts[(i, j)] = counts.get((i, j), 0) + cnt * c
    total = perm(G.n, k) * pair_total(G.n, k, s, s)
    return {ij: Fraction(v, total) for ij, v in counts.items()}


def _transform(P: dict, rows) -> dict:
    """Upper triangle of rows * P * rows^T."""
    out = {}
    nz = [[(j, v) for j, v in enumerate(r) if v] for r in rows]
    for a in range(len(rows)):
        for b in range(a, len(rows)):
            s = Fraction(0)
            for i, x in nz[a]:
                for j, y in nz[b]:
                    p = P.get((i, j))
                    if p:
                        s += x * y * p
            if s:
                out[(a, b)] = s
    return out


# ---------------------------------------------------------------- objectives and constraints

def edge_density_vector(theory: Theory, m: int) -> DensityVector:
    target = enumerate_flags(theory, m)
    base = enumerate_flags(theory, theory.r)
    c = tuple(Fraction(len(F.graph.edges)) for F in base.flags)
    return lift(DensityVector(base, c), target)


def s2_density_vector(theory: Theory, m: int) -> DensityVector:
    """S2 copies per 4-set: each 4-vertex flag weighted by its pairs of edges sharing two vertices."""
    if theory.r != 3:
        raise InputError("S2 density needs a 3-graph theory")
    target = enumerate_flags(theory, m)
    base = enumerate_flags(theory, 4)
    from .hypergraph import count_s2
    c = tuple(Fraction(count_s2(F.graph)) for F in base.flags)
    return lift(DensityVector(base, c), target)


def constant_vector(theory: Theory, m: int, value=1) -> DensityVector:
    b = enumerate_flags(theory, m)
    return DensityVector(b, (Fraction(value),) * len(b))


def _nxt(i: int, step: int) -> int:
    return (i - 1 + step) % 3 + 1


def prop34_constraints(theory: Theory) -> list:
    """The inequality catalog of the 3-colored theory, each over its natural smallest basis."""
    if theory.r != 3 or theory.colors != 3:
        raise InputError("the constraint catalog needs the 3-colored 3-graph theory")
    N3 = named_flags(theory, 3)
    N1 = named_flags(theory, 1)
    N4 = named_flags(theory, 4)

    def K(c, a, b):
        a, b = sorted((a, b))
        return N3[f"K{c}_{a}{b}"]

    def E(*t):
        return N3["E" + "".join(map(str, sorted(t)))]

    def Eb(*t):
        return N3["Ebar" + "".join(map(str, sorted(t)))]

    out = []
    for i in (1, 2, 3):
        j, l = _nxt(i, 1), _nxt(i, 2)
        out.append(LinearConstraint(f"localmax_{i}_{i}{j}", ">=", K(i, j, l) - K(i, i, j)))
        out.append(LinearConstraint(f"localmax_{i}_{i}{l}", ">=", K(i, j, l) - K(i, i, l)))
    bad = zero_vector(E(1, 2, 3).basis)
    for i in (1, 2, 3):
        bad = bad + E(i, i, _nxt(i, 1)) + E(i, i, _nxt(i, 2))
    out.append(LinearConstraint("bad_vs_missing", "<=", bad - Fraction(3, 4) * Eb(1, 2, 3)))
    out.append(LinearConstraint("turan", "<=", N3["edges"], Fraction(1, 4)))
    for i in (1, 2, 3):
        out.append(LinearConstraint(f"turan_inside_{i}", "<=", 3 * E(i, i, i) - Eb(i, i, i)))
    out.append(LinearConstraint("maxcut", ">=", E(1, 2, 3), Fraction(198, 1000)))
    for i in (1, 2, 3):
        out.append(LinearConstraint(f"part_lo_{i}", ">=", N1[f"V{i}"], Fraction(1, 5)))
        out.append(LinearConstraint(f"part_hi_{i}", "<=", N1[f"V{i}"], Fraction(1, 2)))
    out.append(LinearConstraint("s2_density", ">=", N4["S"], Fraction(6, 13) - Fraction(1, 10 ** 6)))
    return out


def resolve_objective(theory: Theory, m: int, objective) -> tuple[str, DensityVector]:
    if isinstance(objective, DensityVector):
        target = enumerate_flags(theory, m)
        vec = objective if objective.basis.m == m else lift(objective, target)
        return "custom", vec
    name = str(objective)
    if name == "prop34":
        if m < 4 or theory.r != 3 or theory.colors != 3:
            raise InputError("prop34 needs a 3-colored 3-graph theory and m >= 4")
        N = named_flags(theory, m)
        return name, N["Sb"] - Fraction(9, 10) * N["Sm"]
    if name == "edge-density":
        return name, edge_density_vector(theory, m)
    if name == "s2-density":
        return name, s2_density_vector(theory, m)
    if name in ("one", "constant"):
        return "one", constant_vector(theory, m)
    raise InputError(f"unknown objective {name!r}; expected prop34, edge-density, s2-density or one")


# ---------------------------------------------------------------- assembly

def _default_type_sizes(m: int) -> tuple:
    return tuple(range(m - 2, -1, -2))


def assemble_program(theory: Theory, m: int, objective="edge-density", config: SdpConfig | None = None,
                     threads: int = 1) -> SdpProblem:
    config = config or SdpConfig()
    if m < 1 or m > MAX_M:
        raise InputError(f"m must lie in 1..{MAX_M}")
    basis = enumerate_flags(theory, m, threads=threads)
    obj_name, obj = resolve_objective(theory, m, objective)
    sizes = config.type_sizes if config.type_sizes is not None else _default_type_sizes(m)
    blocks = []
    for k in sizes:
        if k < 0 or (m + k) % 2 or k > m - 2:
            raise InputError(f"type size {k} is incompatible with m={m}")
        s = (m + k) // 2
        for t_idx, sigma in enumerate(flag_types(theory, k)):
            flags = enumerate_flags(theory, s, sigma)
            if not len(flags):
                continue
            if config.split_symmetry:
                inv, anti = symmetry_split(sigma, flags)
            else:
                inv, anti = [tuple(1 if i == j else 0 for j in range(len(flags))) for i in range(len(flags))], []
            tensors_raw = [product_tensor(G, sigma, flags) for G in basis.flags]
            for parity, rows in (("inv", inv), ("anti", anti)):
                if not rows:
                    continue
                blk = Block(f"k{k}t{t_idx}:{parity}", sigma, parity, flags.flags, tuple(rows))
                blk.tensors = [_transform(P, rows) for P in tensors_raw]
                blocks.append(blk)
    use_constraints = config.constraints
    if use_constraints is None:
        use_constraints = obj_name == "prop34"
    constraints = prop34_constraints(theory) if use_constraints else []
    columns, groups = [], {}
    for con in constraints:
        g = con.as_nonnegative()
        gb = g.basis
        k = gb.sigma.n
        h = config.multiplier_size if config.multiplier_size is not None else m - gb.m + k
        if h < k or gb.m + h - k > m:
            raise InputError(f"multiplier size {h} does not fit constraint {con.name} at m={m}")
        mult_basis = enumerate_flags(theory, h, gb.sigma)
        typed_target = enumerate_flags(theory, m, gb.sigma)
        names = []
        for F in mult_basis.flags:
            col = multiply(g, indicator(mult_basis, F), typed_target)
            if k:
                col = downward(col, basis)
            columns.append((f"{con.name}#{len(names)}", col.coeffs))
            names.append(str(F))
        groups[con.name] = names
    return SdpProblem(theory, m, basis, obj, obj_name, blocks, constraints, columns, groups)


def mantel_program() -> SdpProblem:
    """Triangle-free graphs, 3-vertex flags, edge density objective."""
    return assemble_program(mantel_theory(), 3, "edge-density")


# ---------------------------------------------------------------- SDPA export

def _scale(problem: SdpProblem) -> int:
    dens = {1}
    for c in problem.objective.coeffs:
        dens.add(c.denominator)
    for b in problem.blocks:
        for t in b.tensors:
            dens.update(v.denominator for v in t.values())
    for _, col in problem.multiplier_columns:
        dens.update(v.denominator for v in col)
    return math.lcm(*dens)


def sdpa_entries(problem: SdpProblem):
    """Yield (matno, block, i, j, Fraction) in deterministic order, 1-based indices."""
    nb = len(problem.blocks)
    mult_block = nb + 1 if problem.multiplier_columns else None
    slack_block = nb + (2 if mult_block else 1)
    norm_block = slack_block + 1
    yield 0, norm_block, 1, 1, Fraction(1)
    yield 0, norm_block, 2, 2, Fraction(-1)
    for g in range(len(problem.basis)):
        for bi, blk in enumerate(problem.blocks, start=1):
            for (i, j), v in sorted(blk.tensors[g].items()):
                yield g + 1, bi, i + 1, j + 1, v
        if mult_block:
            for ci, (_, col) in enumerate(problem.multiplier_columns, start=1):
                if col[g]:
                    yield g + 1, mult_block, ci, ci, col[g]
        yield g + 1, slack_block, g + 1, g + 1, Fraction(1)
        yield g + 1, norm_block, 1, 1, Fraction(1)
        yield g + 1, norm_block, 2, 2, Fraction(-1)


def export_sdpa(problem: SdpProblem, destination) -> tuple[Path, Path]:
    """Write ``<destination>`` (.dat-s) and a ``.meta`` sidecar; returns both paths."""
    dest = Path(destination)
    scale = _scale(problem)
    layout = problem.block_layout()
    lines = [
        f"* flag program m={problem.m} objective={problem.objective_name}",
        f"{len(problem.basis)} = mDIM",
        f"{len(layout)} = nBLOCK",
        " ".join(str(s) for _, s in layout) + " = bLOCKsTRUCT",
        " ".join(str(int(-c * scale)) for c in problem.objective.coeffs),
    ]
    for matno, blk, i, j, v in sdpa_entries(problem):
        iv = v * scale
        if iv.denominator != 1:
            raise AssertionError("scale does not clear a denominator")
        lines.append(f"{matno} {blk} {i} {j} {iv.numerator}")
    try:
        dest.write_text("\n".join(lines) + "\n")
        meta = dest.with_suffix(dest.suffix + ".meta")
        meta.write_text(
            f"basis_digest={problem.digest}\n"
            f"scale={scale}\n"
            f"m={problem.m}\n"
            f"theory={problem.theory.descriptor()}\n"
            f"objective={problem.objective_name}\n"
            f"variables={len(problem.basis)}\n"
            "blocks=" + ";".join(f"{n}:{s}" for n, s in layout) + "\n"
        )
    except OSError as exc:
        raise InputError(f"cannot write SDPA files: {exc}") from None
    return dest, meta


def read_meta(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out


@dataclass
class SdpaData:
    m_dim: int
    block_struct: tuple
    c: tuple
    entries: dict


def read_sdpa(path, scale: int | None = None) -> SdpaData:
    """Parse a .dat-s file; values are divided by ``scale`` (read from the sidecar when present)."""
    p = Path(path)
    if scale is None:
        meta = p.with_suffix(p.suffix + ".meta")
        scale = int(read_meta(meta)["scale"]) if meta.exists() else 1
    rows = []
    for line in p.read_text().splitlines():
        line = line.strip()
        if not line or line[0] in "*\"":
            continue
        rows.append(line.split("=")[0].strip() if "=" in line else line)
    try:
        m_dim = int(rows[0].split()[0])
        nblock = int(rows[1].split()[0])
        struct = tuple(int(x) for x in re.split(r"[\s,{}()]+", rows[2]) if x)
        c = tuple(Fraction(x) / scale for x in re.split(r"[\s,{}()]+", rows[3]) if x)
    except (IndexError, ValueError):
        raise InputError(f"{p}: malformed SDPA header") from None
    if len(struct) != nblock or len(c) != m_dim:
        raise DimensionMismatch(f"{p}: header sizes disagree")
    entries = {}
    for line in rows[4:]:
        parts = line.split()
        if len(parts) != 5:
            raise InputError(f"{p}: bad entry line {line!r}")
        key = tuple(int(x) for x in parts[:4])
        entries[key] = Fraction(parts[4]) / scale
    return SdpaData(m_dim, struct, c, entries)


def program_sdpa_data(problem: SdpProblem) -> SdpaData:
    entries = {(a, b, i, j): v for a, b, i, j, v in sdpa_entries(problem)}
    return SdpaData(len(problem.basis), tuple(s for _, s in problem.block_layout()),
                    tuple(-c for c in problem.objective.coeffs), entries)


# ---------------------------------------------------------------- solution import

def _parse_braces(text: str, start: int):
    """Parse nested {...} lists of numbers starting at text[start] == '{'."""
    stack = [[]]
    token = ""
    i = start
    depth = 0
    while i < len(text):
        ch = text[i]
        if ch == "{":
            depth += 1
            stack.append([])
        elif ch == "}":
            if token.strip():
                stack[-1].append(float(token))
            token = ""
            done = stack.pop()
            stack[-1].append(done)
            depth -= 1
            if depth == 0:
                return stack[0][0], i + 1
        elif ch == ",":
            if token.strip():
                stack[-1].append(float(token))
            token = ""
        elif ch.isspace():
            if token.strip():
                stack[-1].append(float(token))
            token = ""
        else:
            token += ch
        i += 1
    raise EOFError("unbalanced braces")


@dataclass
class SdpSolution:
    primal_objective: float | None
    dual_objective: float | None
    x: list
    blocks: list
    names: list = field(default_factory=list)

    def block(self, name: str):
        return self.blocks[self.names.index(name)]


def import_solution(path, problem: SdpProblem | None = None) -> SdpSolution:
    """Read an SDPA-style output file (objValPrimal, objValDual, xVec, yMat).

    ``yMat`` carries the dual matrices, i.e. the certificate blocks. With a
    program, block shapes are checked and blocks are named.
    """
    text = Path(path).read_text()
    prim = dual = None
    m = re.search(r"objValPrimal\s*=\s*(\S+)", text)
    if m:
        prim = float(m.group(1))
    m = re.search(r"objValDual\s*=\s*(\S+)", text)
    if m:
        dual = float(m.group(1))
    x = []
    m = re.search(r"xVec\s*=\s*", text)
    if m:
        try:
            x, _ = _parse_braces(text, text.index("{", m.end()))
        except (EOFError, ValueError):
            raise InputError(f"{path}: malformed xVec") from None
    m = re.search(r"yMat\s*=\s*", text)
    if not m:
        raise InputError(f"{path}: no yMat section")
    layout = problem.block_layout() if problem is not None else None
    blocks = []
    try:
        pos = text.index("{", m.end())
    except ValueError:
        raise InputError(f"{path}: empty yMat section") from None
    # walk the outer list manually so a truncated file names the failing block
    pos += 1
    while True:
        nxt = re.search(r"[{}]", text[pos:])
        if nxt is None:
            break
        at = pos + nxt.start()
        if text[at] == "}":
            break
        try:
            item, pos = _parse_braces(text, at)
        except (EOFError, ValueError):
            break
        blocks.append(item)
    arrays = [np.array(b, dtype=float) for b in blocks]
    names = []
    if layout is not None:
        for idx, (name, size) in enumerate(layout):
            if idx >= len(arrays):
                raise DimensionMismatch(f"{path}: block {name!r} is missing or incomplete")
            a = arrays[idx]
            want = (size, size) if size > 0 else (-size,)
            if a.shape != want:
                raise DimensionMismatch(f"{path}: block {name!r} has shape {a.shape}, expected {want}")
            names.append(name)
        if len(arrays) > len(layout):
            raise DimensionMismatch(f"{path}: {len(arrays)} blocks but the program has {len(layout)}")
    return SdpSolution(prim, dual, list(x), arrays, names)


def format_solution(primal: float, dual: float, x, blocks) -> str:
    """Write an SDPA-style output file body for the given dual blocks."""
    def num(v):
        return f"{v:+.16e}"

    out = [f"objValPrimal = {num(primal)}", f"objValDual   = {num(dual)}", "xVec = ",
           "{" + ",".join(num(v) for v in x) + "}", "yMat = ", "{"]
    for b in blocks:
        b = np.asarray(b, dtype=float)
        if b.ndim == 1:
            out.append("{" + ",".join(num(v) for v in b) + " }")
        else:
            out.append("{ " + ", ".join("{" + ",".join(num(v) for v in row) + " }" for row in b) + " }")
    out.append("}")
    return "\n".join(out) + "\n"
