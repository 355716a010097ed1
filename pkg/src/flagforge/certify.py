"""Exact verification of flag-algebra certificates."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import DimensionMismatch, InputError


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            raise InputError(f"bad rational {x!r}") from None
    raise InputError(f"expected a rational string, got {x!r}")


def round_rational(x, denominator_limit: int) -> Fraction:
    """Best rational approximation of ``x`` with denominator at most the limit."""
    if denominator_limit < 1:
        raise InputError("denominator limit must be positive")
    return Fraction(float(x)).limit_denominator(denominator_limit)


def verify_psd_exact(Q) -> bool:
    """Exact PSD test by LDL^T with diagonal pivoting.

    At each step the largest remaining diagonal entry is the pivot. A
    negative diagonal means not PSD; when every remaining diagonal is zero
    the remaining block must vanish entirely.
    """
    A = [[_frac(v) for v in row] for row in Q]
    n = len(A)
    if any(len(row) != n for row in A):
        raise DimensionMismatch("matrix is not square")
    for i in range(n):
        for j in range(i + 1, n):
            if A[i][j] != A[j][i]:
                raise InputError(f"matrix is not symmetric at ({i}, {j})")
    active = list(range(n))
    while active:
        p = max(active, key=lambda i: A[i][i])
        d = A[p][p]
        if d < 0:
            return False
        if d == 0:
            return all(A[i][j] == 0 for i in active for j in active)
        active.remove(p)
        row = A[p]
        for i in active:
            f = row[i]
            if f == 0:
                continue
            f = f / d
            Ai = A[i]
            for j in active:
                if row[j]:
                    Ai[j] -= f * row[j]
    return True


@dataclass
class Certificate:
    theory: str
    m: int
    bound: Fraction
    blocks: dict
    multipliers: dict
    slacks: list
    basis_digest: str
    objective: str = "edge-density"

    def to_json(self) -> str:
        def s(x):
            return f"{x.numerator}/{x.denominator}"

        data = {
            "theory": self.theory,
            "m": self.m,
            "bound": s(self.bound),
            "blocks": {k: [[s(v) for v in row] for row in Q] for k, Q in self.blocks.items()},
            "multipliers": {k: [s(v) for v in vec] for k, vec in self.multipliers.items()},
            "slacks": [s(v) for v in self.slacks],
            "basis_digest": self.basis_digest,
            "objective": self.objective,
        }
        return json.dumps(data, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        try:
            d = json.loads(text)
            return cls(
                theory=str(d["theory"]),
                m=int(d["m"]),
                bound=_frac(d["bound"]),
                blocks={k: [[_frac(v) for v in row] for row in Q] for k, Q in d["blocks"].items()},
                multipliers={k: [_frac(v) for v in vec] for k, vec in d.get("multipliers", {}).items()},
                slacks=[_frac(v) for v in d["slacks"]],
                basis_digest=str(d["basis_digest"]),
                objective=str(d.get("objective", "edge-density")),
            )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise InputError(f"malformed certificate: {exc}") from None

    @classmethod
    def load(cls, path) -> "Certificate":
        return cls.from_json(Path(path).read_text())

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())


@dataclass
class Report:
    issues: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def fail(self, msg: str):
        self.issues.append(msg)

    @property
    def ok(self) -> bool:
        return not self.issues


def _inner(Q, tensor: dict) -> Fraction:
    s = Fraction(0)
    for (i, j), v in tensor.items():
        s += Q[i][j] * v if i == j else (Q[i][j] + Q[j][i]) * v
    return s


def _multiplier_vector(program, cert: Certificate, report: Report) -> list:
    lam = []
    for con in program.constraints:
        want = len(program.multiplier_groups[con.name])
        got = cert.multipliers.get(con.name)
        if got is None:
            report.fail(f"multipliers for {con.name} missing")
            got = [Fraction(0)] * want
        elif len(got) != want:
            raise DimensionMismatch(f"multipliers for {con.name}: expected {want}, got {len(got)}")
        lam.extend(got)
    extra = set(cert.multipliers) - {c.name for c in program.constraints}
    if extra:
        raise DimensionMismatch(f"certificate has multipliers for unknown constraints {sorted(extra)}")
    return lam


def identity_residuals(program, cert: Certificate) -> list:
    """u - obj_G - SOS_G - sum lambda a_G - c_G for every basis flag G."""
    lam = _multiplier_vector(program, cert, Report())
    out = []
    for g in range(len(program.basis)):
        rhs = cert.slacks[g]
        for blk in program.blocks:
            rhs += _inner(cert.blocks[blk.name], blk.tensors[g])
        for (_, col), l in zip(program.multiplier_columns, lam):
            if l and col[g]:
                rhs += l * col[g]
        out.append(cert.bound - program.objective.coeffs[g] - rhs)
    return out


def verify_certificate(program, cert: Certificate) -> tuple[bool, Report]:
    """Check PSD blocks, nonnegativity and the per-flag identity, all exactly."""
    report = Report()
    if cert.basis_digest != program.digest:
        report.fail(f"basis digest {cert.basis_digest} does not match program digest {program.digest}")
    if cert.m != program.m:
        raise DimensionMismatch(f"certificate is for m={cert.m}, program has m={program.m}")
    if len(cert.slacks) != len(program.basis):
        raise DimensionMismatch(f"expected {len(program.basis)} slacks, got {len(cert.slacks)}")
    names = {b.name for b in program.blocks}
    if set(cert.blocks) != names:
        missing = sorted(names - set(cert.blocks))
        extra = sorted(set(cert.blocks) - names)
        raise DimensionMismatch(f"block mismatch: missing {missing}, unexpected {extra}")
    for blk in program.blocks:
        Q = cert.blocks[blk.name]
        if len(Q) != blk.size or any(len(r) != blk.size for r in Q):
            raise DimensionMismatch(f"block {blk.name} must be {blk.size}x{blk.size}")
        try:
            if not verify_psd_exact(Q):
                report.fail(f"block {blk.name} is not positive semidefinite")
        except InputError as exc:
            report.fail(f"block {blk.name}: {exc}")
    lam = _multiplier_vector(program, cert, report)
    for (name, _), l in zip(program.multiplier_columns, lam):
        if l < 0:
            report.fail(f"multiplier {name} is negative ({l})")
    for g, c in enumerate(cert.slacks):
        if c < 0:
            report.fail(f"slack of flag {g} ({program.basis.flags[g]}) is negative ({c})")
    for g, r in enumerate(identity_residuals(program, cert)):
        if r != 0:
            report.fail(f"identity fails at flag {g} ({program.basis.flags[g]}): residual {r}")
    return report.ok, report


def round_solution(solution, program=None, denominator_limit: int = 10 ** 6,
                   clamp_tolerance: float = 1e-6, raise_bound: bool = False):
    """Round a floating solution to rationals; returns (Certificate, notes).

    With a program, slacks are recomputed exactly from the identity instead
    of rounded; ``raise_bound`` then lifts u just enough to make every slack
    nonnegative. The result still has to pass :func:`verify_certificate`.
    """
    if denominator_limit < 1:
        raise InputError("denominator limit must be positive")
    notes = []

    def rnd(x) -> Fraction:
        return round_rational(x, denominator_limit)

    blocks_raw = list(solution.blocks)
    layout = program.block_layout() if program is not None else None
    names = solution.names or (layout and [n for n, _ in layout]) or []
    by_name = dict(zip(names, blocks_raw))
    norm = by_name.get("normalization", blocks_raw[-1])
    bound = rnd(norm[1] - norm[0])
    cert_blocks = {}
    psd_names = [b.name for b in program.blocks] if program is not None else \
        [n for n in names if n not in ("multipliers", "slacks", "normalization")]
    for name in psd_names:
        A = by_name[name]
        n = len(A)
        cert_blocks[name] = [[rnd((A[i][j] + A[j][i]) / 2) for j in range(n)] for i in range(n)]
    mults = {}
    raw_l = list(by_name.get("multipliers", []))
    if program is not None:
        pos = 0
        for con in program.constraints:
            cnt = len(program.multiplier_groups[con.name])
            vec = []
            for t, x in enumerate(raw_l[pos:pos + cnt]):
                q = rnd(x)
                if x < 0:
                    if -x <= clamp_tolerance:
                        notes.append(f"clamped multiplier {con.name}#{t} ({x:.3g}) to 0")
                    else:
                        notes.append(f"multiplier {con.name}#{t} is negative ({x:.3g}); clamped to 0")
                    q = Fraction(0)
                vec.append(q)
            mults[con.name] = vec
            pos += cnt
    raw_c = list(by_name.get("slacks", []))
    slacks = []
    for g, x in enumerate(raw_c):
        q = rnd(x)
        if x < 0:
            notes.append(f"clamped slack {g} ({x:.3g}) to 0")
            q = Fraction(0)
        slacks.append(q)
    cert = Certificate(
        theory=program.theory.descriptor() if program is not None else "",
        m=program.m if program is not None else 0,
        bound=bound,
        blocks=cert_blocks,
        multipliers=mults,
        slacks=slacks,
        basis_digest=program.digest if program is not None else "",
        objective=program.objective_name if program is not None else "edge-density",
    )
    if program is not None:
        cert.slacks = [Fraction(0)] * len(program.basis)
        exact = identity_residuals(program, cert)
        deficit = min(exact) if exact else Fraction(0)
        if deficit < 0:
            if raise_bound:
                notes.append(f"raised bound by {-deficit} to absorb negative slacks")
                cert.bound -= deficit
                exact = [r - deficit for r in exact]
            else:
                bad = [g for g, r in enumerate(exact) if r < 0]
                notes.append(f"{len(bad)} recomputed slacks are negative (first at flag {bad[0]})")
        cert.slacks = exact
    return cert, notes
