"""Command-line front end.

Every command produces a list of records; ``--format`` only changes how they
are rendered, so the numbers are the same in text, csv and json-lines.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .errors import FlagforgeError, InputError

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 2, 3


class VerificationFailed(Exception):
    def __init__(self, records, issues):
        super().__init__("verification failed")
        self.records = records
        self.issues = issues


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


# ---------------------------------------------------------------- rendering

def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ",".join(_cell(x) for x in v)
    return str(v)


def render(records: list, fmt: str) -> str:
    if fmt == "json-lines":
        return "".join(json.dumps({k: _cell(v) for k, v in r.items()}) + "\n" for r in records)
    if fmt == "csv":
        buf = io.StringIO()
        header = None
        for r in records:
            keys = list(r)
            if keys != header:
                header = keys
                csv.writer(buf, lineterminator="\n").writerow(keys)
            csv.writer(buf, lineterminator="\n").writerow([_cell(v) for v in r.values()])
        return buf.getvalue()
    out = []
    for r in records:
        out.append(" ".join(f"{k}={_cell(v)}" for k, v in r.items()))
    return "\n".join(out) + ("\n" if out else "")


def _warn(msg: str) -> None:
    print(f"warn: {msg}", file=sys.stderr)


# ---------------------------------------------------------------- helpers

def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational number: {text!r}") from None


def _load_graph(path):
    from .hypergraph import read_hypergraph

    try:
        return read_hypergraph(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _parse_parts(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise InputError(f"bad partition {text!r}") from None


def _graph_stats(H) -> dict:
    from .hypergraph import count_s2, lp_norm

    return {"n": H.n, "edges": len(H), "l2": lp_norm(H, 2), "s2": count_s2(H)}


def _write_graph(H, path, parts=None):
    from .hypergraph import format_hypergraph

    try:
        Path(path).write_text(format_hypergraph(H, parts=parts))
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _cache_dir():
    d = os.environ.get("FLAGFORGE_CACHE_DIR")
    if not d:
        return None
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _theory(args):
    from .flags import mantel_theory, theory_from_args

    if getattr(args, "mantel", False):
        return mantel_theory()
    return theory_from_args(args.family, args.colors)


def _program(args):
    from .sdp import SdpConfig, assemble_program

    theory = _theory(args)
    objective = "edge-density" if args.mantel and args.objective is None else (args.objective or "prop34")
    sizes = None
    if args.types:
        try:
            sizes = tuple(int(x) for x in args.types.split(","))
        except ValueError:
            raise InputError(f"bad --types {args.types!r}") from None
    constraints = False if args.no_constraints else None
    cfg = SdpConfig(type_sizes=sizes, constraints=constraints, split_symmetry=not args.no_split)
    return assemble_program(theory, args.m, objective, cfg, threads=args.threads)


# ---------------------------------------------------------------- commands

def cmd_norms(args):
    from .hypergraph import count_s2, lp_norm

    H, _ = _load_graph(args.file)
    rec = {"l1": lp_norm(H, 1), "l2": lp_norm(H, 2)}
    for p in args.p or ():
        if p < 1:
            raise InputError("p must be a positive integer")
        rec[f"l{p}"] = lp_norm(H, p)
    if H.r == 3:
        rec["s2"] = count_s2(H)
    else:
        _warn("s2 is only defined for 3-graphs; omitted")
    return [rec]


def cmd_construct(args):
    from .constructions import (balanced_tree, build_bipartite_B, build_t_rec, optimal_tree,
                                parse_tree, top_partition)

    if args.kind == "trec":
        if args.tree:
            tree = parse_tree(args.tree)
        elif args.n is not None:
            tree = balanced_tree(args.n) if args.balanced else optimal_tree(args.n)
        else:
            raise InputError("construct trec needs --n or --tree")
        H = build_t_rec(tree)
        parts = None if tree.is_leaf else top_partition(tree)
        rec = {"tree": str(tree), **_graph_stats(H)}
    else:
        if args.n1 is None or args.n2 is None:
            raise InputError("construct bip needs --n1 and --n2")
        H = build_bipartite_B(args.n1, args.n2)
        parts = None
        rec = {"n1": args.n1, "n2": args.n2, **_graph_stats(H)}
    if args.out:
        _write_graph(H, args.out, parts)
    return [rec]


def cmd_trec_table(args):
    from .constructions import DP_LIMIT, s2_rec, t_rec_2

    if not 0 <= args.max_n <= DP_LIMIT:
        raise InputError(f"--max-n must lie in 0..{DP_LIMIT}")
    rows = []
    for n in range(args.min_n, args.max_n + 1):
        t, split = t_rec_2(n)
        rows.append({"n": n, "t": t, "split": split or (), "density": Fraction(t, n ** 4) if n else Fraction(0),
                     "density_float": t / n ** 4 if n else 0.0, "s2": s2_rec(n)})
    return rows


def cmd_partition(args):
    from .families import family_from_keywords
    from .partitions import (check_prop33, empty_parts, inside_counts, is_locally_maximal, local_max_search, max_cut, metrics,
                             random_partition)

    H, extras = _load_graph(args.file)
    if args.action == "maxcut":
        P, M = max_cut(H, restarts=args.restarts, seed=args.seed)
    else:
        if args.parts:
            P = _parse_parts(args.parts)
        elif "parts" in extras:
            P = extras["parts"]
        elif args.action == "localmax":
            P = random_partition(H.n, args.seed)
        else:
            raise InputError("no partition: add a 'parts:' line to the file or pass --parts")
        if args.action == "localmax":
            P = local_max_search(H, P)
        M = metrics(H, P)
    if H.n >= 3 and empty_parts(P):
        _warn(f"parts {empty_parts(P)} are empty")
    rec = {
        "partition": P,
        "sizes": M.sizes,
        "transversal": M.transversal,
        "mu": M.mu,
        "bad": M.n_bad,
        "missing": M.n_missing,
        "bad_s2": M.bad_s2,
        "missing_s2": M.missing_s2,
        "inside": inside_counts(H, P),
        "locally_maximal": is_locally_maximal(H, P),
    }
    if args.action == "analyze":
        fam = family_from_keywords(args.family) if args.family else None
        rep = check_prop33(H, P, fam)
        rec["bad_minus_3_4_missing"] = rep.value
        if rep.alert:
            _warn("all hypotheses hold but |B| - 3/4|M| is positive")
    if args.out:
        _write_graph(H, args.out, P)
    return [rec]


def cmd_flags(args):
    from .flags import enumerate_flags, flag_types, make_type

    theory = _theory(args)
    sigma = None
    if args.type_file:
        G, _ = _load_graph(args.type_file)
        sigma = make_type(G)
    elif args.type_index is not None:
        types = flag_types(theory, args.type_size)
        if not 0 <= args.type_index < len(types):
            raise InputError(f"type index out of range: {len(types)} types of size {args.type_size}")
        sigma = types[args.type_index]
    basis = enumerate_flags(theory, args.m, sigma, threads=args.threads)
    if args.dump:
        try:
            Path(args.dump).write_text(basis.dump())
        except OSError as exc:
            raise InputError(f"cannot write {args.dump}: {exc.strerror}") from None
    return [{"count": len(basis), "digest": basis.digest}]


def _program_record(prog):
    return {
        "m": prog.m,
        "theory": prog.theory.descriptor(),
        "objective": prog.objective_name,
        "flags": len(prog.basis),
        "blocks": len(prog.blocks),
        "block_sizes": tuple(b.size for b in prog.blocks),
        "constraints": len(prog.constraints),
        "multipliers": prog.n_multipliers,
        "digest": prog.digest,
    }


def cmd_sdp(args):
    from .sdp import export_sdpa

    prog = _program(args)
    rec = _program_record(prog)
    if args.action == "export":
        if not args.out:
            raise InputError("sdp export needs --out")
        dat, meta = export_sdpa(prog, args.out)
        rec["dat"] = str(dat)
        rec["meta"] = str(meta)
    elif args.out:
        _warn("--out is ignored by sdp assemble")
    return [rec]


def _bundled_cert(name: str) -> Path:
    res = resources.files("flagforge") / "data" / f"{name}_cert.json"
    if not res.is_file():
        raise InputError(f"no bundled certificate named {name!r}")
    return Path(str(res))


def cmd_cert(args):
    from .certify import Certificate, round_solution, verify_certificate
    from .flags import theory_from_descriptor
    from .sdp import SdpConfig, assemble_program, import_solution

    if args.action == "verify":
        path = _bundled_cert(args.bundled) if args.bundled else args.file
        if path is None:
            raise InputError("cert verify needs a certificate file or --bundled NAME")
        try:
            cert = Certificate.load(path)
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from None
        theory = theory_from_descriptor(cert.theory)
        prog = assemble_program(theory, cert.m, cert.objective, SdpConfig(), threads=args.threads)
        ok, report = verify_certificate(prog, cert)
        recs = [{"bound": cert.bound, "valid": ok}]
        if not ok:
            raise VerificationFailed(recs, report.issues)
        return recs
    if args.file is None:
        raise InputError("cert round needs a solution file")
    prog = _program(args)
    try:
        sol = import_solution(args.file, prog)
    except OSError as exc:
        raise InputError(f"cannot read {args.file}: {exc.strerror}") from None
    cert, notes = round_solution(sol, prog, denominator_limit=args.denominator,
                                 raise_bound=args.raise_bound)
    for note in notes:
        _warn(note)
    ok, report = verify_certificate(prog, cert)
    if args.out:
        try:
            cert.save(args.out)
        except OSError as exc:
            raise InputError(f"cannot write {args.out}: {exc.strerror}") from None
    recs = [{"bound": cert.bound, "bound_float": float(cert.bound), "valid": ok}]
    if not ok:
        raise VerificationFailed(recs, report.issues)
    return recs


def cmd_search(args):
    from .families import family_from_keywords
    from .search import SearchTask, _stderr_progress, density_report, search_max

    fam = family_from_keywords(args.family)
    progress = _stderr_progress if args.progress else None
    if args.action == "max":
        if args.n is None:
            raise InputError("search max needs --n")
        task = SearchTask(args.n, fam, args.objective, args.mode, restarts=args.restarts, seed=args.seed)
        ck = args.checkpoint
        if ck is None and task.mode == "exhaustive" and _cache_dir() is not None:
            ck = _cache_dir() / f"search-n{task.n}-{fam.name.replace(',', '+')}-{task.objective}.json"
        res = search_max(task, threads=args.threads, checkpoint=ck, progress=progress)
        if args.out:
            _write_graph(res.witness, args.out)
        return [{"n": task.n, "objective": task.objective, "mode": task.mode, "value": res.value,
                 "exact": res.exact, "classes_visited": res.classes_visited,
                 "witness": tuple("-".join(map(str, e)) for e in res.witness.edges)}]
    results = {}
    for n in range(args.min_n, args.max_n + 1):
        results[n] = search_max(SearchTask(n, fam, "s2count"), threads=args.threads, progress=progress)
    rows = density_report(results)
    for r in rows:
        r["ref_6_13"] = Fraction(6, 13)
    return rows


def cmd_fact22(args):
    from .constructions import fact22_check, fact22_grid

    step = _rational(args.step)
    res = fact22_grid(step, exact=args.exact)
    third = Fraction(1, 3)
    centre = fact22_check((third,) * 3 if args.exact else (1 / 3,) * 3)
    for kind, p in res["failures"][:10]:
        _warn(f"inequality {kind} fails at {tuple(str(v) for v in p)}")
    recs = [{"step": step, "mode": "exact" if args.exact else "float", "points": res["points"],
             "checked_i": res["checked_i"], "checked_iii": res["checked_iii"],
             "failures": len(res["failures"]),
             "centre_gap_i": Fraction(1, 26) - centre.lhs1 if args.exact else 1 / 26 - centre.lhs1,
             "centre_gap_iii": centre.rhs3 - centre.lhs3}]
    if res["failures"]:
        raise VerificationFailed(recs, [f"{len(res['failures'])} grid points fail"])
    return recs


def cmd_budget(args):
    from .constructions import base_case_holds, stability_budget

    eps = _rational(args.eps)
    b = stability_budget(eps)
    rec = {"eps": b.eps, "delta": b.delta, "part_slack": b.part_slack, "edge_slack": b.edge_slack,
           "inner_slack": b.inner_slack, "chain_ok": b.chain_ok, "step_coefficient": b.step_coefficient,
           "inner_scaling_ok": b.inner_scaling_ok}
    if args.n is not None and args.m is not None:
        rec["removal_budget"] = b.removal_budget(args.n, args.m)
        if args.m < eps * args.n:
            rec["base_case"] = base_case_holds(eps, args.n, args.m)
    return [rec]


# ---------------------------------------------------------------- parser

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--format", choices=("text", "csv", "json-lines"))
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    return p


def _theory_args(p, default_family="k4m,c5m", default_colors=3):
    p.add_argument("--family", default=default_family, help="comma-joined keywords (k4m, c5m, c7m, f32, ...)")
    p.add_argument("--colors", type=int, default=default_colors)
    p.add_argument("--mantel", action="store_true", help="triangle-free uncolored graphs instead")


def _program_args(p):
    _theory_args(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--objective", default=None, help="prop34, edge-density, s2-density or one")
    p.add_argument("--types", help="comma-separated type sizes")
    p.add_argument("--no-constraints", action="store_true")
    p.add_argument("--no-split", action="store_true", help="do not split blocks by type symmetry")
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="flagforge", parents=[common],
                     description="Hypergraph densities, constructions and flag-algebra certificates.")
    parser.set_defaults(format="text", seed=0, threads=1)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("norms", parents=[common], help="l_p norms and S2 count of a hypergraph file")
    p.add_argument("file")
    p.add_argument("--p", type=int, action="append", help="extra norm exponents")
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("construct", parents=[common], help="build the recursive or bipartite construction")
    p.add_argument("kind", choices=("trec", "bip"))
    p.add_argument("--n", type=int)
    p.add_argument("--tree")
    p.add_argument("--balanced", action="store_true")
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("trec-table", parents=[common], help="exact recurrence values")
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--min-n", type=int, default=1)
    p.set_defaults(func=cmd_trec_table)

    p = sub.add_parser("partition", parents=[common], help="3-partition statistics")
    p.add_argument("action", choices=("analyze", "localmax", "maxcut"))
    p.add_argument("file")
    p.add_argument("--parts")
    p.add_argument("--family")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("flags", parents=[common], help="flag enumeration")
    p.add_argument("action", choices=("enumerate",))
    p.add_argument("--m", type=int, required=True)
    _theory_args(p)
    p.add_argument("--type-size", type=int, default=0)
    p.add_argument("--type-index", type=int)
    p.add_argument("--type-file")
    p.add_argument("--dump")
    p.set_defaults(func=cmd_flags)

    p = sub.add_parser("sdp", parents=[common], help="assemble or export the flag SDP")
    p.add_argument("action", choices=("assemble", "export"))
    _program_args(p)
    p.set_defaults(func=cmd_sdp)

    p = sub.add_parser("cert", parents=[common], help="verify or round certificates")
    p.add_argument("action", choices=("verify", "round"))
    p.add_argument("file", nargs="?")
    p.add_argument("--bundled", help="name of a bundled certificate, e.g. mantel")
    _theory_args(p)
    p.add_argument("--m", type=int)
    p.add_argument("--objective", default=None)
    p.add_argument("--types")
    p.add_argument("--no-constraints", action="store_true")
    p.add_argument("--no-split", action="store_true")
    p.add_argument("--denominator", type=int, default=10 ** 6)
    p.add_argument("--raise-bound", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cert)

    p = sub.add_parser("search", parents=[common], help="exhaustive extremal search")
    p.add_argument("action", choices=("max", "report"))
    p.add_argument("--n", type=int)
    p.add_argument("--min-n", type=int, default=4)
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--family", default="k4m,c5m")
    p.add_argument("--objective", default="s2count", choices=("edges", "l2norm", "s2count"))
    p.add_argument("--mode", default="exhaustive", choices=("exhaustive", "augmenting"))
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--checkpoint")
    p.add_argument("--progress", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("fact22", parents=[common], help="simplex inequality grid check")
    p.add_argument("action", choices=("grid",))
    p.add_argument("--step", default="1/200")
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_fact22)

    p = sub.add_parser("budget", parents=[common], help="stability induction constants")
    p.add_argument("--eps", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.set_defaults(func=cmd_budget)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    fmt = "text"
    try:
        args = parser.parse_args(argv)
        fmt = args.format
        if args.threads < 1:
            raise InputError("--threads must be at least 1")
        if getattr(args, "m", None) is None and args.command == "cert" and args.action == "round":
            raise InputError("cert round needs --m")
        records = args.func(args)
    except VerificationFailed as exc:
        sys.stdout.write(render(exc.records, fmt))
        for issue in exc.issues:
            print(f"error: {issue}", file=sys.stderr)
        return EXIT_VERIFY
    except (FlagforgeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(render(records, fmt))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
