"""Solve an assembled program with cvxpy and write an SDPA-style output file.

Development helper used to produce the bundled solution files; cvxpy is not
a runtime dependency of the package.

    python scripts/solve_sdp.py --theory mantel --m 3 --objective edge-density --out mantel.out
"""
from __future__ import annotations

import argparse

import cvxpy as cp
import numpy as np

from flagforge.flags import colored_theory, mantel_theory
from flagforge.sdp import assemble_program, format_solution


def solve(problem, solver="CLARABEL"):
    nG = len(problem.basis)
    Qs = [cp.Variable((b.size, b.size), PSD=True) for b in problem.blocks]
    lam = cp.Variable(problem.n_multipliers, nonneg=True) if problem.n_multipliers else None
    c = cp.Variable(nG, nonneg=True)
    u = cp.Variable()
    cons = []
    for g in range(nG):
        expr = c[g]
        for Q, b in zip(Qs, problem.blocks):
            for (i, j), v in b.tensors[g].items():
                w = float(v) if i == j else 2 * float(v)
                expr = expr + w * Q[i, j]
        if lam is not None:
            col = np.array([float(col[g]) for _, col in problem.multiplier_columns])
            expr = expr + col @ lam
        cons.append(u - float(problem.objective.coeffs[g]) == expr)
    prob = cp.Problem(cp.Minimize(u), cons)
    opts = {"tol_gap_abs": 1e-12, "tol_gap_rel": 1e-12, "tol_feas": 1e-12} if solver == "CLARABEL" else {}
    prob.solve(solver=solver, **opts)
    ub = float(u.value)
    blocks = [Q.value for Q in Qs]
    if lam is not None:
        blocks.append(lam.value)
    blocks.append(c.value)
    blocks.append(np.array([max(-ub, 0.0), max(ub, 0.0)]))
    x = [float(con.dual_value) for con in cons]
    return ub, format_solution(-ub, -ub, x, blocks)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--theory", choices=["mantel", "colored3"], default="mantel")
    ap.add_argument("--m", type=int, default=3)
    ap.add_argument("--objective", default="edge-density")
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    theory = mantel_theory() if args.theory == "mantel" else colored_theory()
    problem = assemble_program(theory, args.m, args.objective)
    ub, text = solve(problem)
    with open(args.out, "w") as fh:
        fh.write(text)
    print(f"bound ~ {ub:.10f}")


if __name__ == "__main__":
    main()
