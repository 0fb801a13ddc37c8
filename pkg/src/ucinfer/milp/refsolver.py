"""Reference external solver: reads an LP file, answers in native format.

Run as ``python -m ucinfer.milp.refsolver <lp> <sol> [--gap G]
[--time-limit T]``. It exists so the external-backend path (LP export,
subprocess invocation, solution parsing) can be exercised end to end even on
hosts with no third-party solver installed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp as scipy_milp

from .lp_format import parse_lp


def solve_lp_text(text: str, gap: float, time_limit: float | None) -> str:
    prob = parse_lp(text)
    n = len(prob["names"])
    lb_rows, ub_rows = [], []
    data, indices, indptr = [], [], [0]
    for row, rel, b in zip(prob["rows"], prob["relations"], prob["rhs"]):
        for col, coef in row.items():
            indices.append(col)
            data.append(coef)
        indptr.append(len(indices))
        if rel == "<=":
            lb_rows.append(-np.inf)
            ub_rows.append(b)
        elif rel == ">=":
            lb_rows.append(b)
            ub_rows.append(np.inf)
        else:
            lb_rows.append(b)
            ub_rows.append(b)
    mat = sparse.csr_matrix((data, indices, indptr), shape=(len(prob["rows"]), n))
    options = {"mip_rel_gap": gap, "presolve": True}
    if time_limit is not None:
        options["time_limit"] = time_limit
    res = scipy_milp(
        c=prob["objective"],
        constraints=LinearConstraint(mat, lb_rows, ub_rows),
        integrality=prob["is_binary"].astype(int),
        bounds=Bounds(prob["lower"], prob["upper"]),
        options=options,
    )
    lines = []
    if res.status == 0:
        lines.append("status optimal")
        lines.append(f"objective {res.fun:.17g}")
        gap_out = res.mip_gap if res.mip_gap is not None else 0.0
        lines.append(f"mip_gap {gap_out:.17g}")
        for name, value in zip(prob["names"], res.x):
            lines.append(f"{name} {value:.17g}")
    elif res.status == 2:
        lines.append("status infeasible")
    elif res.status == 1:
        lines.append("status time_limit")
    else:
        lines.append("status error")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("lp_path")
    parser.add_argument("sol_path")
    parser.add_argument("--gap", type=float, default=1e-6)
    parser.add_argument("--time-limit", type=float, default=None)
    args = parser.parse_args(argv)
    with open(args.lp_path, "r", encoding="utf-8") as fh:
        text = fh.read()
    out = solve_lp_text(text, args.gap, args.time_limit)
    with open(args.sol_path, "w", encoding="utf-8") as fh:
        fh.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
