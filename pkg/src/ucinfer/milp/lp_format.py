"""CPLEX-LP text interchange and the subprocess bridge to external solvers.

Writer grammar (also what the bundled reference solver parses back):

    \\ comment lines
    Minimize
     obj: <coef> <name> [+|- <coef> <name> ...]
    Subject To
     c<i>: <coef> <name> ... <=|>=|= <rhs>
    Bounds
     <lo> <= <name> <= <up>   |   <name> free   |   <name> = <value>
    Binaries
     <name> <name> ...
    End

Numbers carry 17 significant digits so every double round-trips exactly.

Solution files come back through per-solver adapters. The native format is
line-oriented ``key value`` pairs: a ``status`` line, an ``objective`` line,
optionally ``mip_gap``, then one ``<variable-name> <value>`` line per column.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import tempfile

import numpy as np

from ..errors import BackendError, SolverTimeout
from .build import MilpInstance
from .solution import INFEASIBLE, OPTIMAL, TIME_LIMIT, MilpSolution

_WRAP = 180


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _emit_terms(pairs) -> list:
    """Render (coef, name) pairs as wrapped LP expression lines."""
    parts = []
    for i, (coef, name) in enumerate(pairs):
        sign = "-" if coef < 0 else "+"
        token = f"{sign} {_num(abs(coef))} {name}"
        if i == 0 and sign == "+":
            token = f"{_num(abs(coef))} {name}"
        parts.append(token)
    lines, cur = [], " "
    for token in parts:
        if len(cur) + len(token) + 1 > _WRAP and cur.strip():
            lines.append(cur)
            cur = "   "
        cur += token + " "
    lines.append(cur.rstrip())
    return lines


def export_lp(instance: MilpInstance, name: str = "uc") -> str:
    """Serialize the instance in CPLEX-LP text format."""
    out = [f"\\ Problem name: {name}", "Minimize"]
    obj_pairs = [
        (instance.objective[j], instance.names[j])
        for j in np.flatnonzero(instance.objective)
    ]
    if not obj_pairs:
        obj_pairs = [(0.0, instance.names[0])] if instance.names else []
    body = _emit_terms(obj_pairs) if obj_pairs else [" 0"]
    body[0] = " obj:" + body[0]
    out.extend(body)

    out.append("Subject To")
    for i, (row, rel, b) in enumerate(
        zip(instance.rows, instance.relations, instance.rhs)
    ):
        pairs = [(coef, instance.names[c]) for c, coef in sorted(row.items())]
        lines = _emit_terms(pairs)
        lines[-1] += f" {rel} {_num(b)}"
        lines[0] = f" c{i}:" + lines[0]
        out.extend(lines)

    out.append("Bounds")
    for j, nm in enumerate(instance.names):
        lo, up = instance.lower[j], instance.upper[j]
        if lo == up:
            out.append(f" {nm} = {_num(lo)}")
        elif not np.isfinite(lo) and not np.isfinite(up):
            out.append(f" {nm} free")
        elif not np.isfinite(lo):
            out.append(f" -inf <= {nm} <= {_num(up)}")
        elif not np.isfinite(up):
            out.append(f" {_num(lo)} <= {nm} <= +inf")
        else:
            out.append(f" {_num(lo)} <= {nm} <= {_num(up)}")

    binaries = [instance.names[j] for j in instance.binary_columns]
    if binaries:
        out.append("Binaries")
        cur = ""
        for nm in binaries:
            if len(cur) + len(nm) + 1 > _WRAP and cur:
                out.append(" " + cur.rstrip())
                cur = ""
            cur += nm + " "
        if cur:
            out.append(" " + cur.rstrip())
    out.append("End")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# LP parsing (the subset the writer emits), used by the reference solver


_TOKEN_RE = re.compile(
    r"[+-]|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[A-Za-z_][A-Za-z0-9_]*"
)


def _tokenize_expression(text: str):
    """Yield (coef, name) pairs from an LP linear expression."""
    sign, coef = 1.0, None
    for tok in _TOKEN_RE.findall(text):
        if tok == "+":
            continue
        if tok == "-":
            sign = -sign
        elif tok[0].isdigit() or tok[0] == ".":
            coef = float(tok)
        else:
            yield (sign * (1.0 if coef is None else coef), tok)
            sign, coef = 1.0, None


def parse_lp(text: str) -> dict:
    """Parse writer-grammar LP text into a plain dict of arrays and rows."""
    section = None
    objective_terms = []
    constraints = []  # (terms, rel, rhs)
    bounds_lines = []
    binary_names = []
    for raw in text.splitlines():
        line = raw.split("\\")[0].strip()
        if not line:
            continue
        low = line.lower()
        if low in ("minimize", "maximize"):
            section = "objective"
            if low == "maximize":
                raise BackendError("only minimization problems are supported")
            continue
        if low in ("subject to", "st", "s.t."):
            section = "constraints"
            continue
        if low == "bounds":
            section = "bounds"
            continue
        if low in ("binaries", "binary", "bin"):
            section = "binaries"
            continue
        if low in ("general", "generals", "end"):
            section = "done"
            continue
        if section == "objective":
            if ":" in line:
                line = line.split(":", 1)[1]
            objective_terms.extend(_tokenize_expression(line))
        elif section == "constraints":
            if ":" in line:
                line = line.split(":", 1)[1]
            rel = None
            for r in ("<=", ">=", "="):
                if r in line:
                    rel = r
                    break
            if rel is None:
                # continuation of the previous row
                constraints[-1][0].extend(_tokenize_expression(line))
                continue
            lhs, rhs_text = line.rsplit(rel, 1)
            constraints.append(
                [list(_tokenize_expression(lhs)), rel, float(rhs_text)]
            )
        elif section == "bounds":
            bounds_lines.append(line)
        elif section == "binaries":
            binary_names.extend(line.split())

    names = []
    index = {}

    def col(nm):
        if nm not in index:
            index[nm] = len(names)
            names.append(nm)
        return index[nm]

    for _, nm in objective_terms:
        col(nm)
    for terms, _, _ in constraints:
        for _, nm in terms:
            col(nm)
    for nm in binary_names:
        col(nm)
    for line in bounds_lines:
        parts = line.split()
        if len(parts) == 2 and parts[1].lower() == "free":
            col(parts[0])
        elif len(parts) == 3 and parts[1] == "=":
            col(parts[0])
        elif "<=" in parts:
            col(parts[2] if parts[1] == "<=" else parts[0])

    n = len(names)
    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    is_binary = np.zeros(n, dtype=bool)
    for nm in binary_names:
        j = index[nm]
        is_binary[j] = True
        upper[j] = 1.0
    for line in bounds_lines:
        parts = line.split()
        if len(parts) == 2 and parts[1].lower() == "free":
            lower[index[parts[0]]] = -np.inf
        elif len(parts) == 3 and parts[1] == "=":
            j = index[parts[0]]
            lower[j] = upper[j] = float(parts[2])
        elif len(parts) == 5 and parts[1] == "<=" and parts[3] == "<=":
            j = index[parts[2]]
            lo = -np.inf if parts[0].lstrip("+-").lower() == "inf" else float(parts[0])
            up = np.inf if parts[4].lstrip("+-").lower() == "inf" else float(parts[4])
            lower[j], upper[j] = lo, up
        else:
            raise BackendError(f"unsupported bounds line: {line!r}")

    objective = np.zeros(n)
    for coef, nm in objective_terms:
        objective[index[nm]] += coef
    rows, relations, rhs = [], [], []
    for terms, rel, b in constraints:
        row = {}
        for coef, nm in terms:
            j = index[nm]
            row[j] = row.get(j, 0.0) + coef
        rows.append(row)
        relations.append(rel)
        rhs.append(b)
    return {
        "names": names,
        "objective": objective,
        "rows": rows,
        "relations": relations,
        "rhs": np.asarray(rhs),
        "lower": lower,
        "upper": upper,
        "is_binary": is_binary,
    }


# ---------------------------------------------------------------------------
# solution-file adapters


def parse_solution_native(text: str) -> dict:
    status = None
    objective = None
    mip_gap = None
    values = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition(" ")
        if not val:
            raise BackendError(f"malformed solution line: {line!r}")
        if key == "status":
            status = val.strip()
        elif key == "objective":
            objective = float(val)
        elif key == "mip_gap":
            mip_gap = float(val)
        else:
            values[key] = float(val)
    if status is None:
        raise BackendError("solution file has no status line")
    return {
        "status": status, "objective": objective,
        "mip_gap": mip_gap, "values": values,
    }


def parse_solution_cbc(text: str) -> dict:
    """Adapter for CBC's ``solu`` output files."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise BackendError("empty CBC solution file")
    header = lines[0]
    low = header.lower()
    if "infeasible" in low:
        status = "infeasible"
    elif "optimal" in low:
        status = "optimal"
    elif "stopped on time" in low:
        status = "time_limit"
    else:
        raise BackendError(f"unrecognized CBC status line: {header!r}")
    objective = None
    if "objective value" in low:
        objective = float(header.split()[-1])
    values = {}
    for line in lines[1:]:
        parts = line.split()
        if len(parts) >= 3:
            values[parts[1]] = float(parts[2])
    return {"status": status, "objective": objective, "mip_gap": None,
            "values": values}


SOLUTION_ADAPTERS = {
    "native": parse_solution_native,
    "cbc": parse_solution_cbc,
}


def solution_from_file(
    instance: MilpInstance,
    text: str,
    solution_format: str = "native",
    requested_gap: float = 1e-6,
) -> MilpSolution:
    """Map a parsed solver solution back onto instance columns."""
    try:
        parser = SOLUTION_ADAPTERS[solution_format]
    except KeyError:
        raise BackendError(f"unknown solution format {solution_format!r}")
    parsed = parser(text)
    status = parsed["status"].lower()
    if status in ("infeasible",):
        return MilpSolution(INFEASIBLE)
    if status in ("time_limit", "timeout"):
        return MilpSolution(TIME_LIMIT)
    if status not in ("optimal",):
        return MilpSolution("backend_error")
    x = np.zeros(instance.n_cols)
    name_to_col = {nm: j for j, nm in enumerate(instance.names)}
    for nm, val in parsed["values"].items():
        if nm in name_to_col:
            x[name_to_col[nm]] = val
    objective = parsed["objective"]
    if objective is None:
        objective = float(instance.objective @ x)
    gap = parsed["mip_gap"] if parsed["mip_gap"] is not None else requested_gap
    return MilpSolution(OPTIMAL, primal=x, objective=float(objective),
                        mip_gap=float(gap))


def external_solve(
    instance: MilpInstance,
    solver_command: str,
    mip_gap: float = 1e-6,
    time_limit: float | None = None,
    solution_format: str = "native",
) -> MilpSolution:
    """Write an LP file, run the solver subprocess, parse its solution.

    ``solver_command`` is a shell-less template: placeholders {lp_path},
    {sol_path}, {gap} and {time_limit} are substituted and the result is
    split with shlex. Each call owns a private temp directory.
    """
    with tempfile.TemporaryDirectory(prefix="ucinfer-lp-") as workdir:
        lp_path = os.path.join(workdir, "instance.lp")
        sol_path = os.path.join(workdir, "solution.txt")
        with open(lp_path, "w", encoding="utf-8") as fh:
            fh.write(export_lp(instance))
        command = solver_command.format(
            lp_path=lp_path,
            sol_path=sol_path,
            gap=_num(mip_gap),
            time_limit="" if time_limit is None else _num(time_limit),
        )
        argv = shlex.split(command)
        deadline = None if time_limit is None else max(time_limit, 0.0) + 60.0
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=deadline,
            )
        except FileNotFoundError as exc:
            raise BackendError(f"solver executable not found: {argv[0]}") from exc
        except subprocess.TimeoutExpired as exc:
            raise SolverTimeout(f"solver exceeded {deadline:.0f}s wall clock") from exc
        if proc.returncode != 0:
            raise BackendError(
                f"solver exited with code {proc.returncode}: "
                f"{proc.stderr.strip()[:500]}"
            )
        if not os.path.exists(sol_path):
            raise BackendError("solver produced no solution file")
        with open(sol_path, "r", encoding="utf-8") as fh:
            text = fh.read()
        solution = solution_from_file(
            instance, text, solution_format=solution_format,
            requested_gap=mip_gap,
        )
        if solution.status == TIME_LIMIT:
            raise SolverTimeout("solver reported hitting its time limit")
        return solution
