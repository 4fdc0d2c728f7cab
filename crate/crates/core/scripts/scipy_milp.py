#!/usr/bin/env python3
"""External MILP backend built on scipy.optimize.milp.

Speaks the same command line as the HiGHS binary, as far as cfcuc uses it:

    scipy_milp.py --model_file m.mps --options_file o.txt \
                  --solution_file m.sol --time_limit 60

Reads the MPS subset cfcuc writes (N/L/E/G rows, INTORG markers, RHS,
UP/LO/FX/FR/MI/BV bounds) and writes a HiGHS-style solution file.
"""

import argparse
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix


def read_mps(path):
    rows, senses, obj_row = [], {}, None
    cols, col_index, integer = [], {}, []
    entries, rhs = [], {}
    lo, hi = [], []
    section, in_int = None, False
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if not line.startswith(" "):
                section = line.split()[0]
                continue
            f = line.split()
            if section == "ROWS":
                if f[0] == "N":
                    obj_row = f[1]
                else:
                    senses[f[1]] = f[0]
                    rows.append(f[1])
            elif section == "COLUMNS":
                if len(f) >= 3 and f[1] == "'MARKER'":
                    in_int = f[2] == "'INTORG'"
                    continue
                name = f[0]
                if name not in col_index:
                    col_index[name] = len(cols)
                    cols.append(name)
                    integer.append(in_int)
                    lo.append(0.0)
                    hi.append(np.inf)
                for k in range(1, len(f) - 1, 2):
                    entries.append((f[k], col_index[name], float(f[k + 1])))
            elif section == "RHS":
                for k in range(1, len(f) - 1, 2):
                    rhs[f[k]] = float(f[k + 1])
            elif section == "BOUNDS":
                tag, col = f[0], col_index[f[2]]
                val = float(f[3]) if len(f) > 3 else None
                if tag == "UP":
                    hi[col] = val
                elif tag == "LO":
                    lo[col] = val
                elif tag == "FX":
                    lo[col] = hi[col] = val
                elif tag == "FR":
                    lo[col], hi[col] = -np.inf, np.inf
                elif tag == "MI":
                    lo[col] = -np.inf
                elif tag == "BV":
                    lo[col], hi[col] = 0.0, 1.0
                    integer[col] = True
                else:
                    raise ValueError(f"unsupported bound type {tag}")
    row_index = {r: k for k, r in enumerate(rows)}
    c = np.zeros(len(cols))
    r_idx, c_idx, vals = [], [], []
    for row, col, v in entries:
        if row == obj_row:
            c[col] += v
        else:
            r_idx.append(row_index[row])
            c_idx.append(col)
            vals.append(v)
    a = coo_matrix((vals, (r_idx, c_idx)), shape=(len(rows), len(cols))).tocsr()
    b = np.array([rhs.get(r, 0.0) for r in rows])
    row_lo = np.where([senses[r] in ("G", "E") for r in rows], b, -np.inf)
    row_hi = np.where([senses[r] in ("L", "E") for r in rows], b, np.inf)
    return cols, c, a, row_lo, row_hi, np.array(lo), np.array(hi), np.array(integer, dtype=int)


def read_options(path):
    opts = {}
    if path:
        with open(path) as fh:
            for line in fh:
                if "=" in line:
                    k, v = line.split("=", 1)
                    opts[k.strip()] = v.strip()
    return opts


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--model_file", required=True)
    ap.add_argument("--options_file")
    ap.add_argument("--solution_file", required=True)
    ap.add_argument("--time_limit", type=float, default=None)
    args = ap.parse_args()

    cols, c, a, row_lo, row_hi, lo, hi, integer = read_mps(args.model_file)
    opts = read_options(args.options_file)
    options = {"disp": False}
    if args.time_limit is not None:
        options["time_limit"] = args.time_limit
    if "mip_rel_gap" in opts:
        options["mip_rel_gap"] = float(opts["mip_rel_gap"])
    constraints = [LinearConstraint(a, row_lo, row_hi)] if a.shape[0] else []
    res = milp(c, constraints=constraints, integrality=integer, bounds=Bounds(lo, hi), options=options)

    with open(args.solution_file, "w") as out:
        out.write("Model status\n")
        if res.status == 0:
            out.write("Optimal\n")
        elif res.status == 1 and res.x is not None:
            out.write("Time limit reached\n")
        elif res.status == 2:
            out.write("Infeasible\n")
            return 0
        else:
            print(f"scipy milp failed: {res.message}", file=sys.stderr)
            return 1
        out.write("\n# Primal solution values\nFeasible\n")
        out.write(f"Objective {res.fun!r}\n")
        out.write(f"# Columns {len(cols)}\n")
        for name, v in zip(cols, res.x):
            out.write(f"{name} {float(v)!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
