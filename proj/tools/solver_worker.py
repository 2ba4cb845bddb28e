#!/usr/bin/env python3
"""Long-lived LP/MILP solve worker.

Reads one JSON request per line on stdin, writes one JSON response per line
on stdout.  Models arrive in minimize form with CSR rows; +/-1e30 encode
infinities.  LPs are solved with scipy.optimize.linprog (HiGHS) so row duals
are available; MILPs go through scipy.optimize.milp.
"""
import json
import sys
import time

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

INF = 1e30


def _clean(v):
    if v >= INF:
        return np.inf
    if v <= -INF:
        return -np.inf
    return v


def _status_from(code):
    return {0: "optimal", 1: "limit", 2: "infeasible", 3: "unbounded"}.get(
        code, "error")


def solve_request(req):
    n = len(req["obj"])
    c = np.array(req["obj"], dtype=float)
    lb = np.array([_clean(v) for v in req["lb"]], dtype=float)
    ub = np.array([_clean(v) for v in req["ub"]], dtype=float)
    ints = req.get("int", [])
    rel = req.get("rel", "")
    rhs = np.array(req.get("rhs", []), dtype=float)
    m = len(rel)

    A = None
    if m:
        rows = req["rows"]
        A = sparse.csr_matrix(
            (rows["val"], rows["idx"], rows["start"]), shape=(m, n))

    t0 = time.time()
    if not ints:
        res = _solve_lp(c, A, rel, rhs, lb, ub, m, n, req)
    else:
        res = _solve_milp(c, A, rel, rhs, lb, ub, ints, m, req)
    res["time"] = time.time() - t0
    res["rows"] = m
    res["cols"] = n
    return res


def _solve_lp(c, A, rel, rhs, lb, ub, m, n, req):
    le_rows, eq_rows = [], []
    for i, r in enumerate(rel):
        (eq_rows if r == "E" else le_rows).append(i)

    A_ub = b_ub = A_eq = b_eq = None
    flip = np.ones(len(le_rows))
    if le_rows:
        sel = A[le_rows, :].tocsr()
        b = rhs[le_rows]
        for k, i in enumerate(le_rows):
            if rel[i] == "G":
                flip[k] = -1.0
        D = sparse.diags(flip)
        A_ub = D @ sel
        b_ub = flip * b
    if eq_rows:
        A_eq = A[eq_rows, :].tocsr()
        b_eq = rhs[eq_rows]

    options = {"presolve": True}
    if req.get("time_limit") is not None:
        options["time_limit"] = req["time_limit"]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=list(zip(lb, ub)), method="highs", options=options)
    status = _status_from(res.status)
    out = {"status": status, "obj": float(res.fun) if res.fun is not None else 0.0,
           "message": str(res.message)}
    if res.x is not None:
        out["x"] = [float(v) for v in res.x]
    if status == "optimal" and m:
        dual = np.zeros(m)
        if le_rows:
            marg = np.asarray(res.ineqlin.marginals) * flip
            for k, i in enumerate(le_rows):
                dual[i] = marg[k]
        if eq_rows:
            marg = np.asarray(res.eqlin.marginals)
            for k, i in enumerate(eq_rows):
                dual[i] = marg[k]
        out["dual"] = [float(v) for v in dual]
    return out


def _solve_milp(c, A, rel, rhs, lb, ub, ints, m, req):
    integrality = np.zeros(len(c))
    for j in ints:
        integrality[j] = 1
    constraints = []
    if m:
        lo = np.where([r == "L" for r in rel], -np.inf, rhs)
        hi = np.where([r == "G" for r in rel], np.inf, rhs)
        constraints = LinearConstraint(A, lo, hi)
    options = {"presolve": True, "mip_rel_gap": req.get("mip_gap", 1e-4)}
    if req.get("time_limit") is not None:
        options["time_limit"] = req["time_limit"]
    res = milp(c=c, constraints=constraints, integrality=integrality,
               bounds=Bounds(lb, ub), options=options)
    status = _status_from(res.status)
    if status == "limit" and res.x is None:
        # Limit without an incumbent: nothing usable to report.
        pass
    out = {"status": status,
           "obj": float(res.fun) if res.fun is not None else 0.0,
           "message": str(res.message)}
    if res.x is not None:
        out["x"] = [float(v) for v in res.x]
    return out


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            if req.get("cmd") == "ping":
                resp = {"status": "ok"}
            else:
                resp = solve_request(req)
        except Exception as exc:  # pylint: disable=broad-except
            resp = {"status": "error", "message": repr(exc)}
        sys.stdout.write(json.dumps(resp))
        sys.stdout.write("\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
