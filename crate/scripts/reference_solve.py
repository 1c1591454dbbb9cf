#!/usr/bin/env python3
"""Solve a dumped SDP with an independent conic solver (cvxpy).

Usage: reference_solve.py DUMP [DUMP ...]
Prints one JSON object per file with the solver status, the objective in
original units and the largest relative equality residual.
"""
import json
import sys
import warnings

import cvxpy as cp
import numpy as np


def read_dump(path):
    blocks, constraints, objective = [], [], {}
    index = {}
    with open(path) as f:
        for line in f:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            if tag == "block":
                label, kind, dim = parts[1], parts[2], int(parts[3])
                index[label] = len(blocks)
                blocks.append((label, kind, dim))
            elif tag == "constraint":
                constraints.append({"rhs": float(parts[3]), "terms": {}})
            elif tag in ("coef", "objective"):
                if tag == "coef":
                    target = constraints[int(parts[1])]["terms"]
                    parts = parts[1:]
                else:
                    target = objective
                b = index[parts[1]]
                r, c = int(parts[2]), int(parts[3])
                z = complex(float(parts[4]), float(parts[5]))
                dim = blocks[b][2]
                a = target.setdefault(b, np.zeros((dim, dim), dtype=complex))
                a[r, c] = z
                if r != c:
                    a[c, r] = np.conj(z)
            else:
                raise ValueError(f"unknown record {tag!r}")
    return blocks, constraints, objective


class Block:
    """PSD block as a real variable.

    Hermitian blocks use the embedding [[Xr, -Xi], [Xi, Xr]] with a skew
    Xi; the complex variables of cvxpy are avoided on purpose because they
    returned points violating imaginary-part rows on some dumps.
    """

    def __init__(self, kind, dim, cons):
        self.kind = kind
        if kind == "real":
            self.x = cp.Variable(nonneg=True)
        else:
            self.re = cp.Variable((dim, dim), symmetric=True)
            self.im = cp.Variable((dim, dim))
            cons.append(self.im == -self.im.T)
            cons.append(cp.bmat([[self.re, -self.im], [self.im, self.re]]) >> 0)

    def inner(self, a):
        """Re Tr(A X)."""
        if self.kind == "real":
            return float(a[0, 0].real) * self.x
        return cp.sum(cp.multiply(a.real.T, self.re)) - cp.sum(cp.multiply(a.imag.T, self.im))

    def value(self):
        if self.kind == "real":
            return None if self.x.value is None else float(self.x.value)
        if self.re.value is None:
            return None
        return self.re.value + 1j * self.im.value


def inner_value(a, kind, v):
    if kind == "real":
        return float(a[0, 0].real) * v
    return float(np.real(np.trace(a @ v)))


def equilibrate(blocks, constraints, rounds=20):
    """Ruiz scaling of the (row, block) magnitude matrix.

    Returns row factors r and block factors d; the scaled problem uses
    X_b = d_b X'_b and rows multiplied by r_i, so its solutions map back
    exactly.
    """
    m = np.zeros((len(constraints), len(blocks)))
    for i, c in enumerate(constraints):
        for b, a in c["terms"].items():
            m[i, b] = np.abs(a).max()
    r = np.ones(len(constraints))
    d = np.ones(len(blocks))
    for _ in range(rounds):
        scaled = m * r[:, None] * d[None, :]
        row = scaled.max(axis=1)
        col = scaled.max(axis=0)
        r /= np.sqrt(np.where(row > 0, row, 1.0))
        d /= np.sqrt(np.where(col > 0, col, 1.0))
    return r, d


def residual(blocks, constraints, values):
    """Largest row residual relative to the size of the row's terms."""
    worst = 0.0
    for c in constraints:
        terms = [inner_value(a, blocks[b][1], values[b]) for b, a in c["terms"].items()]
        size = sum(abs(t) for t in terms) + abs(c["rhs"])
        if size > 0:
            worst = max(worst, abs(sum(terms) - c["rhs"]) / size)
    return worst


def solve(path):
    blocks, constraints, objective = read_dump(path)
    r, d = equilibrate(blocks, constraints)
    cons = []
    xs = [Block(kind, dim, cons) for _, kind, dim in blocks]
    for i, c in enumerate(constraints):
        expr = sum(xs[b].inner(a * (r[i] * d[b])) for b, a in c["terms"].items())
        cons.append(expr == c["rhs"] * r[i])
    c_scale = max(np.abs(a).max() * d[b] for b, a in objective.items())
    obj = sum(xs[b].inner(a * (d[b] / c_scale)) for b, a in objective.items())
    prob = cp.Problem(cp.Maximize(obj), cons)

    def result(solver, tol):
        values = [x.value() for x in xs]
        if any(v is None for v in values):
            return {"file": path, "status": prob.status, "objective": None, "solver": solver, "tol": tol}
        values = [v * d[b] for b, v in enumerate(values)]
        objective_value = sum(inner_value(a, blocks[b][1], values[b]) for b, a in objective.items())
        return {
            "file": path,
            "status": prob.status,
            "objective": objective_value,
            "max_rel_residual": residual(blocks, constraints, values),
            "solver": solver,
            "tol": tol,
        }

    if "CLARABEL" in cp.installed_solvers():
        out = None
        for tol in (1e-12, 1e-11, 1e-10):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                prob.solve(solver="CLARABEL", tol_gap_abs=tol, tol_gap_rel=tol, tol_feas=tol, max_iter=500)
            out = result("CLARABEL", tol)
            if prob.status == cp.OPTIMAL:
                break
        return out
    prob.solve(solver="SCS", eps=1e-10, max_iters=200000)
    return result("SCS", 1e-10)


def main():
    if len(sys.argv) < 2:
        print(__doc__, file=sys.stderr)
        return 2
    for path in sys.argv[1:]:
        print(json.dumps(solve(path)), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
