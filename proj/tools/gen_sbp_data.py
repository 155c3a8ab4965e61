#!/usr/bin/env python3
"""Generate the shipped diagonal-norm SBP second-derivative data files.

Each closure is solved exactly in rational arithmetic.  Entries of the
symmetric remainder block and the boundary derivative row are unknowns;
accuracy conditions fix all but a few of them, and the remaining free values
are taken from FREE (found with --search, which minimizes the spectral radius
of the Dirichlet-penalized operator subject to a semidefinite remainder).

Usage:
    gen_sbp_data.py [--out DIR]          write data files and MANIFEST
    gen_sbp_data.py --search ORDER       print free values for one order
"""
import argparse
import pathlib
import sys
from fractions import Fraction as Fr

import sympy as sp

NORMS = {
    2: ["1/2"],
    4: ["17/48", "59/48", "43/48", "49/48"],
    6: ["13649/43200", "12013/8640", "2711/4320", "5359/4320", "7877/8640", "43801/43200"],
    8: ["1498139/5080320", "1107307/725760", "20761/80640", "1304999/725760",
        "299527/725760", "103097/80640", "670091/725760", "5127739/5080320"],
}
# number of points in the one-sided boundary derivative row
DERIV_WIDTH = {2: 3, 4: 4, 6: 6, 8: 7}
# values of the unknowns left undetermined by the accuracy conditions
FREE = {
    2: {},
    4: {},
    6: {"d5": "-23092013320714685/100000000000000000",
        "m5_5": "26912862957531245/10000000000000000"},
    8: {"d6": "22320673765846863/100000000000000000",
        "m6_6": "32010592623204466/10000000000000000",
        "m6_7": "-16222343024684736/10000000000000000",
        "m7_7": "28389475195899380/10000000000000000"},
}


def central(p):
    offs = list(range(-p, p + 1))
    A = sp.Matrix([[sp.Integer(o) ** j for o in offs] for j in range(len(offs))])
    b = sp.Matrix([2 if j == 2 else 0 for j in range(len(offs))])
    return dict(zip(offs, A.LUsolve(b)))


class Closure:
    def __init__(self, order):
        self.order = order
        self.p = order // 2
        self.r = len(NORMS[order])
        self.dw = DERIV_WIDTH[order]
        self.n = 3 * self.r + 2 * self.p + 8
        self.stencil = central(self.p)
        self.hw = [sp.Rational(w) for w in NORMS[order]] + [sp.Integer(1)] * (self.n - self.r)
        names = [f"m{i}_{j}" for i in range(self.r) for j in range(i, self.r)]
        names += [f"d{k}" for k in range(self.dw)]
        self.names = names
        self.syms = sp.symbols(names)
        self.index = {nm: k for k, nm in enumerate(names)}

    def fixed(self, i, j):
        if abs(i - j) <= self.p:
            return -self.stencil[j - i]
        return sp.Integer(0)

    def m_entry(self, vals, i, j):
        if i < self.r and j < self.r:
            a, b = min(i, j), max(i, j)
            return vals[self.index[f"m{a}_{b}"]]
        return self.fixed(i, j)

    def equations(self):
        p, r, dw, n = self.p, self.r, self.dw, self.n
        rows, rhs = [], []
        nu = len(self.names)
        for k in range(p + 2):
            a = [sp.Integer(0)] * nu
            for j in range(dw):
                a[self.index[f"d{j}"]] = sp.Integer(j) ** k
            rows.append(a)
            rhs.append(sp.Integer(1 if k == 1 else 0))
        for i in range(r):
            for k in range(p + 2):
                a = [sp.Integer(0)] * nu
                val = self.hw[i] * (k * (k - 1) * sp.Integer(i) ** (k - 2) if k >= 2 else 0)
                for j in range(n):
                    xk = sp.Integer(j) ** k
                    if i < r and j < r:
                        lo, hi = min(i, j), max(i, j)
                        a[self.index[f"m{lo}_{hi}"]] -= xk
                    else:
                        val += self.fixed(i, j) * xk
                if i == 0:
                    for j in range(dw):
                        a[self.index[f"d{j}"]] -= sp.Integer(j) ** k
                rows.append(a)
                rhs.append(val)
        return sp.Matrix(rows), sp.Matrix(rhs)

    def free_columns(self):
        A, b = self.equations()
        _, pivots = A.rref()
        return [self.names[c] for c in range(A.shape[1]) if c not in pivots]

    def solve(self, free_values):
        A, b = self.equations()
        free = self.free_columns()
        if set(free) != set(free_values):
            raise SystemExit(f"order {self.order}: free unknowns {free}, table has {sorted(free_values)}")
        fixed_cols = [self.index[nm] for nm in free]
        rest = [c for c in range(A.shape[1]) if c not in fixed_cols]
        fv = sp.Matrix([sp.Rational(free_values[self.names[c]]) for c in fixed_cols])
        rhs = b - A[:, fixed_cols] * fv if fixed_cols else b
        sub = A[:, rest]
        sol = (sub.T * sub).LUsolve(sub.T * rhs)
        if any(v != 0 for v in (sub * sol - rhs)):
            raise SystemExit(f"order {self.order}: inconsistent closure system")
        vals = [None] * A.shape[1]
        for c, v in zip(rest, sol):
            vals[c] = sp.nsimplify(v)
        for c, v in zip(fixed_cols, fv):
            vals[c] = v
        return vals

    def reference(self, vals, n_ref, conv=lambda v: v):
        """Return (H, D2, d_l, d_r, M) on a unit-spacing grid of n_ref points."""
        r, p = self.r, self.p
        zero = conv(sp.Integer(0))
        M = [[zero] * n_ref for _ in range(n_ref)]
        for i in range(n_ref):
            for j in range(max(0, i - p), min(n_ref, i + p + 1)):
                M[i][j] = conv(self.fixed(i, j))
        for i in range(r):
            for j in range(r):
                M[i][j] = conv(self.m_entry(vals, i, j))
                M[n_ref - 1 - i][n_ref - 1 - j] = M[i][j]
        dl = [zero] * n_ref
        for j in range(self.dw):
            dl[j] = conv(vals[self.index[f"d{j}"]])
        dr = [-dl[n_ref - 1 - j] for j in range(n_ref)]
        hw = [conv(sp.Integer(1))] * n_ref
        for i in range(r):
            hw[i] = hw[n_ref - 1 - i] = conv(self.hw[i])
        D2 = [[zero] * n_ref for _ in range(n_ref)]
        for i in range(n_ref):
            for j in range(n_ref):
                bnd = -(dl[j] if i == 0 else zero) + (dr[j] if i == n_ref - 1 else zero)
                D2[i][j] = (-M[i][j] + bnd) / hw[i]
        return hw, D2, dl, dr, M


def fmt(v):
    return f"{float(v):.17g}"


def write_triplets(path, rows, cols, entries):
    lines = [f"{rows} {cols} {len(entries)}"]
    lines += [f"{i} {j} {fmt(v)}" for i, j, v in entries]
    path.write_text("\n".join(lines) + "\n")


def fnv1a64(data):
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def generate(out):
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for order in sorted(NORMS):
        cl = Closure(order)
        vals = cl.solve(FREE[order])
        n_ref = 2 * cl.r + 2 * cl.p + 3
        hw, D2, dl, dr, _ = cl.reference(vals, n_ref)
        files = {
            "norm": (n_ref, 1, [(i, 0, hw[i]) for i in range(n_ref)]),
            "d2": (n_ref, n_ref, [(i, j, D2[i][j]) for i in range(n_ref) for j in range(n_ref) if D2[i][j] != 0]),
            "bderiv": (2, n_ref, [(0, j, dl[j]) for j in range(n_ref) if dl[j] != 0]
                       + [(1, j, dr[j]) for j in range(n_ref) if dr[j] != 0]),
        }
        for role, (rows, cols, entries) in files.items():
            path = out / f"sbp{order}_{role}.txt"
            write_triplets(path, rows, cols, entries)
            manifest.append(f"{path.name} {fnv1a64(path.read_bytes()):016x}")
        print(f"order {order}: closure {cl.r}, reference grid {n_ref}", file=sys.stderr)
    (out / "MANIFEST").write_text("\n".join(manifest) + "\n")


def search(order, starts=20):
    import numpy as np
    import scipy.optimize as so

    cl = Closure(order)
    free = cl.free_columns()
    print("free unknowns:", free)
    if not free:
        return
    A, b = cl.equations()
    An = np.array(A.tolist(), dtype=float)
    bn = np.array(b.tolist(), dtype=float).ravel()
    fcols = [cl.index[nm] for nm in free]
    rest = [c for c in range(An.shape[1]) if c not in fcols]
    n = 40

    def assemble(z):
        u = np.zeros(An.shape[1])
        u[fcols] = z
        u[rest] = np.linalg.lstsq(An[:, rest], bn - An[:, fcols] @ z, rcond=None)[0]
        hw, D2, dl, dr, M = cl.reference(list(u), n, float)
        return (np.array(M, dtype=float), np.array(dl, dtype=float),
                np.array(dr, dtype=float), np.array(hw, dtype=float))

    def objective(z):
        M, dl, dr, hw = assemble(z)
        ev, V = np.linalg.eigh(M)
        if ev[0] < -1e-10 * abs(ev).max() or ev[1] <= 1e-12:
            return 1e4 * (1 - min(ev[0], 0))
        Vp = V[:, 1:]
        D = np.stack([dl, dr], 1)
        gamma = 1 / np.linalg.eigvalsh(D.T @ Vp @ np.diag(1 / ev[1:]) @ Vp.T @ D)[-1]
        K = M.copy()
        for k, d in ((0, -dl), (n - 1, dr)):
            e = np.zeros(n)
            e[k] = 1
            K += -np.outer(e, d) - np.outer(d, e) + np.outer(e, e) / gamma
        return np.linalg.eigvalsh(K / np.sqrt(np.outer(hw, hw)))[-1]

    rng = np.random.default_rng(0)
    best = None
    for _ in range(starts):
        z0 = rng.normal(size=len(free)) * rng.choice([0.1, 1.0, 10.0])
        res = so.minimize(objective, z0, method="Nelder-Mead",
                          options=dict(maxiter=20000, xatol=1e-12, fatol=1e-12))
        if best is None or res.fun < best.fun:
            best = res
    print("spectral radius:", best.fun)
    for nm, v in zip(free, best.x):
        f = Fr(repr(float(v)))
        print(f'    "{nm}": "{f.numerator}/{f.denominator}",')


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "sbp"))
    ap.add_argument("--search", type=int)
    args = ap.parse_args()
    if args.search:
        search(args.search)
    else:
        generate(pathlib.Path(args.out))


if __name__ == "__main__":
    main()
