"""Solve an SDPA sparse file's dual form  max F0.Y  s.t. Fk.Y = ck, Y >= 0
with cvxpy/Clarabel and print the optimal value. Lines starting with '*'
are comments, so sosinterp's metadata is ignored."""
import sys
import numpy as np
import scipy.sparse as sp
import cvxpy as cp

lines = [l for l in open(sys.argv[1]) if l.strip() and l[0] not in '*"']
m = int(lines[0].split()[0])
nb = int(lines[1].split()[0])
sizes = [int(float(s)) for s in lines[2].replace(',', ' ').replace('{', ' ').replace('}', ' ').split()[:nb]]
c = np.array([float(s) for s in lines[3].replace(',', ' ').split()[:m]])

# column offsets of every block in one long variable vector
offs, tot = [], 0
for s in sizes:
    offs.append(tot)
    tot += s * s if s > 0 else -s
rows, cols, vals = [], [], []
for l in lines[4:]:
    k, b, i, j, v = l.split()[:5]
    k, b, i, j, v = int(k), int(b) - 1, int(i) - 1, int(j) - 1, float(v)
    s = sizes[b]
    if s > 0:
        # cvxpy's vec is column-major
        if i == j:
            rows.append(k); cols.append(offs[b] + i + i * s); vals.append(v)
        else:
            rows += [k, k]; cols += [offs[b] + i + j * s, offs[b] + j + i * s]; vals += [v, v]
    else:
        rows.append(k); cols.append(offs[b] + i); vals.append(v)
F = sp.csr_matrix((vals, (rows, cols)), shape=(m + 1, tot))

Y = [cp.Variable((s, s), PSD=True) if s > 0 else cp.Variable(-s, nonneg=True) for s in sizes]
y = cp.hstack([cp.vec(v, order='F') if v.ndim == 2 else v for v in Y])
prob = cp.Problem(cp.Maximize(F[0] @ y), [F[1:] @ y == c])
prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
print(prob.status, repr(prob.value))
