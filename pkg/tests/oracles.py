"""Independent reference implementations used only by the test suite.

Everything here is deliberately naive: dense matrices, explicit loops,
inverse power iteration with numpy solves. None of it shares code with
the production solver paths it cross-checks.
"""

import numpy as np


def dense_two_group_k(cells, pitch, boundary="vacuum", tol=1e-13,
                      max_iter=50_000):
    """Dominant k of the two-group problem on a small rectangular grid.

    ``cells`` is a nested list of GroupConstants or None. Assembles the
    full dense migration and fission matrices face by face and runs
    inverse power iteration on them.
    """
    nr, nc = len(cells), len(cells[0])
    index = {}
    for r in range(nr):
        for c in range(nc):
            if cells[r][c] is not None:
                index[(r, c)] = len(index)
    n = len(index)
    m = np.zeros((2 * n, 2 * n))
    f = np.zeros((2 * n, 2 * n))

    for (r, c), i in index.items():
        gc = cells[r][c]
        for g, d in ((0, gc.D1), (1, gc.D2)):
            row = g * n + i
            for dr, dc in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                r2, c2 = r + dr, c + dc
                if (r2, c2) in index:
                    neighbor = cells[r2][c2]
                    d2 = neighbor.D1 if g == 0 else neighbor.D2
                    w = 2.0 * d * d2 / ((d + d2) * pitch) / pitch
                    m[row, row] += w
                    m[row, g * n + index[(r2, c2)]] -= w
                elif boundary == "vacuum":
                    m[row, row] += (2.0 * d / (4.0 * d + pitch)) / pitch
        m[i, i] += gc.Sigma_a1 + gc.Sigma_s12
        m[n + i, n + i] += gc.Sigma_a2
        m[n + i, i] -= gc.Sigma_s12
        f[i, i] = gc.nuSigma_f1
        f[i, n + i] = gc.nuSigma_f2

    x = np.ones(2 * n)
    k = 1.0
    stable = 0
    for _ in range(max_iter):
        y = np.linalg.solve(m, f @ x)
        total = (f @ y).sum()
        k_new = total / (f @ x).sum()
        x = y / np.linalg.norm(y)
        if abs(k_new - k) < tol:
            stable += 1
            if stable >= 3:
                return k_new
        else:
            stable = 0
        k = k_new
    raise RuntimeError("dense oracle did not converge")


def finite_difference_gradients(loss_fn, params, h=1e-6):
    """Central-difference gradient of loss_fn with respect to each array."""
    grads = []
    for p in params:
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            hi = loss_fn()
            flat[i] = orig - h
            lo = loss_fn()
            flat[i] = orig
            gflat[i] = (hi - lo) / (2.0 * h)
        grads.append(g)
    return grads


def max_relative_error(a_list, b_list):
    worst = 0.0
    for a, b in zip(a_list, b_list):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-12)
        worst = max(worst, float(np.max(np.abs(a - b) / denom)))
    return worst
