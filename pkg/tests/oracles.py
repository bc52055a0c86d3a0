"""Independent reference implementations used only by the tests.

Nothing here imports the code under test except plain data containers.
"""

import math

import numpy as np


# --- eigenvalues by cyclic Jacobi rotations -----------------------------------------

def jacobi_eigenvalues(S, sweeps=100, tol=1e-15):
    S = np.array(S, dtype=float)
    n = S.shape[0]
    for _ in range(sweeps):
        off = math.sqrt(sum(S[i, j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off <= tol * max(1.0, float(np.abs(S).max())):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if S[p, q] == 0.0:
                    continue
                theta = (S[q, q] - S[p, p]) / (2 * S[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                S = J.T @ S @ J
    return np.diag(S)


def spectral_norm_oracle(A):
    A = np.asarray(A, dtype=float)
    return math.sqrt(max(jacobi_eigenvalues(A.T @ A).max(), 0.0))


# --- naive Cox–de Boor -----------------------------------------------------------------

def uniform_knots(p, G, a, b):
    h = (b - a) / G
    return [a + (i - p) * h for i in range(G + 2 * p + 1)]


def cox_de_boor(k, p, t, x, last_closed_at=None):
    """B_{k,p}(x) by the textbook recursion; the interval ending at ``last_closed_at`` is closed."""
    if p == 0:
        if last_closed_at is not None and x == last_closed_at:
            # x = b belongs to the last grid interval only
            return 1.0 if math.isclose(t[k + 1], x, abs_tol=1e-12) else 0.0
        return 1.0 if t[k] <= x < t[k + 1] else 0.0
    left = 0.0
    if t[k + p] != t[k]:
        left = (x - t[k]) / (t[k + p] - t[k]) * cox_de_boor(k, p - 1, t, x, last_closed_at)
    right = 0.0
    if t[k + p + 1] != t[k + 1]:
        right = (t[k + p + 1] - x) / (t[k + p + 1] - t[k + 1]) * cox_de_boor(k + 1, p - 1, t, x, last_closed_at)
    return left + right


def spline_vector(p, G, a, b, x):
    t = uniform_knots(p, G, a, b)
    xc = min(max(x, a), b)
    return [cox_de_boor(k, p, t, xc, last_closed_at=b) for k in range(G + p)]


def silu(x):
    return x / (1.0 + math.exp(-x))


# --- naive KAN forward -------------------------------------------------------------------

def kan_forward_naive(layers, x):
    """``layers``: list of (W, p, G, a, b, with_silu); x a single input vector."""
    h = list(map(float, x))
    for W, p, G, a, b, with_silu in layers:
        d_out, d_in, K = W.shape
        out = []
        for i in range(d_out):
            acc = 0.0
            for j in range(d_in):
                g = ([silu(h[j])] if with_silu else []) + spline_vector(p, G, a, b, h[j])
                g0 = ([0.0] if with_silu else []) + spline_vector(p, G, a, b, 0.0)
                for k in range(K):
                    acc += W[i, j, k] * (g[k] - g0[k])
            out.append(acc)
        h = out
    return h


# --- bound formulas re-typed term by term -------------------------------------------------

def thm_main_terms(alpha, d, p, B, M, n, eps):
    zeta = alpha ** 3 * math.log(2 * d * p) * B ** 2
    t1 = 144 * math.sqrt(zeta) * max(math.log(n * M / (3 * math.sqrt(zeta))), 1) / n
    t2 = math.sqrt(4 * M ** 2 * math.log(2 / eps) / n)
    t3 = 32 * M * math.log(2 / eps) / (3 * n)
    return t1, t2, t3


def thm_main2_terms(alpha, d, p, n, eps, tau, eta, s, sp, Cp, Cpp):
    zeta0 = alpha ** 3 * math.log(2 * d * p) * (n * Cpp / tau) ** (2 / sp)
    t1 = 144 * math.sqrt(zeta0) * max(math.log(n ** ((2 * s + 1) / (2 * s)) / (3 * math.sqrt(zeta0))), 1) / n
    t2 = 2 * math.sqrt(math.log(2 / eps)) / n ** ((s - 1) / (2 * s))
    t3 = 32 * math.log(2 / eps) / (3 * n ** ((2 * s - 1) / (2 * s)))
    t4 = 2 * Cp / (eta * n ** ((s - 1) / (2 * s)))
    return t1, t2, t3, t4


def cor1_deviation(n, eps, eta, s, Cp):
    return (1 + eta ** -0.5) * math.sqrt(2 * Cp ** (2 / s) * math.log(2 / eps) / n)


def subexp_terms(alpha, d, p, n, eps, tau, eta, C):
    zeta0 = alpha ** 3 * math.log(2 * d * p) * (C * math.log(n * C / tau)) ** 2
    t1 = 144 * math.sqrt(zeta0) * max(math.log(C * n * math.log(n) / math.sqrt(zeta0)), 1) / n
    t2 = C * math.log(n) * math.sqrt(math.log(2 / eps)) / math.sqrt(n)
    t3 = C * math.log(n) * math.log(2 / eps) / (3 * n)
    t4 = C * math.sqrt(math.log(1 / eta) / n)
    return t1, t2, t3, t4


def thm_main3_terms(d, r, R, rho, nu, n, Ct, M, B, eps, Ctp):
    L = len(r)
    bt = sum(Ct * R[i] * math.sqrt(r[i] * n) for i in range(L))
    xi = 0.0
    for i in range(1, L + 1):
        tail = 1.0
        for j in range(i + 1, L + 1):
            tail *= rho[j - 1]
        xi += d[i] * r[i - 1] * (B * bt * tail) ** max(d[i - 1] / nu, 1)
    dt = max(d)
    q = nu / dt
    t1 = 6 * Ctp * xi ** q / (n ** ((q + 1) / 2) * (dt / nu - 1) ** q)
    t2 = math.sqrt(4 * M ** 2 * math.log(2 / eps) / n)
    t3 = 32 * M * math.log(2 / eps) / (3 * n)
    return t1, t2, t3


def lowrank_entropy_naive(d, r, R, rho, nu, n, Ct, eps):
    L = len(r)
    bt = sum(Ct * R[i] * math.sqrt(r[i] * n) for i in range(L))
    total = 0.0
    for i in range(1, L + 1):
        tail = math.prod(rho[i:]) if i < L else 1.0
        total += d[i] * r[i - 1] * (bt * tail / eps) ** max(d[i - 1] / nu, 1)
    return total
