"""
Maurey sparsification and Rademacher averages
=============================================

Two constructive facts behind the covering-number argument, checked
numerically: a convex combination can be replaced by an average of k
sampled terms with error shrinking like 1/sqrt(k), and the Rademacher
complexity of a linear ball has a per-draw closed form.
"""

import numpy as np

from kanbound.bounds import maurey_sparsify, rademacher_linear_exact, rademacher_mc_class
from kanbound.numeric import make_rng

rng = make_rng(4)
V = [rng.standard_normal((3, 4)) for _ in range(8)]
a = rng.uniform(0, 1, 8)
for k in (4, 16, 64, 256):
    errs = [maurey_sparsify(V, a, k, make_rng(s)).error for s in range(100)]
    res = maurey_sparsify(V, a, k, make_rng(0))
    print(f"k={k:4d}  mean error {np.mean(errs):.4f}  bound {res.bound:.4f}  counts {res.counts}")

# Two orthonormal inputs: every sign pattern gives norm sqrt(2), so the value is sqrt(2)/2.
est, se = rademacher_linear_exact(np.eye(2), 1.0, make_rng(1), 10_000)
print(f"orthonormal design: {est:.6f} ± {se:.1e}")

# A finite mesh on the unit circle approaches the ball from below.
G = make_rng(2).standard_normal((5, 2))
exact, _ = rademacher_linear_exact(G, 1.0, make_rng(3), 4000)
for m in (4, 16, 64):
    th = 2 * np.pi * np.arange(m) / m
    betas = np.stack([np.cos(th), np.sin(th)], axis=1)
    est, _ = rademacher_mc_class(lambda X: betas @ G.T, None, make_rng(3), 4000)
    print(f"mesh of {m:3d} directions: {est:.5f}  (ball: {exact:.5f})")
