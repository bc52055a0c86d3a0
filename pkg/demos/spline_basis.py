"""
B-spline edge bases
===================

Every KAN edge is a weighted sum of a SiLU term and degree-p B-splines on a
uniform grid. This walks through evaluating that basis, checking it against
a textbook recursion and reading off the per-basis Lipschitz constants that
feed the complexity measure.
"""

import numpy as np

from kanbound.spline import EdgeBasis, SplineSpec, basis_eval, basis_lipschitz, spline_values

# cubic splines on five intervals of [-1, 1]: 5 + 3 = 8 splines, 9 with SiLU
spec = SplineSpec(degree=3, grid_min=-1.0, grid_max=1.0, grid_count=5)
basis = EdgeBasis(spec)
print("knots:", np.round(spec.knots, 3))
print("basis size with SiLU:", basis.total_count)

# The splines form a partition of unity on [a, b]; inputs outside are clamped,
# while the SiLU entry always sees the raw input.
xs = np.linspace(-1, 1, 7)
B = spline_values(spec, xs)
print("row sums:", B.sum(axis=1))
print("basis at x=3:", np.round(basis_eval(basis, 3.0), 4))


def cox_de_boor(k, p, t, x):
    # the classic recursion, fine for a single interior point
    if p == 0:
        return float(t[k] <= x < t[k + 1])
    left = (x - t[k]) / (t[k + p] - t[k]) * cox_de_boor(k, p - 1, t, x)
    right = (t[k + p + 1] - x) / (t[k + p + 1] - t[k + 1]) * cox_de_boor(k + 1, p - 1, t, x)
    return left + right


naive = [cox_de_boor(k, 3, spec.knots, 0.3) for k in range(spec.basis_count)]
print("max gap to naive recursion at x=0.3:", np.max(np.abs(spline_values(spec, 0.3) - naive)))

# Lipschitz constants: the analytic rule 2p/Δ versus a refined grid search.
print("analytic a_k:", np.round(basis_lipschitz(basis, "analytic"), 4))
print("grid a_k:    ", np.round(basis_lipschitz(basis, "grid"), 4))
