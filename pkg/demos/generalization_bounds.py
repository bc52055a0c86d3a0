"""
Evaluating the generalization slacks
====================================

Each slack is the part of a bound that does not depend on the empirical
loss. Unknown absolute constants default to 1, so the numbers describe how
the bounds scale rather than certify a risk.
"""

import numpy as np

from kanbound.bounds import (BoundInputs, LowRankInputs, covering_bound_kan, slack_subexp,
                             slack_table, slack_thm_main, slack_thm_main2, slack_thm_main3)

inp = BoundInputs(alpha_tilde=1.0, d_tilde=2, p_tilde=2, n=1e4)
for name, value in slack_table({"alpha_tilde": 1.0, "d_tilde": 2, "p_tilde": 2, "n": 1e4}).items():
    print(f"{name:<26} {value:.6g}")

print("log covering number at eps=0.1:", covering_bound_kan(2.0, 4, 8, 0.1))

# Decay in n. The bounded-loss slack falls steadily.
for n in (1e2, 1e4, 1e6, 1e8):
    print(f"n={n:.0e}  main={slack_thm_main(inp.with_n(n)):.4g}  "
          f"moment={slack_thm_main2(inp.with_n(n)):.4g}  subexp={slack_subexp(inp.with_n(n)):.4g}")

# The moment and sub-exponential slacks carry a log(.) ∨ 1 clamp whose
# argument grows faster than sqrt(zeta0). Just after the clamp lets go the
# leading term rises for a short stretch of n before decaying again.
bump = BoundInputs(alpha_tilde=2.02, d_tilde=2, p_tilde=9, n=100, s=2.96, s_prime=5.51)
ns = np.linspace(78, 90, 13)
vals = [slack_thm_main2(bump.with_n(n)) for n in ns]
for n, v, d in zip(ns, vals, np.r_[np.nan, np.diff(vals)]):
    print(f"n={n:8.1f}  slack={v:.5f}  {'up' if d > 0 else ''}")

lr = LowRankInputs(d=[4, 6, 1], r=[2, 1], R=[1.0, 1.0], rho=[2.0, 1.5], nu=2.0, n=1e4)
print("low-rank slack:", slack_thm_main3(lr, M=1.0, B_max=1.0, eps_conf=0.05))
