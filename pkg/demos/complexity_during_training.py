"""
Complexity versus excess loss during training
=============================================

A short run of setup (i): four uniform inputs, a smooth target and
multiplicative log-normal noise. After each epoch the trainer records the
norm-based complexity of the weights next to the gap between test and
training loss. The full desk-scale run (200 epochs) is
``kanbound run --config demos/configs/desk.json``.
"""

import numpy as np

from kanbound.complexity import complexity_report
from kanbound.experiments import ExperimentConfig, run_experiment
from kanbound.network import init_network

cfg = ExperimentConfig(setup="i", shape=[4, 8, 8, 1], epochs=40, n_train=1000, n_test=1000, seed=7)
records = run_experiment(cfg)

print(f"{'epoch':>5} {'excess':>10} {'complexity':>12} {'normalized':>11}")
for r in records[::5] + [records[-1]]:
    print(f"{r.epoch:5d} {r.excess_loss:10.5f} {r.complexity_raw:12.2f} {r.complexity_normalized:11.5f}")

cx = np.array([r.complexity_raw for r in records])
ex = np.array([r.excess_loss for r in records])
# Forty epochs is short: the early underfitting phase still weighs on the
# correlation here, while the 200-epoch desk run tracks much more closely.
print("Pearson r over 40 epochs:", round(float(np.corrcoef(cx, ex)[0, 1]), 3))

# The pieces of the measure for a freshly initialized network
rep = complexity_report(init_network(cfg.shape, cfg.spline_spec, seed=0), D=30.0)
for l, s in enumerate(rep.layer_stats, 1):
    print(f"layer {l}: B={s.B:.3f} c={s.c:.3f} sigma_A={s.sigma_A:.3f} rho={s.rho:.3f}")
print("alpha~ =", round(rep.alpha_tilde, 3), " measure =", round(rep.measure, 3))
