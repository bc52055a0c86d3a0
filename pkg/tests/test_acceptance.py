"""Acceptance criteria, one test per criterion at its stated tolerance."""

import dataclasses
import math
import time

import numpy as np
import pytest

import oracles
from acceptance_log import record
from kanbound.bounds import (BoundInputs, LowRankInputs, maurey_sparsify, rademacher_linear_exact,
                             slack_subexp, slack_thm_main, slack_thm_main2, slack_thm_main3)
from kanbound.complexity import LayerStats, alpha_tilde
from kanbound.experiments import ExperimentConfig, draw_targets, run_dropout_comparison, run_experiment
from kanbound.network import ForwardTape, network_backward, network_forward
from kanbound.numeric import make_rng, spectral_norm
from kanbound.spline import EdgeBasis, SplineSpec, basis_derivative, basis_eval, spline_values
from kanbound.verify import (check_maurey, finite_difference_grads, gradient_relative_error,
                             random_gradient_case)

DESK = dict(setup="i", shape=[4, 8, 8, 1], n_train=2000, n_test=2000, epochs=200, seed=7)


def test_gradient_oracle():
    start = time.perf_counter()
    rng = make_rng(20240)
    worst, n_nets = 0.0, 25
    for _ in range(n_nets):
        net, X, up = random_gradient_case(rng)
        tape = ForwardTape()
        network_forward(net, X, tape=tape)
        grads = network_backward(net, tape, up)
        worst = max(worst, gradient_relative_error(grads, finite_difference_grads(net, X, up, h=1e-5)))
    elapsed = time.perf_counter() - start
    record("gradient oracle", worst < 1e-4 and elapsed < 30,
           f"{n_nets} networks, max relative error {worst:.2e} (< 1e-4), {elapsed:.1f} s (< 30 s)")


def test_spline_correctness():
    pou = 0.0
    for p in range(4):
        for G in range(2, 11):
            spec = SplineSpec(p, -1.0, 1.0, G)
            vals = spline_values(spec, np.linspace(-1.0, 1.0, 1000))
            pou = max(pou, float(np.max(np.abs(vals.sum(axis=1) - 1.0))))
    rng = make_rng(1)
    deriv, h = 0.0, 1e-6
    for p in range(1, 4):
        for G in range(2, 11):
            basis = EdgeBasis(SplineSpec(p, -1.0, 1.0, G))
            for x in rng.uniform(-1.0, 1.0, 50):
                if np.min(np.abs(basis.spec.knots - x)) < 1e-3:
                    continue
                fd = (basis_eval(basis, x + h) - basis_eval(basis, x - h)) / (2 * h)
                an = basis_derivative(basis, x)
                deriv = max(deriv, float(np.max(np.abs(fd - an) / np.maximum(1.0, np.abs(an)))))
    record("spline correctness", pou < 1e-12 and deriv < 1e-5,
           f"partition-of-unity error {pou:.1e} (< 1e-12), derivative error {deriv:.1e} (< 1e-5)")


def test_spectral_norm_oracle():
    rng = make_rng(2)
    worst = 0.0
    for _ in range(50):
        m, n = int(rng.integers(1, 9)), int(rng.integers(1, 13))
        A = rng.standard_normal((m, n))
        worst = max(worst, abs(spectral_norm(A) - oracles.spectral_norm_oracle(A)))
    record("spectral norm", worst < 1e-8, f"50 matrices up to 8x12, max deviation {worst:.1e} (< 1e-8)")


def test_maurey_sparsification():
    start = time.perf_counter()
    res = check_maurey(100, seed=3)
    rng = make_rng(4)
    V = [rng.standard_normal((3, 4)) for _ in range(8)]
    a = rng.uniform(0.0, 1.0, 8)
    ks = np.array([4, 16, 64, 256])
    errs = [np.mean([maurey_sparsify(V, a, int(k), make_rng(500 + r)).error for r in range(200)])
            for k in ks]
    slope = float(np.polyfit(np.log(ks), np.log(errs), 1)[0])
    elapsed = time.perf_counter() - start
    ok = res.passed and abs(slope + 0.5) <= 0.15 and elapsed < 20
    record("Maurey sparsification", ok,
           f"{res.detail}; log-log slope {slope:.3f} (-0.5 ± 0.15); {elapsed:.1f} s (< 20 s)")


def test_rademacher_closed_form():
    est, se = rademacher_linear_exact(np.eye(2), 1.0, make_rng(5), 10_000)
    # enumerate the four sign patterns: every one has norm sqrt(2), divided by n = 2
    exact = np.mean([np.linalg.norm(np.array(e)) / 2 for e in [(1, 1), (1, -1), (-1, 1), (-1, -1)]])
    ok = abs(est - exact) <= 3 * se + 8 * np.finfo(float).eps
    record("Rademacher closed form", ok, f"estimate {est:.6f} ± {se:.1e} vs exact {exact:.6f}")


def test_alpha_tilde_identity():
    rng = make_rng(6)
    worst = 0.0
    for _ in range(100):
        L = int(rng.integers(1, 7))
        stats = [LayerStats(B=rng.uniform(0, 5), c=rng.uniform(0.1, 4), rho=rng.uniform(0.1, 4),
                            sigma_A=0.0, sum_ak_sq=0.0, C=rng.uniform(0, 2)) for _ in range(L)]
        D = float(rng.uniform(0.1, 50))
        want = (D * np.prod([s.rho for s in stats])) ** (2 / 3) * sum((s.B * s.c) ** (2 / 3) for s in stats)
        got = alpha_tilde(stats, D, C=0.0)[1]
        worst = max(worst, abs(got - want) / max(1.0, abs(want)))
    record("alpha-tilde identity", worst < 1e-10, f"100 random stat lists, max relative deviation {worst:.1e}")


# ---------------------------------------------------------------- bound formulas

def _random_bound_inputs(rng):
    return BoundInputs(
        alpha_tilde=float(rng.uniform(0.1, 5.0)), d_tilde=int(rng.integers(2, 101)),
        p_tilde=int(rng.integers(2, 13)), n=1e4, M=float(rng.uniform(0.5, 2.0)),
        B_max=float(rng.uniform(0.5, 2.0)), epsilon_conf=float(rng.uniform(0.01, 0.2)),
        tau=float(rng.uniform(0.01, 0.2)), eta=float(rng.uniform(0.01, 0.2)),
        s=float(rng.uniform(2.0, 6.0)), s_prime=float(rng.uniform(2.0, 6.0)),
        C_prime=float(rng.uniform(0.5, 2.0)), C_dprime=float(rng.uniform(0.5, 2.0)))


def _random_lowrank(rng):
    L = int(rng.integers(1, 4))
    nu = float(rng.uniform(1.0, 4.0))
    d = [int(rng.integers(1, 9)) for _ in range(L + 1)]
    if max(d) <= nu:
        d[int(rng.integers(0, L + 1))] = int(math.floor(nu)) + 1 + int(rng.integers(0, 4))
    return dict(inp=LowRankInputs(d=d, r=[int(rng.integers(1, 4)) for _ in range(L)],
                                  R=list(rng.uniform(0.2, 2.0, L)), rho=list(rng.uniform(0.5, 2.0, L)),
                                  nu=nu, n=1e4, C_tilde=float(rng.uniform(0.5, 2.0))),
                M=float(rng.uniform(0.5, 2.0)), B=float(rng.uniform(0.5, 2.0)),
                eps=float(rng.uniform(0.01, 0.2)), Ctp=float(rng.uniform(0.5, 2.0)))


def _main(case, n):
    i = case.with_n(n)
    return slack_thm_main(i), sum(oracles.thm_main_terms(i.alpha_tilde, i.d_tilde, i.p_tilde, i.B_max,
                                                         i.M, n, i.epsilon_conf))


def _main2(case, n):
    i = case.with_n(n)
    return slack_thm_main2(i), sum(oracles.thm_main2_terms(
        i.alpha_tilde, i.d_tilde, i.p_tilde, n, i.epsilon_conf, i.tau, i.eta, i.s, i.s_prime,
        i.C_prime, i.C_dprime))


def _subexp(case, n):
    i = case.with_n(n)
    return slack_subexp(i), sum(oracles.subexp_terms(i.alpha_tilde, i.d_tilde, i.p_tilde, n,
                                                     i.epsilon_conf, i.tau, i.eta, 1.0))


def _main3(case, n):
    i = case["inp"].with_n(n)
    return (slack_thm_main3(i, case["M"], case["B"], case["eps"], case["Ctp"]),
            sum(oracles.thm_main3_terms(i.d, i.r, i.R, i.rho, i.nu, n, i.C_tilde, case["M"], case["B"],
                                        case["eps"], case["Ctp"])))


BOUND_CASES = {
    "slack_thm_main": (_main, _random_bound_inputs),
    "slack_thm_main2": (_main2, _random_bound_inputs),
    "slack_thm_main3": (_main3, _random_lowrank),
    "slack_subexp": (_subexp, _random_bound_inputs),
}


@pytest.mark.parametrize("name", list(BOUND_CASES))
def test_bound_formula_cross_check(name):
    evaluate, draw = BOUND_CASES[name]
    rng = make_rng(7)
    cases = [draw(rng) for _ in range(10)]
    ns = np.logspace(2, 8, 121)
    worst_rel, rising = 0.0, []
    for idx, case in enumerate(cases):
        values = []
        for n in ns:
            got, want = evaluate(case, float(n))
            worst_rel = max(worst_rel, abs(got - want) / abs(want))
            values.append(got)
        steps = np.diff(values)
        if np.any(steps >= 0):
            j = int(np.argmax(steps))
            rising.append(f"input {idx} rises {steps[j] / values[j]:.2%} at n≈{ns[j]:.3g}")
    ok = worst_rel <= 1e-12 and not rising
    detail = f"10 random inputs, max relative disagreement {worst_rel:.1e} (<= 1e-12); "
    detail += "monotone decreasing on 10^2..10^8" if not rising else \
        f"NOT monotone for {len(rising)}/10 inputs ({'; '.join(rising[:3])})"
    record(f"bound cross-check [{name}]", ok, detail)


def test_noise_model():
    y, _ = draw_targets("i", np.zeros((100_000, 4)), make_rng(8))  # f1(0) = 1, so y = exp(eps)
    mean, sd = float(y.mean()), float(y.std(ddof=1))
    record("noise model", abs(mean - 1) <= 0.01 and abs(sd - 0.2) <= 0.01,
           f"mean {mean:.4f} (1 ± 0.01), sd {sd:.4f} (0.2 ± 0.01)")


@pytest.fixture(scope="module")
def desk_run(tmp_path_factory):
    path = tmp_path_factory.mktemp("desk") / "desk.csv"
    cfg = ExperimentConfig(**DESK, csv_path=str(path))
    start = time.perf_counter()
    records = run_experiment(cfg)
    return cfg, records, time.perf_counter() - start


def test_desk_figure2(desk_run):
    _, records, elapsed = desk_run
    cx = np.array([r.complexity_raw for r in records])
    ex = np.array([r.excess_loss for r in records])
    corr = float(np.corrcoef(cx, ex)[0, 1])
    norm_max = max(r.complexity_normalized for r in records)
    ok = corr >= 0.6 and norm_max == ex[-1] and elapsed < 300
    record("desk Figure-2 reproduction", ok,
           f"Pearson r = {corr:.3f} (>= 0.6); normalized max {norm_max!r} vs final excess {float(ex[-1])!r}; "
           f"{elapsed:.0f} s (< 300 s)")


def test_dropout_comparison():
    lines, wins = [], 0
    for seed in range(7, 12):
        res = run_dropout_comparison(ExperimentConfig(**{**DESK, "seed": seed, "dropout_rate": 0.1}))
        ratio = float(res.ratio[-1])
        reg, base = res.regularized[-1].excess_loss, res.baseline[-1].excess_loss
        win = ratio < 1 and reg <= base
        wins += win
        lines.append(f"seed {seed}: ratio {ratio:.3f}, excess {reg:.4f} vs {base:.4f}")
    record("dropout comparison", wins >= 4, f"{wins}/5 seeds qualify (>= 4); " + "; ".join(lines))


def test_determinism(desk_run, tmp_path):
    cfg, _, _ = desk_run
    again = dataclasses.replace(cfg, csv_path=str(tmp_path / "again.csv"))
    run_experiment(again)
    same = open(cfg.csv_path, "rb").read() == open(again.csv_path, "rb").read()
    record("determinism", same, "two runs of the desk config wrote " +
           ("bit-identical CSVs" if same else "different CSVs"))
