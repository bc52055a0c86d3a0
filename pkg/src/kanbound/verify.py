"""Self-checks behind the ``verify`` command: gradients, Maurey sparsification, Rademacher."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import maurey_sparsify, rademacher_linear_exact
from .network import ForwardTape, init_network, network_backward, network_forward
from .numeric import make_rng
from .spline import SplineSpec


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def finite_difference_grads(net, X, upstream, h: float = 1e-5) -> list[np.ndarray]:
    """Central differences of sum(upstream * net(X)) with respect to every coefficient."""
    grads = []
    for layer in net.layers:
        g = np.zeros_like(layer.W)
        flat = layer.W.reshape(-1)
        for idx in range(flat.size):
            old = flat[idx]
            flat[idx] = old + h
            up = float(np.sum(upstream * network_forward(net, X)))
            flat[idx] = old - h
            down = float(np.sum(upstream * network_forward(net, X)))
            flat[idx] = old
            g.reshape(-1)[idx] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def gradient_relative_error(analytic, numeric, floor: float = 1e-6) -> float:
    worst = 0.0
    for a, f in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), floor)
        worst = max(worst, float(np.max(np.abs(a - f) / denom)))
    return worst


def random_gradient_case(rng, max_width: int = 8):
    """A random network (depth 1–3, widths ≤ max_width) with a batch and upstream weights."""
    depth = int(rng.integers(1, 4))
    shape = [int(rng.integers(1, 5))] + [int(rng.integers(1, max_width + 1)) for _ in range(depth - 1)] + [1]
    spec = SplineSpec(degree=int(rng.choice([1, 3])), grid_count=int(rng.choice([3, 5])))
    net = init_network(shape, spec, int(rng.integers(2**31)))
    # perturb SiLU weights too so every coefficient matters
    for layer in net.layers:
        layer.W += 0.3 * rng.standard_normal(layer.W.shape)
    X = rng.uniform(-1.2, 1.2, size=(int(rng.integers(1, 6)), shape[0]))
    upstream = rng.standard_normal((X.shape[0], 1))
    return net, X, upstream


def check_gradients(n_cases: int = 20, seed: int = 0, tol: float = 1e-4) -> CheckResult:
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        net, X, upstream = random_gradient_case(rng)
        tape = ForwardTape()
        network_forward(net, X, tape=tape)
        analytic = network_backward(net, tape, upstream)
        worst = max(worst, gradient_relative_error(analytic, finite_difference_grads(net, X, upstream)))
    return CheckResult("gradient vs finite differences", worst < tol,
                       f"max relative error {worst:.2e} over {n_cases} networks (tol {tol:g})")


def check_maurey(n_cases: int = 100, seed: int = 0) -> CheckResult:
    rng = make_rng(seed)
    for case in range(n_cases):
        N = int(rng.integers(1, 9))
        dim = int(rng.integers(1, 13))
        V = [rng.standard_normal(dim) for _ in range(N)]
        a = rng.uniform(0.0, 1.0, N)
        k = int(rng.choice([4, 16, 64]))
        try:
            res = maurey_sparsify(V, a, k, rng)
        except RuntimeError as exc:
            return CheckResult("Maurey sparsification", False, f"case {case}: {exc}")
        if res.counts.sum() != k or res.error > res.bound:
            return CheckResult("Maurey sparsification", False, f"case {case}: bound violated")
    return CheckResult("Maurey sparsification", True, f"{n_cases} random instances met the bound")


def check_rademacher(trials: int = 10_000, seed: int = 0) -> CheckResult:
    theta = 0.7
    G = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    est, se = rademacher_linear_exact(G, 1.0, make_rng(seed), trials)
    exact = math.sqrt(2) / 2
    ok = abs(est - exact) <= 3 * se + 8 * np.finfo(float).eps
    return CheckResult("Rademacher closed form", ok, f"estimate {est:.12f} ± {se:.2e}, exact {exact:.12f}")


def run_checks() -> list[CheckResult]:
    return [check_gradients(), check_maurey(), check_rademacher()]
