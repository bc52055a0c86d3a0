"""Covering-number, Rademacher and generalization-slack formulas.

All logarithms are natural. Absolute constants that the theory leaves
unspecified (the RKHS entropy constant, the Dudley-integral constant of the
low-rank bounds, the generic sub-exponential constant) are explicit arguments
defaulting to 1, so the functions report the *shape* of each bound rather
than certified values. A "slack" is everything in a bound except the
empirical loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .numeric import make_rng


@dataclass(frozen=True)
class BoundInputs:
    alpha_tilde: float
    d_tilde: int
    p_tilde: int
    n: float
    M: float = 1.0
    B_max: float = 1.0
    epsilon_conf: float = 0.05
    tau: float = 0.05
    eta: float = 0.05
    s: float = 2.0
    s_prime: float = 2.0
    C_prime: float = 1.0
    C_dprime: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.M <= 0:
            raise ValueError("M must be positive")
        for name in ("epsilon_conf", "tau", "eta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.s <= 1:
            raise ValueError("s must exceed 1")
        if self.s_prime <= 0:
            raise ValueError("s_prime must be positive")

    def with_n(self, n) -> "BoundInputs":
        return replace(self, n=n)


@dataclass(frozen=True)
class LowRankInputs:
    d: Sequence[int]        # widths d_0 .. d_L
    r: Sequence[float]      # ranks r_1 .. r_L
    R: Sequence[float]      # RKHS radii R_1 .. R_L
    rho: Sequence[float]    # Lipschitz constants rho_1 .. rho_L
    nu: float
    n: float
    C_tilde: float = 1.0

    def __post_init__(self):
        L = len(self.r)
        if L < 1 or len(self.d) != L + 1 or len(self.R) != L or len(self.rho) != L:
            raise ValueError("need len(d) = L + 1 and len(r) = len(R) = len(rho) = L >= 1")
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        if min(self.r) < 1:
            raise ValueError("ranks must be at least 1")

    def with_n(self, n) -> "LowRankInputs":
        return replace(self, n=n)


def _clamped_log(x: float) -> float:
    # log(x) ∨ 1
    return max(math.log(x), 1.0) if x > 0 else 1.0


# ---------------------------------------------------------------- covering numbers

def cover_radius_composition(eps: Sequence[float], rho: Sequence[float]) -> list[float]:
    """Radii s_k with s_1 = eps_1 and s_{k+1} = rho_{k+1} s_k + eps_{k+1}."""
    if len(eps) != len(rho) or not eps:
        raise ValueError("eps and rho must be nonempty and of equal length")
    s = [float(eps[0])]
    for k in range(1, len(eps)):
        s.append(rho[k] * s[-1] + eps[k])
    return s


def covering_bound_basis(b: float, c: float, m: int, p: int, eps: float) -> float:
    """Log covering number bound b²c² log(2mp) / eps² for one basis-expanded layer."""
    return b * b * c * c * math.log(2 * m * p) / (eps * eps)


def covering_bound_kan(alpha_tilde: float, d_tilde: int, p_tilde: int, eps: float) -> float:
    """Log covering number bound alpha~³ log(2 d~ p~) / eps² for the whole network."""
    return alpha_tilde ** 3 * math.log(2 * d_tilde * p_tilde) / (eps * eps)


# ---------------------------------------------------------------- slack terms

def dudley_term(zeta: float, n: float, M: float) -> float:
    """Rademacher bound 24√ζ·(log(nM/(3√ζ)) ∨ 1)/n obtained from entropy ζ/ε²."""
    if zeta <= 0:
        return 0.0
    rz = math.sqrt(zeta)
    return 24.0 * rz * _clamped_log(n * M / (3.0 * rz)) / n


def kan_entropy_scale(inp: BoundInputs) -> float:
    """ζ = alpha~³ log(2 d~ p~) max_i B²(y_i)."""
    return inp.alpha_tilde ** 3 * math.log(2 * inp.d_tilde * inp.p_tilde) * inp.B_max ** 2


def _zeta0_poly(inp: BoundInputs) -> float:
    return (inp.alpha_tilde ** 3 * math.log(2 * inp.d_tilde * inp.p_tilde)
            * (inp.n * inp.C_dprime / inp.tau) ** (2.0 / inp.s_prime))


def _bounded_tail(M: float, n: float, eps_conf: float) -> float:
    lg = math.log(2.0 / eps_conf)
    return math.sqrt(4.0 * M * M * lg / n) + 32.0 * M * lg / (3.0 * n)


def slack_thm_main(inp: BoundInputs) -> float:
    """Slack of the bounded-loss bound: 6·dudley(ζ) plus the two concentration terms."""
    n = inp.n
    return 6.0 * dudley_term(kan_entropy_scale(inp), n, inp.M) + _bounded_tail(inp.M, n, inp.epsilon_conf)


def _truncated_terms(inp: BoundInputs) -> tuple[float, float, float]:
    # Dudley term with M = n^{1/(2s)}, the n^{(2s-1)/(2s)} tail and the truncation term
    n, s = inp.n, inp.s
    zeta0 = _zeta0_poly(inp)
    rz = math.sqrt(zeta0)
    dudley = 144.0 * rz * _clamped_log(n ** ((2 * s + 1) / (2 * s)) / (3.0 * rz)) / n if rz > 0 else 0.0
    lg = math.log(2.0 / inp.epsilon_conf)
    tail = 32.0 * lg / (3.0 * n ** ((2 * s - 1) / (2 * s)))
    trunc = 2.0 * inp.C_prime / (inp.eta * n ** ((s - 1) / (2 * s)))
    return dudley, tail, trunc


def slack_thm_main2(inp: BoundInputs) -> float:
    """Slack of the unbounded-loss bound under s-th moment conditions."""
    dudley, tail, trunc = _truncated_terms(inp)
    dev = 2.0 * math.sqrt(math.log(2.0 / inp.epsilon_conf)) / inp.n ** ((inp.s - 1) / (2 * inp.s))
    return dudley + dev + tail + trunc


def slack_excess_cor1(inp: BoundInputs) -> float:
    """Excess-risk slack; needs s >= 2."""
    if inp.s < 2:
        raise ValueError("the excess-risk bound requires s >= 2")
    dudley, tail, trunc = _truncated_terms(inp)
    dev = (1.0 + inp.eta ** -0.5) * math.sqrt(
        2.0 * inp.C_prime ** (2.0 / inp.s) * math.log(2.0 / inp.epsilon_conf) / inp.n)
    return dudley + dev + tail + trunc


def slack_subexp(inp: BoundInputs, C_prime_const: float = 1.0) -> float:
    """Slack under sub-exponential tails; ``C_prime_const`` is the generic constant C'."""
    n, Cp = inp.n, C_prime_const
    zeta0 = (inp.alpha_tilde ** 3 * math.log(2 * inp.d_tilde * inp.p_tilde)
             * (Cp * math.log(n * Cp / inp.tau)) ** 2)
    rz = math.sqrt(zeta0)
    dudley = 144.0 * rz * _clamped_log(Cp * n * math.log(n) / rz) / n if rz > 0 else 0.0
    lg = math.log(2.0 / inp.epsilon_conf)
    return (dudley
            + Cp * math.log(n) * math.sqrt(lg) / math.sqrt(n)
            + Cp * math.log(n) * lg / (3.0 * n)
            + Cp * math.sqrt(math.log(1.0 / inp.eta) / n))


# ---------------------------------------------------------------- low-rank layers

def _rho_tail(rho: Sequence[float], i: int) -> float:
    # prod_{j=i+1}^{L} rho_j for 1-based i
    return float(np.prod(rho[i:])) if i < len(rho) else 1.0


def _b_tilde(inp: LowRankInputs) -> float:
    return sum(inp.C_tilde * R * math.sqrt(r * inp.n) for R, r in zip(inp.R, inp.r))


def _lowrank_sum(inp: LowRankInputs, scale: float) -> float:
    bt = _b_tilde(inp)
    total = 0.0
    for i in range(1, len(inp.r) + 1):
        expo = max(inp.d[i - 1] / inp.nu, 1.0)
        total += inp.d[i] * inp.r[i - 1] * (scale * bt * _rho_tail(inp.rho, i)) ** expo
    return total


def lowrank_entropy(inp: LowRankInputs, eps: float) -> float:
    """Log covering bound sum_i d_i r_i (b~ prod_{j>i} rho_j / eps)^((d_{i-1}/nu) ∨ 1)."""
    return _lowrank_sum(inp, 1.0 / eps)


def lowrank_xi(inp: LowRankInputs, B_max: float) -> float:
    return _lowrank_sum(inp, B_max)


def lowrank_xi0(inp: LowRankInputs, tau: float, s_prime: float, C_dprime: float) -> float:
    return _lowrank_sum(inp, (inp.n * C_dprime / tau) ** (2.0 / s_prime))


def _lowrank_dudley(xi: float, inp: LowRankInputs, C_tilde_prime: float) -> float:
    d_tilde = max(inp.d)
    if d_tilde <= inp.nu:
        raise ValueError(f"low-rank bound needs max width {d_tilde} > nu = {inp.nu}")
    q = inp.nu / d_tilde
    return 6.0 * C_tilde_prime * xi ** q / (inp.n ** ((q + 1) / 2) * (d_tilde / inp.nu - 1) ** q)


def slack_thm_main3(inp: LowRankInputs, M: float, B_max: float, eps_conf: float,
                    C_tilde_prime: float = 1.0) -> float:
    """Slack for low-rank RKHS layers with a loss bounded by ``M``."""
    xi = lowrank_xi(inp, B_max)
    return _lowrank_dudley(xi, inp, C_tilde_prime) + _bounded_tail(M, inp.n, eps_conf)


def slack_thm_main4(inp: LowRankInputs, moments: BoundInputs, C_tilde_prime: float = 1.0) -> float:
    """Unbounded-loss analogue of :func:`slack_thm_main3`; moment terms come from ``moments``."""
    xi0 = lowrank_xi0(inp, moments.tau, moments.s_prime, moments.C_dprime)
    m = replace(moments, n=inp.n)
    _, tail, trunc = _truncated_terms(m)
    dev = 2.0 * math.sqrt(math.log(2.0 / m.epsilon_conf)) / m.n ** ((m.s - 1) / (2 * m.s))
    return _lowrank_dudley(xi0, inp, C_tilde_prime) + dev + tail + trunc


def slack_excess_cor2(inp: LowRankInputs, moments: BoundInputs, C_tilde_prime: float = 1.0) -> float:
    if moments.s < 2:
        raise ValueError("the excess-risk bound requires s >= 2")
    xi0 = lowrank_xi0(inp, moments.tau, moments.s_prime, moments.C_dprime)
    m = replace(moments, n=inp.n)
    _, tail, trunc = _truncated_terms(m)
    dev = (1.0 + m.eta ** -0.5) * math.sqrt(
        2.0 * m.C_prime ** (2.0 / m.s) * math.log(2.0 / m.epsilon_conf) / m.n)
    return _lowrank_dudley(xi0, inp, C_tilde_prime) + dev + tail + trunc


def slack_table(params: dict) -> dict[str, float]:
    """Evaluate every slack applicable to a parameter dict (the ``bounds`` CLI payload).

    Keys matching :class:`BoundInputs` fields drive the basis-expansion bounds;
    a nested ``"lowrank"`` object (fields of :class:`LowRankInputs` plus optional
    ``M``, ``B_max``, ``C_tilde_prime``) drives the low-rank ones.
    """
    params = dict(params)
    lowrank = params.pop("lowrank", None)
    C_sub = params.pop("C_prime_const", 1.0)
    out: dict[str, float] = {}
    inp = BoundInputs(**params)
    zeta = kan_entropy_scale(inp)
    out["zeta"] = zeta
    out["dudley_term"] = dudley_term(zeta, inp.n, inp.M)
    out["covering_bound_kan(eps=1)"] = covering_bound_kan(inp.alpha_tilde, inp.d_tilde, inp.p_tilde, 1.0)
    out["slack_thm_main"] = slack_thm_main(inp)
    out["slack_thm_main2"] = slack_thm_main2(inp)
    if inp.s >= 2:
        out["slack_excess_cor1"] = slack_excess_cor1(inp)
    out["slack_subexp"] = slack_subexp(inp, C_sub)
    if lowrank is not None:
        lowrank = dict(lowrank)
        M = lowrank.pop("M", inp.M)
        B_max = lowrank.pop("B_max", inp.B_max)
        ctp = lowrank.pop("C_tilde_prime", 1.0)
        lr = LowRankInputs(**lowrank)
        out["lowrank_entropy(eps=1)"] = lowrank_entropy(lr, 1.0)
        out["slack_thm_main3"] = slack_thm_main3(lr, M, B_max, inp.epsilon_conf, ctp)
        out["slack_thm_main4"] = slack_thm_main4(lr, inp, ctp)
        if inp.s >= 2:
            out["slack_excess_cor2"] = slack_excess_cor2(lr, inp, ctp)
    return out


# ---------------------------------------------------------------- constructive checks

class SparsificationError(RuntimeError):
    pass


@dataclass
class SparsifyResult:
    counts: np.ndarray
    error: float
    bound: float
    resamples: int = field(default=1)


def maurey_sparsify(V: Sequence[np.ndarray], a, k: int, rng=None, max_resamples: int = 200) -> SparsifyResult:
    """Approximate U = sum_l a_l V_l by (‖a‖₁/k) sum_l k_l V_l with integer k_l summing to k.

    Draws k indices iid with probabilities a_l/‖a‖₁ until the squared error is
    at most (‖a‖₁/k) sum_l a_l ‖V_l‖², which holds in expectation for one draw.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1 or len(V) != a.size:
        raise ValueError("need one weight per element")
    if np.any(a < 0) or not np.any(a > 0):
        raise ValueError("weights must be nonnegative and not all zero")
    if k < 1:
        raise ValueError("k must be positive")
    rng = make_rng(0 if rng is None else rng)
    stack = np.stack([np.asarray(v, dtype=np.float64) for v in V])
    flat = stack.reshape(len(V), -1)
    a1 = float(a.sum())
    U = a @ flat
    bound_sq = a1 / k * float(a @ np.sum(flat * flat, axis=1))
    probs = a / a1
    best = None
    for attempt in range(1, max_resamples + 1):
        counts = rng.multinomial(k, probs)
        err = float(np.linalg.norm(U - (a1 / k) * (counts @ flat)))
        if best is None or err < best.error:
            best = SparsifyResult(counts, err, math.sqrt(bound_sq), attempt)
        if best.error ** 2 <= bound_sq:
            return best
    raise SparsificationError(
        f"no draw met the bound in {max_resamples} resamples "
        f"(best error² {best.error ** 2:.6g} > {bound_sq:.6g})")


def _mc_mean(values: np.ndarray) -> tuple[float, float]:
    m = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return m, se


def rademacher_signs(rng, trials: int, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=(trials, n)) * 2.0 - 1.0


def rademacher_linear_exact(G, B_tilde: float, rng=None, trials: int = 10_000) -> tuple[float, float]:
    """Monte-Carlo Rademacher complexity of {x -> β·g(x) : ‖β‖₂ ≤ B~}.

    For each sign vector e the supremum is exactly B~‖Gᵀe‖₂, so the only error
    is the average over draws. Returns (estimate, standard error).
    """
    G = np.asarray(G, dtype=np.float64)
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = make_rng(0 if rng is None else rng)
    n = G.shape[0]
    e = rademacher_signs(rng, trials, n)
    vals = B_tilde / n * np.linalg.norm(e @ G, axis=1)
    return _mc_mean(vals)


def rademacher_mc_class(evaluate: Callable[[np.ndarray], np.ndarray], X, rng=None,
                        trials: int = 10_000) -> tuple[float, float]:
    """Monte-Carlo Rademacher complexity of a finite candidate set.

    ``evaluate(X)`` returns an (m, n) array: row f holds candidate f at the n
    inputs. The estimate lower-bounds the complexity of any class containing
    the candidates.
    """
    F = np.atleast_2d(np.asarray(evaluate(X), dtype=np.float64))
    if F.size == 0:
        raise ValueError("candidate set is empty")
    rng = make_rng(0 if rng is None else rng)
    n = F.shape[1]
    e = rademacher_signs(rng, trials, n)
    vals = np.max(e @ F.T, axis=1) / n
    return _mc_mean(vals)
