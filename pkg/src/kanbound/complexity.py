"""Norm-based complexity statistics of a trained KAN.

Per layer: the l1 coefficient norm B, the largest basis Lipschitz constant c,
and an upper bound rho on the layer's Lipschitz constant. Across layers these
combine into ``alpha_tilde``, the per-epoch measure
``(prod rho)^(2/3) * sum (B c)^(2/3)`` and ``R_KAN``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import KanLayer, KanNetwork, layer_forward
from .numeric import frobenius_norm, spectral_norm
from .spline import basis_lipschitz

COMPLEXITY_MODES = ("section3", "r_kan")


@dataclass(frozen=True)
class LayerStats:
    B: float          # sum of |W|
    c: float          # max_k a_k
    rho: float        # sigma_A * sqrt(sum_k a_k^2)
    sigma_A: float    # spectral norm of the flattened coefficient matrix
    sum_ak_sq: float
    C: float = 0.0    # ||Psi(0)||_2
    rho_coarse: float = 0.0  # sigma_A * c * sqrt(K)


@dataclass
class ComplexityReport:
    layer_stats: list[LayerStats]
    D: float
    alpha: list[float]
    alpha_tilde: float
    measure: float
    r_kan: float
    rho_prod: float = field(init=False)
    sum_BC23: float = field(init=False)

    def __post_init__(self):
        self.rho_prod = float(np.prod([s.rho for s in self.layer_stats]))
        self.sum_BC23 = float(sum((s.B * s.c) ** (2.0 / 3.0) for s in self.layer_stats))


def layer_stats(layer: KanLayer, lipschitz_mode: str = "grid") -> LayerStats:
    a = basis_lipschitz(layer.basis, lipschitz_mode)
    sum_ak_sq = float(np.sum(a * a))
    c = float(np.max(a))
    sigma = spectral_norm(layer.flat_matrix())
    C = frobenius_norm(layer_forward(layer, np.zeros(layer.d_in)))
    return LayerStats(
        B=float(np.sum(np.abs(layer.W))),
        c=c,
        rho=sigma * np.sqrt(sum_ak_sq),
        sigma_A=sigma,
        sum_ak_sq=sum_ak_sq,
        C=C,
        rho_coarse=sigma * c * np.sqrt(layer.basis.total_count),
    )


def alpha_tilde(stats: list[LayerStats], D: float, C: float | None = None) -> tuple[list[float], float]:
    """Per-layer terms alpha_i and their sum.

    alpha_i = (B_i c_i)^(2/3) (prod_{j>i} rho_j)^(2/3)
              * (C sum_{j=0}^{i-1} prod_{k=i-j+1}^{i} rho_k + D prod_{k<=i} rho_k)^(2/3)

    ``C`` defaults to ``max_l C_l`` from the stats.
    """
    if not stats:
        raise ValueError("need at least one layer")
    if C is None:
        C = max(s.C for s in stats)
    rho = [s.rho for s in stats]
    L = len(stats)

    def prod(lo, hi):  # rho_lo * ... * rho_hi, 1-based, empty product = 1
        return float(np.prod(rho[lo - 1:hi])) if lo <= hi else 1.0

    alpha = []
    for i in range(1, L + 1):
        s = stats[i - 1]
        offset_sum = sum(prod(i - j + 1, i) for j in range(i))
        inner = C * offset_sum + D * prod(1, i)
        alpha.append((s.B * s.c) ** (2 / 3) * prod(i + 1, L) ** (2 / 3) * inner ** (2 / 3))
    return alpha, float(sum(alpha))


def complexity_measure(stats: list[LayerStats], mode: str = "section3") -> float:
    if not stats:
        raise ValueError("need at least one layer")
    rho_prod = float(np.prod([s.rho for s in stats]))
    total = sum((s.B * s.c) ** (2 / 3) for s in stats)
    if mode == "section3":
        return rho_prod ** (2 / 3) * total
    if mode == "r_kan":
        return rho_prod * total ** 1.5
    raise ValueError(f"unknown complexity mode {mode!r}; expected one of {COMPLEXITY_MODES}")


def complexity_report(net: KanNetwork, D: float, lipschitz_mode: str = "grid") -> ComplexityReport:
    stats = [layer_stats(layer, lipschitz_mode) for layer in net.layers]
    alpha, at = alpha_tilde(stats, D)
    return ComplexityReport(
        layer_stats=stats, D=D, alpha=alpha, alpha_tilde=at,
        measure=complexity_measure(stats, "section3"),
        r_kan=complexity_measure(stats, "r_kan"),
    )


def normalize_series(v, u) -> np.ndarray:
    """Rescale ``v`` onto [0, u_N]: v'_i = (v_i - min v) u_N / (max v - min v).

    Raises ValueError when ``v`` is constant.
    """
    v = np.asarray(v, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if v.ndim != 1 or v.shape != u.shape or v.size == 0:
        raise ValueError("v and u must be nonempty 1-D sequences of equal length")
    vmin, vmax = v.min(), v.max()
    if not vmax > vmin:
        raise ValueError("cannot normalize a constant series")
    out = (v - vmin) * u[-1] / (vmax - vmin)
    # the maximizer maps to u_N exactly
    out[v == vmax] = u[-1]
    return out
