"""B-spline bases on uniform extended grids, SiLU, and per-basis Lipschitz bounds."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import expit

LIPSCHITZ_MODES = ("analytic", "grid")
MIN_GRID_POINTS = 4096


@dataclass(frozen=True)
class SplineSpec:
    """Degree-``degree`` B-splines on ``grid_count`` uniform intervals of [grid_min, grid_max].

    The knot vector extends the grid by ``degree`` knots of the same spacing on
    each side, so there are ``grid_count + 2*degree + 1`` knots and
    ``grid_count + degree`` basis functions.
    """

    degree: int = 3
    grid_min: float = -1.0
    grid_max: float = 1.0
    grid_count: int = 5

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        if self.grid_count < 1:
            raise ValueError("grid_count must be positive")
        if not self.grid_min < self.grid_max:
            raise ValueError("grid_min must be smaller than grid_max")

    @property
    def spacing(self) -> float:
        return (self.grid_max - self.grid_min) / self.grid_count

    @cached_property
    def knots(self) -> np.ndarray:
        p = self.degree
        idx = np.arange(-p, self.grid_count + p + 1)
        t = self.grid_min + idx * self.spacing
        # pin the grid ends so clamped inputs land exactly on a knot
        t[p] = self.grid_min
        t[p + self.grid_count] = self.grid_max
        return t

    @property
    def basis_count(self) -> int:
        return self.grid_count + self.degree


@dataclass(frozen=True)
class EdgeBasis:
    """Basis shared by every edge of a layer: optional SiLU followed by the splines."""

    spec: SplineSpec = SplineSpec()
    includes_silu: bool = True

    @property
    def total_count(self) -> int:
        return self.spec.basis_count + int(self.includes_silu)

    @property
    def offset(self) -> int:
        return int(self.includes_silu)


def silu(x):
    x = np.asarray(x, dtype=np.float64)
    return x * expit(x)


def silu_derivative(x):
    x = np.asarray(x, dtype=np.float64)
    s = expit(x)
    return s * (1.0 + x * (1.0 - s))


@lru_cache(maxsize=None)
def silu_lipschitz() -> float:
    """sup |silu'(x)|, attained near x ≈ 2.4."""
    res = minimize_scalar(lambda t: -float(silu_derivative(t)), bounds=(0.0, 6.0),
                          method="bounded", options={"xatol": 1e-12})
    return float(-res.fun)


def _span_index(spec: SplineSpec, x: np.ndarray) -> np.ndarray:
    # interval [t_i, t_{i+1}) containing x, restricted to the grid intervals
    p, g = spec.degree, spec.grid_count
    i = np.searchsorted(spec.knots, x, side="right") - 1
    return np.clip(i, p, p + g - 1)


def _local_basis(knots: np.ndarray, span: np.ndarray, x: np.ndarray, degree: int) -> np.ndarray:
    """Nonzero degree-``degree`` basis values at ``x``: shape (n, degree+1).

    Column r holds B_{span-degree+r}. Triangular de Boor scheme.
    """
    n = x.shape[0]
    out = np.zeros((n, degree + 1))
    out[:, 0] = 1.0
    left = np.zeros((n, degree + 1))
    right = np.zeros((n, degree + 1))
    for j in range(1, degree + 1):
        left[:, j] = x - knots[span + 1 - j]
        right[:, j] = knots[span + j] - x
        saved = np.zeros(n)
        for r in range(j):
            temp = out[:, r] / (right[:, r + 1] + left[:, j - r])
            out[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        out[:, j] = saved
    return out


def spline_values(spec: SplineSpec, x) -> np.ndarray:
    """B-spline values at clamp(x); shape ``x.shape + (basis_count,)``."""
    x = np.asarray(x, dtype=np.float64)
    flat = np.clip(x.reshape(-1), spec.grid_min, spec.grid_max)
    span = _span_index(spec, flat)
    local = _local_basis(spec.knots, span, flat, spec.degree)
    out = np.zeros((flat.shape[0], spec.basis_count))
    rows = np.arange(flat.shape[0])
    first = span - spec.degree
    for r in range(spec.degree + 1):
        out[rows, first + r] = local[:, r]
    return out.reshape(x.shape + (spec.basis_count,))


def spline_derivatives(spec: SplineSpec, x) -> np.ndarray:
    """d/dx of the clamped B-splines; zero outside [grid_min, grid_max].

    Uses B'_{k,p} = p(B_{k,p-1}/(t_{k+p}-t_k) - B_{k+1,p-1}/(t_{k+p+1}-t_{k+1})).
    """
    x = np.asarray(x, dtype=np.float64)
    flat = x.reshape(-1)
    p = spec.degree
    out = np.zeros((flat.shape[0], spec.basis_count))
    if p == 0:
        return out.reshape(x.shape + (spec.basis_count,))
    inside = (flat >= spec.grid_min) & (flat <= spec.grid_max)
    xi = flat[inside]
    t = spec.knots
    span = _span_index(spec, xi)
    low = _local_basis(t, span, xi, p - 1)  # B_{span-p+1 .. span, p-1}
    rows = np.nonzero(inside)[0]
    # basis k = span - p + r, r = 0..p
    for r in range(p + 1):
        k = span - p + r
        val = np.zeros(xi.shape[0])
        if r >= 1:  # B_{k,p-1} is low[:, r-1]
            val += p * low[:, r - 1] / (t[k + p] - t[k])
        if r <= p - 1:  # B_{k+1,p-1} is low[:, r]
            val -= p * low[:, r] / (t[k + p + 1] - t[k + 1])
        out[rows, k] = val
    return out.reshape(x.shape + (spec.basis_count,))


def basis_eval(basis: EdgeBasis, x) -> np.ndarray:
    """Edge basis at ``x``: SiLU (unclamped) first if included, then the splines."""
    x = np.asarray(x, dtype=np.float64)
    sp = spline_values(basis.spec, x)
    if not basis.includes_silu:
        return sp
    return np.concatenate([silu(x)[..., None], sp], axis=-1)


def basis_derivative(basis: EdgeBasis, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    sp = spline_derivatives(basis.spec, x)
    if not basis.includes_silu:
        return sp
    return np.concatenate([silu_derivative(x)[..., None], sp], axis=-1)


def _lipschitz_grid(spec: SplineSpec) -> np.ndarray:
    # G*m + 1 points with 6 | m: knots, halves and thirds of every interval are hit
    m = -(-MIN_GRID_POINTS // spec.grid_count)
    m = 6 * -(-m // 6)
    return np.linspace(spec.grid_min, spec.grid_max, spec.grid_count * m + 1)


def _grid_sup_derivative(spec: SplineSpec) -> np.ndarray:
    xs = _lipschitz_grid(spec)
    d = np.abs(spline_derivatives(spec, xs))
    best = np.max(d, axis=0)
    h = xs[1] - xs[0]
    for k in range(spec.basis_count):
        i = int(np.argmax(d[:, k]))
        lo, hi = max(xs[i] - h, spec.grid_min), min(xs[i] + h, spec.grid_max)
        if best[k] == 0.0 or hi <= lo:
            continue
        res = minimize_scalar(lambda t: -abs(spline_derivatives(spec, t)[k]),
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
        best[k] = max(best[k], -float(res.fun))
    return best


def basis_lipschitz(basis: EdgeBasis, mode: str = "grid") -> np.ndarray:
    """Per-basis Lipschitz constants ``a_k`` (SiLU first when present).

    ``analytic`` applies the bound 2p/Δ with Δ = max_j(t_{j+p} − t_j) = p·spacing,
    i.e. 2/spacing for every spline. ``grid`` takes the largest |derivative|
    over a grid of at least 4096 points that contains every knot, interval
    midpoint and third-point of [grid_min, grid_max], polished by a bounded
    local maximization around the best grid point.
    """
    return _basis_lipschitz(basis, mode).copy()


@lru_cache(maxsize=256)
def _basis_lipschitz(basis: EdgeBasis, mode: str) -> np.ndarray:
    spec = basis.spec
    if mode == "analytic":
        width = spec.degree * spec.spacing
        if width <= 0.0:
            raise ValueError("analytic Lipschitz bound undefined for degree 0 (Δ = 0)")
        spline_a = np.full(spec.basis_count, 2.0 * spec.degree / width)
    elif mode == "grid":
        spline_a = _grid_sup_derivative(spec)
    else:
        raise ValueError(f"unknown Lipschitz mode {mode!r}; expected one of {LIPSCHITZ_MODES}")
    if basis.includes_silu:
        return np.concatenate([[silu_lipschitz()], spline_a])
    return spline_a
