"""Dense linear algebra and random-number primitives.

Matrices are plain 2-D ``numpy.float64`` arrays. Randomness comes from
``numpy.random.Generator`` backed by PCG64; every stochastic routine in the
package takes such a generator (or a seed turned into one by :func:`make_rng`).
"""

from __future__ import annotations

import numpy as np

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000

# Sub-seed for the power-iteration start vector; fixed so norms are reproducible.
_POWER_ITER_SEED = 0x5EED_0001


class ConvergenceError(RuntimeError):
    """Power iteration did not reach the requested tolerance."""

    def __init__(self, message: str, last_estimate: float, last_vector: np.ndarray):
        super().__init__(message)
        self.last_estimate = last_estimate
        self.last_vector = last_vector


def make_rng(seed) -> np.random.Generator:
    """Return a PCG64 generator. Accepts an int, a SeedSequence or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def split_rng(seed: int, n: int) -> list[np.random.Generator]:
    """Independent child generators derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(s)) for s in children]


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {m.shape}")
    return m


def frobenius_norm(a) -> float:
    m = np.asarray(a, dtype=np.float64)
    return float(np.sqrt(np.sum(m * m)))


def _top_eig_2x2(g: np.ndarray) -> float:
    # largest eigenvalue of a symmetric PSD matrix of size 1 or 2
    if g.shape[0] == 1:
        return float(g[0, 0])
    a, b, d = g[0, 0], g[0, 1], g[1, 1]
    half_tr = 0.5 * (a + d)
    disc = np.hypot(0.5 * (a - d), b)
    return float(half_tr + disc)


def spectral_norm(a, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Largest singular value of ``a``.

    Runs power iteration on the smaller Gram matrix (``AᵀA`` or ``AAᵀ``, which
    share their top eigenvalue) from a fixed pseudo-random start vector. The
    loop stops once the eigen-residual ``‖Gv − λv‖`` drops below
    ``tol·max(1, λ)``. When the Gram matrix is at most 2×2 the closed form is
    used instead.

    Raises :class:`ConvergenceError` after ``max_iter`` iterations.
    """
    m = as_matrix(a)
    if m.size == 0:
        raise ValueError("spectral_norm of an empty matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not np.any(m):
        return 0.0
    g = m.T @ m if m.shape[1] <= m.shape[0] else m @ m.T
    if g.shape[0] <= 2:
        return float(np.sqrt(max(_top_eig_2x2(g), 0.0)))

    v = np.random.Generator(np.random.PCG64(_POWER_ITER_SEED)).standard_normal(g.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = g @ v
        lam = float(v @ w)
        resid = np.linalg.norm(w - lam * v)
        if resid <= tol * max(1.0, lam):
            return float(np.sqrt(max(lam, 0.0)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector fell in the null space; the matrix is nonzero so retry
            v = np.roll(v, 1) + 1.0
            v /= np.linalg.norm(v)
            continue
        v = w / nw
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(residual {resid:.3e}, estimate {np.sqrt(max(lam, 0.0)):.12g})",
        float(np.sqrt(max(lam, 0.0))),
        v,
    )


def sample_standard_normal(rng, n: int) -> np.ndarray:
    """``n`` iid N(0, 1) draws by the Box–Muller transform.

    Consumes ``ceil(n/2)`` pairs of uniforms ``(u1, u2)`` from ``rng.random``
    with ``u1`` mapped to ``(0, 1]``; each pair yields
    ``r·cos(2πu2)`` then ``r·sin(2πu2)`` with ``r = sqrt(-2 log u1)``.
    The stream is therefore fixed by the PCG64 seed alone.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = make_rng(rng)
    if n == 0:
        return np.empty(0)
    pairs = (n + 1) // 2
    u = rng.random((pairs, 2))
    u1 = 1.0 - u[:, 0]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u[:, 1]
    z = np.empty((pairs, 2))
    z[:, 0] = r * np.cos(theta)
    z[:, 1] = r * np.sin(theta)
    return z.reshape(-1)[:n]
