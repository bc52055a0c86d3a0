"""KAN layers and networks with analytic backpropagation.

Each edge j -> i of a layer carries the activation
``psi_ij(x) = sum_k W[i, j, k] * (g_k(x) - g_k(0))`` over a shared
:class:`~kanbound.spline.EdgeBasis`. Subtracting ``g_k(0)`` makes every layer
map 0 to 0 exactly.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numeric import make_rng, sample_standard_normal
from .spline import EdgeBasis, SplineSpec, basis_derivative, basis_eval

SPLINE_INIT_SCALE = 0.1


class StaleTapeError(RuntimeError):
    """The tape was recorded for a different network or parameter version."""


@dataclass
class KanLayer:
    W: np.ndarray  # (d_out, d_in, total_count)
    basis: EdgeBasis = field(default_factory=EdgeBasis)

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        if self.W.ndim != 3 or self.W.shape[2] != self.basis.total_count:
            raise ValueError(
                f"coefficient tensor must be (d_out, d_in, {self.basis.total_count}), "
                f"got {self.W.shape}"
            )

    @property
    def d_in(self) -> int:
        return self.W.shape[1]

    @property
    def d_out(self) -> int:
        return self.W.shape[0]

    def flat_matrix(self) -> np.ndarray:
        """The d_out × (d_in·K) matrix whose column (j·K + k) holds W[:, j, k]."""
        return self.W.reshape(self.d_out, -1)


@dataclass
class LayerCache:
    x: np.ndarray        # (n, d_in) layer input
    phi: np.ndarray      # (n, d_in, K) centered basis values, mask applied
    dphi: np.ndarray     # (n, d_in, K) basis derivatives, mask applied
    mask: np.ndarray | None


@dataclass
class ForwardTape:
    caches: list[LayerCache] = field(default_factory=list)
    net_id: int | None = None
    version: int | None = None


class KanNetwork:
    def __init__(self, layers: list[KanLayer]):
        if not layers:
            raise ValueError("a network needs at least one layer")
        for l, (a, b) in enumerate(zip(layers[:-1], layers[1:])):
            if a.d_out != b.d_in:
                raise ValueError(f"layer {l} outputs {a.d_out} values but layer {l + 1} expects {b.d_in}")
        self.layers = layers
        self.version = 0

    @property
    def shape(self) -> list[int]:
        return [self.layers[0].d_in] + [layer.d_out for layer in self.layers]

    @property
    def depth(self) -> int:
        return len(self.layers)

    def copy(self) -> "KanNetwork":
        return copy.deepcopy(self)

    def __call__(self, X):
        return network_forward(self, X)


def _dropout_mask(shape, rate: float, rng) -> np.ndarray:
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def layer_forward(layer: KanLayer, x, dropout_rate: float = 0.0, rng=None,
                  tape: list | None = None) -> np.ndarray:
    """Evaluate one layer on a vector (d_in,) or a batch (n, d_in).

    With ``dropout_rate > 0`` every (sample, input, basis) activation is kept
    with probability 1 − rate and rescaled by 1/(1 − rate).
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != layer.d_in:
        raise ValueError(f"layer expects inputs of width {layer.d_in}, got shape {x.shape}")
    if not 0.0 <= dropout_rate < 1.0:
        raise ValueError("dropout_rate must lie in [0, 1)")
    if dropout_rate > 0.0 and rng is None:
        raise ValueError("dropout needs an rng")

    g0 = basis_eval(layer.basis, 0.0)
    phi = basis_eval(layer.basis, X) - g0
    mask = None
    if dropout_rate > 0.0:
        mask = _dropout_mask(phi.shape, dropout_rate, rng)
        phi = phi * mask
    out = np.einsum("njk,ijk->ni", phi, layer.W)
    if tape is not None:
        dphi = basis_derivative(layer.basis, X)
        if mask is not None:
            dphi = dphi * mask
        tape.append(LayerCache(X, phi, dphi, mask))
    return out[0] if single else out


def network_forward(net: KanNetwork, X, mode: str = "eval", dropout_rate: float = 0.0,
                    rng=None, tape: ForwardTape | None = None) -> np.ndarray:
    """Row-wise composition of the layers. Dropout is active only in ``train`` mode."""
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    h = np.asarray(X, dtype=np.float64)
    if h.ndim != 2 or h.shape[1] != net.shape[0]:
        raise ValueError(f"network expects inputs of width {net.shape[0]}, got shape {h.shape}")
    rate = dropout_rate if mode == "train" else 0.0
    if rate > 0.0:
        rng = make_rng(rng) if rng is not None else None
    caches = None
    if tape is not None:
        tape.caches.clear()
        tape.net_id = id(net)
        tape.version = net.version
        caches = tape.caches
    for layer in net.layers:
        h = layer_forward(layer, h, rate, rng, caches)
    return h


def network_backward(net: KanNetwork, tape: ForwardTape, dL_dout) -> list[np.ndarray]:
    """Gradients of ``sum(dL_dout * output)`` with respect to every layer's ``W``."""
    if tape.net_id != id(net) or tape.version != net.version or len(tape.caches) != net.depth:
        raise StaleTapeError("tape does not match the current network parameters")
    delta = np.asarray(dL_dout, dtype=np.float64)
    n = tape.caches[0].x.shape[0]
    if delta.shape != (n, net.shape[-1]):
        raise ValueError(f"upstream gradient must have shape {(n, net.shape[-1])}, got {delta.shape}")
    grads: list[np.ndarray] = [None] * net.depth  # type: ignore[list-item]
    for l in range(net.depth - 1, -1, -1):
        layer, cache = net.layers[l], tape.caches[l]
        grads[l] = np.einsum("ni,njk->ijk", delta, cache.phi)
        if l > 0:
            delta = np.einsum("ni,ijk,njk->nj", delta, layer.W, cache.dphi)
    return grads


def sgd_step(net: KanNetwork, grads: list[np.ndarray], lr: float, momentum: float = 0.0,
             velocity: list[np.ndarray] | None = None) -> list[np.ndarray]:
    """In-place update ``v <- momentum*v + g; W <- W - lr*v``. Returns the new velocity."""
    if lr < 0:
        raise ValueError("lr must be nonnegative")
    if not 0.0 <= momentum < 1.0:
        raise ValueError("momentum must lie in [0, 1)")
    if velocity is None:
        velocity = [np.zeros_like(layer.W) for layer in net.layers]
    new_v = []
    for layer, g, v in zip(net.layers, grads, velocity):
        v = momentum * v + g
        layer.W = layer.W - lr * v
        new_v.append(v)
    net.version += 1
    return new_v


def init_network(shape, spline: SplineSpec | None = None, seed: int = 0,
                 includes_silu: bool = True) -> KanNetwork:
    """SiLU coefficients 1/d_in, spline coefficients iid N(0, 0.1²/total_count)."""
    shape = [int(s) for s in shape]
    if len(shape) < 2 or min(shape) < 1:
        raise ValueError(f"invalid network shape {shape}")
    basis = EdgeBasis(spline or SplineSpec(), includes_silu)
    rng = make_rng(seed)
    K = basis.total_count
    sd = SPLINE_INIT_SCALE / np.sqrt(K)
    layers = []
    for d_in, d_out in zip(shape[:-1], shape[1:]):
        W = np.empty((d_out, d_in, K))
        n_spline = d_out * d_in * basis.spec.basis_count
        W[:, :, basis.offset:] = sd * sample_standard_normal(rng, n_spline).reshape(
            d_out, d_in, basis.spec.basis_count)
        if includes_silu:
            W[:, :, 0] = 1.0 / d_in
        layers.append(KanLayer(W, basis))
    return KanNetwork(layers)


def _basis_to_dict(basis: EdgeBasis) -> dict:
    s = basis.spec
    return {"degree": s.degree, "grid_min": s.grid_min, "grid_max": s.grid_max,
            "grid_count": s.grid_count, "includes_silu": basis.includes_silu}


def _basis_from_dict(d: dict) -> EdgeBasis:
    spec = SplineSpec(int(d["degree"]), float(d["grid_min"]), float(d["grid_max"]),
                      int(d["grid_count"]))
    return EdgeBasis(spec, bool(d["includes_silu"]))


def save_checkpoint(net: KanNetwork, path, seed: int | None = None, epoch: int | None = None) -> None:
    """Write ``{shape, basis, coefficients, seed, epoch}`` as JSON.

    ``basis`` holds one config per layer; ``coefficients`` holds each layer's
    W flattened in C order. Floats are written with shortest round-trip repr,
    so :func:`load_checkpoint` restores them bit-exactly.
    """
    doc = {
        "shape": net.shape,
        "basis": [_basis_to_dict(layer.basis) for layer in net.layers],
        "coefficients": [layer.W.reshape(-1).tolist() for layer in net.layers],
        "seed": seed,
        "epoch": epoch,
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path) -> tuple[KanNetwork, dict]:
    doc = json.loads(Path(path).read_text())
    shape = doc["shape"]
    layers = []
    for l, (bd, flat) in enumerate(zip(doc["basis"], doc["coefficients"])):
        basis = _basis_from_dict(bd)
        W = np.asarray(flat, dtype=np.float64).reshape(shape[l + 1], shape[l], basis.total_count)
        layers.append(KanLayer(W, basis))
    return KanNetwork(layers), {"seed": doc.get("seed"), "epoch": doc.get("epoch")}
