"""
Checking backprop against finite differences
============================================

The network computes exact gradients of ``sum(upstream * output)`` with a
recorded forward tape. Here we compare them with central differences on a
small random KAN, then show that the tape refuses to be reused once the
weights have moved.
"""

import numpy as np

from kanbound.network import ForwardTape, StaleTapeError, init_network, network_backward, network_forward, sgd_step
from kanbound.numeric import make_rng
from kanbound.spline import SplineSpec
from kanbound.verify import finite_difference_grads, gradient_relative_error

rng = make_rng(0)
net = init_network([3, 5, 4, 1], SplineSpec(degree=3, grid_count=5), seed=1)
for layer in net.layers:
    layer.W += 0.3 * rng.standard_normal(layer.W.shape)

X = rng.uniform(-1.2, 1.2, size=(6, 3))
upstream = rng.standard_normal((6, 1))

tape = ForwardTape()
network_forward(net, X, tape=tape)
grads = network_backward(net, tape, upstream)
numeric = finite_difference_grads(net, X, upstream, h=1e-5)
print("coefficients:", sum(g.size for g in grads))
print("max relative error:", gradient_relative_error(grads, numeric))

sgd_step(net, grads, lr=0.1)
try:
    network_backward(net, tape, upstream)
except StaleTapeError as exc:
    print("stale tape rejected:", exc)
