"""Verifying the hand-derived backward pass with finite differences.

Every analytic gradient is compared to a central difference of the loss
at h=1e-5. The network is checked with dropout disabled on a fixed batch
chosen away from ReLU/pooling kinks (a finite difference straddling a
kink says nothing about the gradient).

Run:  python demos/03_gradient_check.py         (~20 s)
"""

import time

import numpy as np

from noisenet.nn.gradcheck import gradient_check
from noisenet.nn.network import NetworkConfig, init_network

config = NetworkConfig(keep_prob=1.0)
net = init_network(config, seed=1)
rng = np.random.default_rng(1)
x = rng.normal(size=(4, 1, 37, 37))
durations = rng.normal(size=4)
labels = rng.integers(0, 2, size=4)

print("checking every parameter array of the default network "
      "(subsampling 200 coordinates for the large ones)...")
started = time.time()
report = gradient_check(net, x, durations, labels, tolerance=1e-4, seed=1)
print(report.summary())
print(f"\nmax relative error {report.max_rel_err:.3e} "
      f"(tolerance 1e-4), elapsed {time.time() - started:.0f}s")
print("note the conv biases: their true gradients are exactly zero because")
print("batch normalization removes any constant channel shift, and the")
print("comparison still resolves that agreement.")
