"""Correlated fluid-antenna channels and what port selection buys.

Run: python demos/01_channel_and_ports.py
"""
import math

import numpy as np

from fluidaqam import (CorrelationSpec, PortStrategy, build_correlation_matrix, gain_moments,
                       sample_ensemble, select_ports)

# 100 ports squeezed into half a wavelength: neighbours are almost identical.
spec = CorrelationSpec(n_ports=100, width=0.5)
corr = build_correlation_matrix(spec)
print(f"correlation of ports 1 and 2: {corr[0, 1]:.6f}")
print(f"correlation of ports 1 and 100: {corr[0, -1]:.4f}")

ens = sample_ensemble(spec, n_realizations=20_000, seed=1)
h1, h2 = ens.gains[:, 0], ens.gains[:, 1]
emp = np.abs(np.vdot(h2, h1)) / np.sqrt(np.vdot(h1, h1).real * np.vdot(h2, h2).real)
print(f"empirical ports 1-2 correlation: {emp:.4f}")

# Even so, picking the strongest port every block raises the average gain.
for strategy in (PortStrategy.best(), PortStrategy.fixed(1), PortStrategy.random()):
    mu2, mu4 = gain_moments(select_ports(ens, strategy, seed=1))
    print(f"{strategy.label:>7}: E|h|^2 = {mu2:.3f}   E|h|^4 = {mu4:.3f}")

# Shrinking the aperture to zero collapses every strategy onto one port.
flat = sample_ensemble(CorrelationSpec(100, 0.0), 1000, 1)
spread = max(gain_moments(select_ports(flat, s, 1))[0] for s in (PortStrategy.best(), PortStrategy.random())) \
    - gain_moments(select_ports(flat, PortStrategy.fixed(1)))[0]
print(f"W = 0 spread between strategies: {spread:.1e}")
assert math.isclose(spread, 0.0, abs_tol=1e-12)
