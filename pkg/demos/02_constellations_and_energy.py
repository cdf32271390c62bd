"""Constellation geometry and the nonlinear harvester.

Two knobs move the harvested current: the fourth moment of the magnitudes
(peaky constellations) and the phase range (bunched phases).

Run: python demos/02_constellations_and_energy.py
"""
import numpy as np

from fluidaqam import (Constellation, EhParams, epsilon_max, harvested_current, make_apsk,
                       make_square_qam, moment4, normalize, papr, validate)

p = EhParams()  # k2 = 0.0034, k4 = 0.3829, R_s = 1, rho = 0.5, k_o = 0

qam = make_square_qam(16)
print(f"16-QAM: PAPR {papr(qam):.2f}, E|x|^4 {moment4(qam):.2f}, phase range {qam.phase_range:.2f} rad")

for delta in (np.pi / 2, 0.3, 0.0):
    ring = make_apsk(16, delta)
    print(f"APSK delta={delta:.2f}: i_DC at h=1 is {harvested_current(ring, 1.0, p):.5f}")

# One loud point and fifteen quiet ones: same unit power, much more current.
peaky = normalize(Constellation([3.5] + [0.6] * 15, np.linspace(-0.3, 0.3, 16), 0.3))
print(f"peaky: PAPR {papr(peaky):.2f}, i_DC {harvested_current(peaky, 1.0, p):.5f}")
print("violations at PAPR cap 8:", [v["code"] for v in validate(peaky, 8.0)])

# The largest achievable average current, for unit-mean Rayleigh gains.
print(f"epsilon_max (PAPR 15, E|h|^2=1, E|h|^4=2): {epsilon_max(p, 15, 1.0, 2.0, 16):.4f}")
