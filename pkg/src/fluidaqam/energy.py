"""Nonlinear rectenna model: harvested DC current, PAPR and the feasibility ceiling.

The diode output current for a received symbol stream ``h * x`` split with
factor ``rho`` (fraction ``rho`` to the decoder) is modelled as

    i_DC = k_o + k2*R_s*(1-rho)*|h|^2*E|x|^2
               + 3/4*k4*R_s^2*(1-rho)^2*|h|^4*E|x|^4*exp(-2*delta/3)

where ``delta`` (radians) is the half-width of the constellation's phase
range.  Currents are in model units; ``k_o`` defaults to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import gain_moments
from .constellation import Constellation

__all__ = [
    "EhParams",
    "moment2",
    "moment4",
    "papr",
    "harvested_current",
    "current_from_moments",
    "average_harvested_current",
    "max_fourth_moment",
    "max_fourth_moment_profile",
    "epsilon_max",
]


@dataclass(frozen=True)
class EhParams:
    k_o: float = 0.0
    k2: float = 0.0034
    k4: float = 0.3829
    r_s: float = 1.0
    rho: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        if not self.r_s > 0:
            raise ValueError(f"r_s must be positive, got {self.r_s}")
        if not (self.k2 > 0 and self.k4 > 0):
            raise ValueError("k2 and k4 must be positive")

    def with_rho(self, rho):
        return EhParams(self.k_o, self.k2, self.k4, self.r_s, rho)


def moment2(c: Constellation) -> float:
    return float(np.mean(c.magnitudes**2))


def moment4(c: Constellation) -> float:
    return float(np.mean(c.magnitudes**4))


def papr(c: Constellation) -> float:
    p = c.magnitudes**2
    mean = float(np.mean(p))
    if not mean > 0:
        raise ValueError("PAPR undefined for an all-zero constellation")
    return float(np.max(p)) / mean


def current_from_moments(m2, m4, delta, mu2, mu4, p: EhParams):
    """Closed-form average current given constellation and gain moments.

    Vectorizes over any of the arguments.
    """
    split = 1.0 - p.rho
    lin = p.k2 * p.r_s * split * mu2 * m2
    quart = 0.75 * p.k4 * p.r_s**2 * split**2 * mu4 * m4 * np.exp(-2.0 * np.asarray(delta) / 3.0)
    return p.k_o + lin + quart


def harvested_current(c: Constellation, h, p: EhParams) -> float:
    g2 = abs(complex(h)) ** 2
    return float(current_from_moments(moment2(c), moment4(c), c.phase_range, g2, g2 * g2, p))


def average_harvested_current(c: Constellation, selected_gains, p: EhParams, method="closed"):
    """Mean of the harvested current over a vector of channel gains.

    ``method="closed"`` plugs the sample moments of ``|h|^2`` and ``|h|^4``
    into the model; ``method="samples"`` evaluates the current per gain and
    averages.  The two agree up to rounding since the model is linear in
    those moments.
    """
    gains = np.asarray(selected_gains).ravel()
    if gains.size == 0:
        raise ValueError("empty gain vector")
    if method == "closed":
        mu2, mu4 = gain_moments(gains)
        return float(current_from_moments(moment2(c), moment4(c), c.phase_range, mu2, mu4, p))
    if method == "samples":
        g2 = np.abs(gains) ** 2
        per = current_from_moments(moment2(c), moment4(c), c.phase_range, g2, g2 * g2, p)
        return math.fsum(per) / gains.size
    raise ValueError(f"unknown method {method!r}")


def max_fourth_moment_profile(m: int, papr_max: float) -> np.ndarray:
    """Squared magnitudes maximizing ``E|x|^4`` at unit power and PAPR <= ``papr_max``.

    The maximum of a convex function over ``{0 <= a_k <= P, sum a_k = M}``
    sits on a vertex: as many points as possible at ``P``, one point with the
    remainder, the rest at the origin.  Sorted in descending order.
    """
    if papr_max < 1:
        raise ValueError("papr_max must be >= 1")
    cap = min(float(papr_max), float(m))
    full = min(int(math.floor(m / cap + 1e-12)), m)
    a = np.zeros(m)
    a[:full] = cap
    if full < m:
        a[full] = max(m - full * cap, 0.0)
    return a


def max_fourth_moment(m: int, papr_max: float) -> float:
    a = max_fourth_moment_profile(m, papr_max)
    return float(np.sum(a * a) / m)


def epsilon_max(p: EhParams, papr_max: float, mean_gain2: float, mean_gain4: float, m: int) -> float:
    """Largest achievable average current: ``delta = 0`` with the extreme magnitude profile."""
    return float(current_from_moments(1.0, max_fourth_moment(m, papr_max), 0.0, mean_gain2, mean_gain4, p))
