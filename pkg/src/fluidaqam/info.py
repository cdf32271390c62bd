"""Discrete-input mutual information, its closed-form bound, and ML detection.

Information branch model: ``y = sqrt(rho) * h * x + eta`` with
``eta ~ CN(0, N0)``.  For each transmitted point ``x_k`` the estimator
averages

    log2 sum_i exp(-(|sqrt(rho)*h*(x_k - x_i) + eta|^2 - |eta|^2) / (2*N0))

over noise draws and subtracts the mean from ``log2 M``.  The
``convention="literal"`` switch divides by ``2*rho*N0`` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constellation import Constellation

__all__ = [
    "SnrSpec",
    "MiEstimate",
    "dimi_estimate",
    "dimi_given_channel",
    "dimi_given_channel_quadrature",
    "dimi_lower_bound",
    "average_dimi",
    "ml_detect",
    "ml_detect_many",
    "ssr",
]

_LN2 = math.log(2.0)
# Max number of float64 exponent entries materialized at once.
_CHUNK_ELEMS = 1 << 21


@dataclass(frozen=True)
class SnrSpec:
    """Design SNR ``gamma_d = rho / (2 * N0)``, stored in dB.

    ``rho`` is the power-splitting factor the design SNR refers to; the
    noise power is ``N0 = rho / (2 * gamma_d)``.
    """

    design_snr_db: float
    rho: float = 0.5

    def __post_init__(self):
        if not math.isfinite(self.design_snr_db):
            raise ValueError("design_snr_db must be finite")
        if not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0, 1] to define a noise power")

    @property
    def linear(self) -> float:
        return 10.0 ** (self.design_snr_db / 10.0)

    @property
    def noise_power(self) -> float:
        return self.rho / (2.0 * self.linear)

    @classmethod
    def from_noise_power(cls, n0, rho=0.5):
        return cls(10.0 * math.log10(rho / (2.0 * n0)), rho)


@dataclass(frozen=True)
class MiEstimate:
    value: float
    std_error: float
    n_channel: int
    n_noise: int


def _log2_mean_exp(e, axis):
    """``log2(mean(exp(e)))`` along ``axis`` with the max exponent factored out."""
    top = np.max(e, axis=axis, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    s = np.log2(np.mean(np.exp(e - top), axis=axis))
    return s + np.squeeze(top, axis=axis) / _LN2


def _denominator(n0, rho, convention):
    if convention == "standard":
        return 2.0 * n0
    if convention == "literal":
        if rho <= 0:
            raise ValueError("literal convention needs rho > 0")
        return 2.0 * rho * n0
    raise ValueError(f"unknown convention {convention!r}")


def _noise(rng, n_noise, m, n0):
    z = rng.standard_normal((n_noise, m, 2))
    return z[..., 0] * math.sqrt(n0 / 2) + 1j * z[..., 1] * math.sqrt(n0 / 2)


def _per_draw(points, gains, eta, rho, n0, convention):
    """Per-(channel, draw) values of ``-mean_k log2 mean_i exp(.)``.

    ``gains`` has shape (B,), ``eta`` (B, J, M).  Returns (B, J).
    """
    denom = _denominator(n0, rho, convention)
    diff = points[:, None] - points[None, :]  # (k, i)
    s = math.sqrt(rho) * gains[:, None, None] * diff[None]  # (B, k, i)
    s2 = (s.real**2 + s.imag**2)[:, None]  # (B, 1, k, i)
    e = np.multiply(s.real[:, None], eta.real[..., None])  # (B, J, k, i)
    tmp = np.multiply(s.imag[:, None], eta.imag[..., None])
    e += tmp
    e *= 2.0
    e += s2
    e *= -1.0 / denom
    top = e.max(axis=-1, keepdims=True)
    e -= top
    np.exp(e, out=e)
    lme = np.log2(e.mean(axis=-1)) + top[..., 0] / _LN2
    return -lme.mean(axis=-1)


def dimi_estimate(c: Constellation, h, snr: SnrSpec, rho: float, n_noise: int = 256,
                  seed: int = 0, convention: str = "standard") -> MiEstimate:
    """Monte-Carlo DIMI for one channel coefficient, with its standard error."""
    if n_noise < 1:
        raise ValueError("n_noise must be >= 1")
    n0 = snr.noise_power
    eta = _noise(np.random.default_rng(seed), n_noise, c.order, n0)
    vals = _per_draw(c.points, np.array([complex(h)]), eta[None], rho, n0, convention)[0]
    se = float(np.std(vals, ddof=1) / math.sqrt(n_noise)) if n_noise > 1 else float("nan")
    return MiEstimate(math.fsum(vals) / n_noise, se, 1, n_noise)


def dimi_given_channel(c: Constellation, h, snr: SnrSpec, rho: float, n_noise: int = 256,
                       seed: int = 0, convention: str = "standard") -> float:
    return dimi_estimate(c, h, snr, rho, n_noise, seed, convention).value


def dimi_given_channel_quadrature(c: Constellation, h, snr: SnrSpec, rho: float, order: int = 16,
                                  convention: str = "standard") -> float:
    """Same quantity as :func:`dimi_given_channel`, with the noise expectation
    taken by tensor Gauss-Hermite quadrature (``order`` nodes per real axis)."""
    n0 = snr.noise_power
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / math.sqrt(2.0 * math.pi)
    u, v = np.meshgrid(nodes, nodes, indexing="ij")
    w = np.outer(weights, weights).ravel()
    eta = (u.ravel() + 1j * v.ravel()) * math.sqrt(n0 / 2)
    eta = np.repeat(eta[:, None], c.order, axis=1)
    vals = _per_draw(c.points, np.array([complex(h)]), eta[None], rho, n0, convention)[0]
    return float(np.dot(w, vals))


def dimi_lower_bound(c: Constellation, mean_gain2: float, snr: SnrSpec, rho: float) -> float:
    """Closed-form surrogate ``m - mean_k log2 sum_i exp(-rho*g2*|x_k - x_i|^2 / (2*N0))``."""
    n0 = snr.noise_power
    return lower_bound_from_points(c.points, rho * mean_gain2 / (2.0 * n0))


def lower_bound_from_points(points, scale) -> float:
    """Bound value for raw points with exponent scale ``rho*g2/(2*N0)``."""
    points = np.asarray(points, dtype=complex)
    diff = points[:, None] - points[None, :]
    d2 = diff.real**2 + diff.imag**2
    if np.isinf(scale):
        e = np.where(d2 > 0, -np.inf, 0.0)
    else:
        e = -scale * d2
    return float(-np.mean(_log2_mean_exp(e, axis=1)))


def average_dimi(c: Constellation, selected_gains, snr: SnrSpec, rho: float, n_noise: int = 256,
                 seed: int = 0, convention: str = "standard") -> MiEstimate:
    """DIMI averaged over channel realizations.

    Noise for realization ``l`` comes from a generator keyed on
    ``(seed, l)``, so two constellations evaluated with the same seed see
    the same noise draws.
    """
    gains = np.asarray(selected_gains, dtype=complex).ravel()
    if gains.size == 0:
        raise ValueError("empty gain vector")
    if n_noise < 1:
        raise ValueError("n_noise must be >= 1")
    m = c.order
    n0 = snr.noise_power
    points = c.points
    per_channel = np.empty(gains.size)
    draws = None
    batch = max(1, _CHUNK_ELEMS // (n_noise * m * m))
    for start in range(0, gains.size, batch):
        idx = range(start, min(start + batch, gains.size))
        eta = np.stack([_noise(np.random.default_rng([seed, l]), n_noise, m, n0) for l in idx])
        vals = _per_draw(points, gains[start:idx.stop], eta, rho, n0, convention)
        per_channel[start:idx.stop] = np.mean(vals, axis=1)
        if gains.size == 1:
            draws = vals[0]
    n = gains.size
    mean = math.fsum(per_channel) / n
    if n > 1:
        se = math.sqrt(math.fsum((per_channel - mean) ** 2) / (n - 1) / n)
    elif n_noise > 1:
        se = float(np.std(draws, ddof=1) / math.sqrt(n_noise))
    else:
        se = float("nan")
    return MiEstimate(mean, se, n, n_noise)


def ml_detect(y, c: Constellation, effective_gain) -> int:
    """Index of the nearest scaled point ``effective_gain * x_k``; ties go to the lowest index."""
    d = np.abs(complex(y) - complex(effective_gain) * c.points) ** 2
    return int(np.argmin(d))


def ml_detect_many(y, points, effective_gain):
    """Vectorized :func:`ml_detect` over matching arrays ``y`` and ``effective_gain``."""
    y = np.asarray(y)
    g = np.broadcast_to(np.asarray(effective_gain), y.shape)
    d = np.abs(y[..., None] - g[..., None] * np.asarray(points)) ** 2
    return np.argmin(d, axis=-1)


def ssr(c: Constellation, selected_gains, rho: float, n0: float, n_symbols_per_gain: int = 100,
        seed: int = 0, return_counts: bool = False):
    """Symbol success rate of ML detection on ``y = sqrt(rho)*h*x_k + eta``.

    Symbols are uniform over the constellation; realization ``l`` draws its
    symbols and noise from a generator keyed on ``(seed, l)``.  With
    ``return_counts`` the pair ``(successes, trials)`` is returned instead.
    """
    gains = np.asarray(selected_gains, dtype=complex).ravel()
    if gains.size == 0:
        raise ValueError("empty gain vector")
    points = c.points
    m = c.order
    hits = 0
    batch = max(1, _CHUNK_ELEMS // (n_symbols_per_gain * m))
    for start in range(0, gains.size, batch):
        stop = min(start + batch, gains.size)
        ks, etas = [], []
        for l in range(start, stop):
            rng = np.random.default_rng([seed, l])
            ks.append(rng.integers(m, size=n_symbols_per_gain))
            etas.append(_noise(rng, n_symbols_per_gain, 1, n0)[:, 0])
        k = np.stack(ks)
        g = math.sqrt(rho) * gains[start:stop, None]
        y = g * points[k] + np.stack(etas)
        hits += int(np.count_nonzero(ml_detect_many(y, points, g) == k))
    total = gains.size * n_symbols_per_gain
    if return_counts:
        return hits, total
    return hits / total

