"""Epsilon-constraint design of asymmetric QAM constellations.

For a harvested-current threshold ``epsilon`` the solver maximizes the
closed-form information surrogate (:func:`fluidaqam.info.dimi_lower_bound`)
over phase range ``delta``, magnitudes ``r`` and phases ``theta`` subject to

* ``0 <= delta <= pi/2`` and ``-delta <= theta_k <= delta``,
* ``max theta = delta`` and ``min theta = -delta``,
* unit mean power and ``PAPR <= papr_max``,
* average closed-form current ``>= epsilon``.

Parameterization: ``theta_k = delta * u_k`` with ``u_1 = +1`` and
``u_2 = -1`` pinned, so the phase-range equalities hold exactly; raw
magnitudes ``s`` are mapped to ``r = s / rms(s)``, which makes the unit
power constraint structural.  What remains (PAPR per point, current) is
handled by an augmented Lagrangian around L-BFGS-B on the box bounds.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .constellation import Constellation, ConstellationRecord, make_apsk, validate
from .energy import EhParams, average_harvested_current, epsilon_max, max_fourth_moment_profile, papr
from .info import MiEstimate, SnrSpec, average_dimi, dimi_lower_bound

__all__ = [
    "SolveConfig",
    "SolveResult",
    "FrontPoint",
    "ParetoFront",
    "InfeasibleError",
    "solve_p2",
    "pareto_sweep",
    "solve_sweep",
    "feasible_init",
    "config_hash",
]

log = logging.getLogger(__name__)

_LN2 = math.log(2.0)


class InfeasibleError(ValueError):
    """``epsilon`` exceeds the largest achievable average current."""

    def __init__(self, epsilon, ceiling):
        super().__init__(f"epsilon={epsilon!r} exceeds epsilon_max={ceiling!r}")
        self.epsilon = epsilon
        self.ceiling = ceiling


@dataclass(frozen=True)
class SolveConfig:
    epsilon: float = 0.0
    papr_max: float = 15.0
    rho: float = 0.5
    design_snr_db: float = 17.0
    mean_gain2: float = 1.0
    mean_gain4: float = 2.0
    modulation_order: int = 16
    n_starts: int = 20
    max_iters: int = 500
    tol_obj: float = 1e-8
    tol_constraint: float = 1e-8
    seed: int = 0
    k_o: float = 0.0
    k2: float = 0.0034
    k4: float = 0.3829
    r_s: float = 1.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.papr_max < 1:
            raise ValueError("papr_max must be >= 1")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        m = self.modulation_order
        if m < 2 or m & (m - 1):
            raise ValueError(f"modulation_order must be a power of two >= 2, got {m}")

    @property
    def eh(self) -> EhParams:
        return EhParams(self.k_o, self.k2, self.k4, self.r_s, self.rho)

    @property
    def snr(self) -> SnrSpec:
        return SnrSpec(self.design_snr_db, self.rho)

    @property
    def ceiling(self) -> float:
        return epsilon_max(self.eh, self.papr_max, self.mean_gain2, self.mean_gain4, self.modulation_order)

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)


def config_hash(cfg) -> str:
    blob = json.dumps(dataclasses.asdict(cfg), sort_keys=True, default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class SolveResult:
    record: ConstellationRecord
    objective: float
    constraint_slack: float
    converged: bool
    starts_tried: int
    history: list = field(default_factory=list, repr=False)

    @property
    def constellation(self) -> Constellation:
        return self.record.constellation


# -- the design problem in decision-vector form -------------------------------


class _Problem:
    """Objective, constraints and their gradients on ``z = [delta, u_3..u_M, s_1..s_M]``."""

    def __init__(self, cfg: SolveConfig):
        self.m = m = cfg.modulation_order
        self.cfg = cfg
        eh = cfg.eh
        split = 1.0 - eh.rho
        self.lin = eh.k_o + eh.k2 * eh.r_s * split * cfg.mean_gain2
        self.quart = 0.75 * eh.k4 * eh.r_s**2 * split**2 * cfg.mean_gain4
        self.scale = cfg.snr.linear * cfg.mean_gain2  # rho*g2/(2*N0)
        self.ceiling = cfg.ceiling
        self.cscale = max(self.ceiling, 1e-12)
        smax = math.sqrt(min(cfg.papr_max, m))
        self.bounds = [(0.0, math.pi / 2)] + [(-1.0, 1.0)] * (m - 2) + [(0.0, smax)] * m

    def unpack(self, z):
        m = self.m
        delta = z[0]
        u = np.empty(m)
        u[0], u[1] = 1.0, -1.0
        u[2:] = z[1 : m - 1]
        s = z[m - 1 :]
        return delta, u, s

    def pack(self, delta, u, s):
        return np.concatenate([[delta], u[2:], s])

    def current(self, r, delta):
        return self.lin * np.mean(r**2) + self.quart * np.mean(r**4) * math.exp(-2.0 * delta / 3.0)

    def evaluate(self, z):
        """Return ``(f, c, grad_f, jac_c)`` with ``f = -bound`` and ``c >= 0`` feasible."""
        m, a = self.m, self.scale
        delta, u, s = self.unpack(z)
        nrm = math.sqrt(max(np.mean(s * s), 1e-300))
        r = s / nrm
        theta = delta * u
        ph = np.exp(1j * theta)
        x = r * ph

        diff = x[:, None] - x[None, :]
        d2 = diff.real**2 + diff.imag**2
        e = -a * d2
        top = e.max(axis=1, keepdims=True)
        w = np.exp(e - top)
        tot = w.sum(axis=1, keepdims=True)
        bound = -np.mean(np.log2(tot[:, 0] / m) + top[:, 0] / _LN2)
        w /= tot
        # d bound / d x_k as a complex gradient (d/dRe + j d/dIm)
        coef = (a / (m * _LN2)) * (w + w.T)
        gx = 2.0 * np.sum(coef * diff, axis=1)
        g_r = np.real(np.conj(gx) * ph)
        g_t = np.real(np.conj(gx) * 1j * x)

        quart_exp = self.quart * math.exp(-2.0 * delta / 3.0)
        m4 = np.mean(r**4)
        cur = self.lin + quart_exp * m4
        c = np.empty(m + 1)
        c[0] = (cur - self.cfg.epsilon) / self.cscale
        c[1:] = 1.0 - r**2 / self.cfg.papr_max

        # Gradients w.r.t. (delta, u, r); r is mapped to s at the end.
        n_var = 1 + m + m
        gf = np.zeros(n_var)
        gf[0] = -np.dot(g_t, u)
        gf[1 : 1 + m] = -delta * g_t
        gf[1 + m :] = -g_r
        jc = np.zeros((m + 1, n_var))
        jc[0, 0] = -(2.0 / 3.0) * quart_exp * m4 / self.cscale
        jc[0, 1 + m :] = quart_exp * 4.0 * r**3 / m / self.cscale
        jc[1:, 1 + m :] = np.diag(-2.0 * r / self.cfg.papr_max)
        return -bound, c, self._chain(gf, r, nrm), self._chain_rows(jc, r, nrm)

    def _chain(self, g, r, nrm):
        m = self.m
        out = np.empty(2 * m - 1)
        out[0] = g[0]
        out[1 : m - 1] = g[3 : 1 + m]
        gr = g[1 + m :]
        out[m - 1 :] = (gr - r * np.mean(gr * r)) / nrm
        return out

    def _chain_rows(self, jac, r, nrm):
        return np.stack([self._chain(row, r, nrm) for row in jac])


def _water_fill(a, cap):
    """Rescale squared magnitudes to unit mean with every entry <= cap.

    The largest ``k`` entries are clipped to ``cap`` and the rest share one
    scale factor; ``k`` is the smallest count for which that factor keeps
    the unclipped entries under the cap.
    """
    a = np.asarray(a, dtype=float)
    m = a.size
    order = np.argsort(-a, kind="stable")
    desc = a[order]
    tail = np.cumsum(desc[::-1])[::-1]  # tail[k] = sum of desc[k:]
    out = np.full(m, float(cap))
    for k in range(m):
        if tail[k] <= 0:
            out[order[k:]] = max(m - k * cap, 0.0) / (m - k)
            break
        scale = (m - k * cap) / tail[k]
        if desc[k] * scale <= cap:
            out[order[k:]] = desc[k:] * scale
            break
    return out


def _repair(prob: _Problem, z):
    """Project a solver iterate onto the exact constraint set when possible.

    Returns ``(constellation, feasible)``.
    """
    cfg = prob.cfg
    delta, u, s = prob.unpack(np.asarray(z, dtype=float))
    delta = min(max(delta, 0.0), math.pi / 2)
    u = np.clip(u, -1.0, 1.0)
    if not np.any(s > 0):
        return None, False
    a = _water_fill(s * s, min(cfg.papr_max, prob.m))
    r = np.sqrt(a)
    r /= math.sqrt(np.mean(r * r))
    if np.max(r * r) > cfg.papr_max:
        r = np.sqrt(_water_fill(r * r, cfg.papr_max * (1 - 1e-12)))
        r /= math.sqrt(np.mean(r * r))
    need = cfg.epsilon - prob.lin * np.mean(r * r)
    m4q = prob.quart * np.mean(r**4)
    if prob.current(r, delta) < cfg.epsilon:
        if m4q <= 0 or need > m4q:
            return _constellation(r, u, 0.0), prob.current(r, 0.0) >= cfg.epsilon - cfg.tol_constraint
        # Shrink the phase range just enough to lift the current to epsilon.
        delta = min(delta, max(0.0, -1.5 * math.log(need / m4q)))
        for _ in range(50):
            if prob.current(r, delta) >= cfg.epsilon or delta == 0.0:
                break
            delta = max(0.0, delta * (1.0 - 1e-12) - 1e-15)
    c = _constellation(r, u, delta)
    ok = prob.current(r, delta) >= cfg.epsilon - cfg.tol_constraint and not validate(c, cfg.papr_max)
    return c, ok


def _constellation(r, u, delta):
    return Constellation(r, delta * u, delta)


def _params_of(c: Constellation):
    """Decision vector that reproduces ``c`` (assumes the pinned layout)."""
    d = c.phase_range
    u = c.phases / d if d > 0 else np.zeros(c.order)
    u[0], u[1] = 1.0, -1.0
    return d, u, c.magnitudes.copy()


# -- initialization ---------------------------------------------------------------


def feasible_init(cfg: SolveConfig, seed: int):
    """A seeded starting point ``(delta, r, theta)`` satisfying every constraint when possible.

    Starts from a jittered single-ring layout over ``[-pi/2, pi/2]`` and
    blends it toward the maximum-current profile (``delta = 0``, extreme
    magnitudes) until the current reaches ``epsilon``.  If ``epsilon`` is
    out of reach the maximum-current profile itself is returned.
    """
    prob = _Problem(cfg)
    m = cfg.modulation_order
    rng = np.random.default_rng([cfg.seed, seed, 7])
    u = np.empty(m)
    u[0], u[1] = 1.0, -1.0
    inner = np.linspace(-1.0, 1.0, m)[1:-1]
    u[2:] = np.clip(inner + rng.uniform(-0.5, 0.5, m - 2) / (m - 1), -1.0, 1.0)
    u[2:] = rng.permutation(u[2:])
    base = np.clip(1.0 + 0.1 * rng.standard_normal(m), 0.05, None) ** 2
    base = _water_fill(base, cfg.papr_max)
    top = max_fourth_moment_profile(m, cfg.papr_max)[rng.permutation(m)]
    delta0 = math.pi / 2

    def at(t):
        a = (1.0 - t) * base + t * top
        return np.sqrt(a / np.mean(a)), (1.0 - t) * delta0

    def cur(t):
        r, d = at(t)
        return prob.current(r, d)

    if cur(0.0) >= cfg.epsilon:
        t = 0.0
    elif cur(1.0) < cfg.epsilon:
        r, d = at(1.0)
        return 0.0, r, np.zeros(m)
    else:
        lo, hi = 0.0, 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if cur(mid) >= cfg.epsilon:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-15:
                break
        t = hi
    r, d = at(t)
    return d, r, d * u


# -- augmented Lagrangian ---------------------------------------------------------


def _auglag(prob: _Problem, z0, start_id, history):
    cfg = prob.cfg
    n_con = prob.m + 1
    lam = np.zeros(n_con)
    mu = 10.0
    z = np.asarray(z0, dtype=float)
    bounds = prob.bounds
    prev_obj = None
    prev_viol = math.inf

    def phi(zz):
        f, c, gf, jc = prob.evaluate(zz)
        act = np.maximum(0.0, lam - mu * c)
        val = f + np.sum(np.where(c <= lam / mu, -lam * c + 0.5 * mu * c * c, -lam**2 / (2 * mu)))
        return val, gf - act @ jc

    for it in range(cfg.max_iters):
        res = minimize(phi, z, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 500, "ftol": 1e-15, "gtol": 1e-10})
        z = res.x
        # Rescale raw magnitudes to unit rms; the problem is invariant to it.
        delta, u, s = prob.unpack(z)
        smax = bounds[-1][1]
        s = s / math.sqrt(max(np.mean(s * s), 1e-300))
        z = prob.pack(delta, u, np.minimum(s, smax))
        f, c, _, _ = prob.evaluate(z)
        viol = float(np.max(np.maximum(0.0, -c)))
        history.append({"start": start_id, "iteration": it, "objective": -f, "max_violation": viol})
        lam = np.maximum(0.0, lam - mu * c)
        if prev_obj is not None and viol <= cfg.tol_constraint and abs(f - prev_obj) <= cfg.tol_obj * max(1.0, abs(f)):
            break
        if viol > 0.25 * prev_viol:
            mu = min(mu * 10.0, 1e10)
        prev_obj, prev_viol = f, viol
    return z


def solve_p2(cfg: SolveConfig, warm_starts=()) -> SolveResult:
    """Solve the single-threshold design problem with multi-start augmented Lagrangian.

    ``warm_starts`` is an optional sequence of :class:`Constellation` used as
    extra starting points (e.g. the solution at a neighbouring threshold).
    Raises :class:`InfeasibleError` if ``cfg.epsilon`` exceeds the
    achievable ceiling by more than ``cfg.tol_constraint``.
    """
    prob = _Problem(cfg)
    if cfg.epsilon > prob.ceiling + cfg.tol_constraint:
        raise InfeasibleError(cfg.epsilon, prob.ceiling)

    starts = []
    for c in warm_starts:
        if c is not None and c.order == cfg.modulation_order:
            d, u, r = _params_of(c)
            starts.append(prob.pack(d, u, r))
    for k in range(cfg.n_starts):
        d, r, theta = feasible_init(cfg, k)
        u = theta / d if d > 0 else np.r_[1.0, -1.0, np.zeros(cfg.modulation_order - 2)]
        u[0], u[1] = 1.0, -1.0
        starts.append(prob.pack(d, u, r))

    history = []
    candidates = []
    for sid, z0 in enumerate(starts):
        for z in (z0, _auglag(prob, z0, sid, history)):
            c, ok = _repair(prob, z)
            if ok:
                obj = dimi_lower_bound(c, cfg.mean_gain2, cfg.snr, cfg.rho)
                key = tuple(np.concatenate([[c.phase_range], c.magnitudes, c.phases]))
                candidates.append((-obj, key, c))
    rec_kw = dict(epsilon=cfg.epsilon, design_snr_db=cfg.design_snr_db, seed=cfg.seed, solver_hash=config_hash(cfg))
    if not candidates:
        d, r, theta = feasible_init(cfg, 0)
        c = Constellation(r, theta, d)
        obj = dimi_lower_bound(c, cfg.mean_gain2, cfg.snr, cfg.rho)
        slack = prob.current(c.magnitudes, c.phase_range) - cfg.epsilon
        return SolveResult(ConstellationRecord(c, **rec_kw), obj, slack, False, len(starts), history)
    candidates.sort(key=lambda t: (t[0], t[1]))
    neg_obj, _, best = candidates[0]
    slack = prob.current(best.magnitudes, best.phase_range) - cfg.epsilon
    log.debug("eps=%g: bound=%.6f delta=%.4f papr=%.3f", cfg.epsilon, -neg_obj, best.phase_range, papr(best))
    return SolveResult(ConstellationRecord(best, **rec_kw), -neg_obj, slack, True, len(starts), history)


# -- Pareto sweep ---------------------------------------------------------------


def solve_sweep(base_cfg: SolveConfig, epsilons):
    """Solve for each threshold in ascending order, warm-starting from the
    previous solution.  Yields ``(epsilon, SolveResult or None)``; ``None``
    marks a threshold above the ceiling."""
    eps = [float(e) for e in epsilons]
    if sorted(eps) != eps:
        raise ValueError("epsilons must be sorted ascending")
    prev = None
    for e in eps:
        try:
            res = solve_p2(base_cfg.replace(epsilon=e), warm_starts=[prev] if prev is not None else ())
        except InfeasibleError:
            yield e, None
            continue
        if res.converged:
            prev = res.constellation
        yield e, res


@dataclass
class FrontPoint:
    epsilon: float
    rate: float
    rate_se: float
    current: float
    record: ConstellationRecord
    objective: float


@dataclass
class ParetoFront:
    points: list
    infeasible: list = field(default_factory=list)

    def __post_init__(self):
        eps = [p.epsilon for p in self.points]
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise ValueError("front epsilons must be strictly increasing")

    def __len__(self):
        return len(self.points)


def pareto_sweep(base_cfg: SolveConfig, epsilons, gains, n_noise: int = 256, eval_seed: int = 1,
                 max_channels: int | None = 1000) -> ParetoFront:
    """Trace the rate-current front by sweeping the threshold.

    Each design is evaluated on ``gains`` (held out from design) with the
    Monte-Carlo DIMI and the averaged current model.  Thresholds above the
    ceiling are collected in ``front.infeasible`` instead of failing.
    """
    gains = np.asarray(gains).ravel()
    eval_gains = gains if max_channels is None else gains[:max_channels]
    points, bad = [], []
    for e, res in solve_sweep(base_cfg, epsilons):
        if res is None or not res.converged:
            bad.append(e)
            continue
        cfg = base_cfg.replace(epsilon=e)
        rate: MiEstimate = average_dimi(res.constellation, eval_gains, cfg.snr, cfg.rho, n_noise, eval_seed)
        cur = average_harvested_current(res.constellation, gains, cfg.eh)
        points.append(FrontPoint(e, rate.value, rate.std_error, cur, res.record, res.objective))
    return ParetoFront(points, bad)


def apsk_like(c: Constellation) -> Constellation:
    """Single-ring baseline with the same order and phase range as ``c``."""
    return make_apsk(c.order, c.phase_range)
