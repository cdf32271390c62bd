import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidaqam import (
    InfeasibleError,
    SolveConfig,
    average_harvested_current,
    dimi_lower_bound,
    epsilon_max,
    feasible_init,
    make_apsk,
    papr,
    pareto_sweep,
    solve_p2,
    validate,
)
from fluidaqam.constellation import Constellation
from fluidaqam.energy import current_from_moments, moment2, moment4
from fluidaqam.optimizer import ParetoFront, _Problem, _water_fill, apsk_like, config_hash, solve_sweep

SMALL = SolveConfig(modulation_order=8, n_starts=3, max_iters=60, mean_gain2=3.0, mean_gain4=11.0)


def closed_current(cfg, c):
    return float(current_from_moments(moment2(c), moment4(c), c.phase_range,
                                      cfg.mean_gain2, cfg.mean_gain4, cfg.eh))


def assert_feasible(cfg, c):
    assert validate(c, cfg.papr_max) == []
    assert abs(c.mean_power - 1) <= 1e-9
    assert papr(c) <= cfg.papr_max + 1e-9
    assert abs(c.phases.max() - c.phase_range) <= 1e-9
    assert abs(c.phases.min() + c.phase_range) <= 1e-9
    assert closed_current(cfg, c) >= cfg.epsilon - 1e-8


class TestConfig:
    @pytest.mark.parametrize("kw", [{"epsilon": -1}, {"papr_max": 0.5}, {"n_starts": 0}, {"modulation_order": 6}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SolveConfig(**kw)

    def test_hash_stable(self):
        assert config_hash(SMALL) == config_hash(SMALL.replace())
        assert config_hash(SMALL) != config_hash(SMALL.replace(seed=1))


class TestGradients:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_finite_differences(self, seed):
        cfg = SMALL.replace(epsilon=0.5)
        prob = _Problem(cfg)
        rng = np.random.default_rng(seed)
        m = cfg.modulation_order
        z = np.concatenate([[rng.uniform(0.2, 1.3)], rng.uniform(-0.9, 0.9, m - 2), rng.uniform(0.3, 1.5, m)])
        f, c, gf, jc = prob.evaluate(z)
        h = 1e-6
        num_f = np.empty_like(z)
        num_c = np.empty((c.size, z.size))
        for i in range(z.size):
            zp, zm = z.copy(), z.copy()
            zp[i] += h
            zm[i] -= h
            fp, cp, _, _ = prob.evaluate(zp)
            fm, cm, _, _ = prob.evaluate(zm)
            num_f[i] = (fp - fm) / (2 * h)
            num_c[:, i] = (cp - cm) / (2 * h)
        np.testing.assert_allclose(gf, num_f, atol=1e-6)
        np.testing.assert_allclose(jc, num_c, atol=1e-6)

    def test_objective_matches_bound(self):
        cfg = SMALL
        prob = _Problem(cfg)
        d, r, theta = feasible_init(cfg, 0)
        u = theta / d
        f, _, _, _ = prob.evaluate(prob.pack(d, u, r * 3.0))
        c = Constellation(r, theta, d)
        assert -f == pytest.approx(dimi_lower_bound(c, cfg.mean_gain2, cfg.snr, cfg.rho), abs=1e-12)


class TestWaterFill:
    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(1e-3, 50), min_size=2, max_size=16), st.floats(1.0, 20))
    def test_caps_and_mean(self, a, cap):
        a = np.array(a)
        cap = min(cap, a.size)
        out = _water_fill(a, cap)
        assert np.mean(out) == pytest.approx(1, rel=1e-12)
        assert out.max() <= cap * (1 + 1e-12)


class TestInit:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 1000), st.floats(0, 1))
    def test_feasible(self, seed, frac):
        cfg = SMALL.replace(epsilon=frac * SMALL.ceiling)
        d, r, theta = feasible_init(cfg, seed)
        assert_feasible(cfg, Constellation(r, theta, d))


class TestSolve:
    def test_infeasible(self):
        cfg = SMALL.replace(epsilon=SMALL.ceiling * 1.01)
        with pytest.raises(InfeasibleError) as info:
            solve_p2(cfg)
        assert info.value.ceiling == pytest.approx(SMALL.ceiling)

    def test_ceiling_matches_energy(self):
        assert SMALL.ceiling == epsilon_max(SMALL.eh, 15, 3.0, 11.0, 8)

    def test_zero_threshold(self):
        res = solve_p2(SMALL)
        assert res.converged
        assert_feasible(SMALL, res.constellation)
        # unconstrained design stays near the wide end of the phase range
        assert res.constellation.phase_range > 1.0

    @pytest.mark.parametrize("frac", [0.05, 0.3, 0.7, 0.999])
    def test_feasible_output(self, frac):
        cfg = SMALL.replace(epsilon=frac * SMALL.ceiling)
        res = solve_p2(cfg)
        assert res.converged
        assert_feasible(cfg, res.constellation)
        assert res.constraint_slack >= -1e-8
        assert res.objective == pytest.approx(
            dimi_lower_bound(res.constellation, cfg.mean_gain2, cfg.snr, cfg.rho), abs=1e-12)

    def test_at_ceiling(self):
        cfg = SMALL.replace(epsilon=SMALL.ceiling)
        res = solve_p2(cfg)
        assert_feasible(cfg, res.constellation)
        assert res.constellation.phase_range == 0.0

    def test_beats_apsk(self):
        cfg = SMALL.replace(epsilon=0.2 * SMALL.ceiling)
        res = solve_p2(cfg)
        base = apsk_like(res.constellation)
        assert closed_current(cfg, base) <= closed_current(cfg, res.constellation)
        assert res.objective >= dimi_lower_bound(base, cfg.mean_gain2, cfg.snr, cfg.rho)

    def test_deterministic(self):
        cfg = SMALL.replace(epsilon=0.4 * SMALL.ceiling)
        a, b = solve_p2(cfg), solve_p2(cfg)
        assert a.constellation == b.constellation and a.objective == b.objective

    def test_warm_start_never_worse(self):
        cfg = SMALL.replace(epsilon=0.4 * SMALL.ceiling)
        cold = solve_p2(cfg)
        warm = solve_p2(cfg, warm_starts=[cold.constellation])
        assert warm.objective >= cold.objective - 1e-12

    def test_objective_monotone_in_threshold(self):
        eps = [f * SMALL.ceiling for f in (0.1, 0.5, 0.9)]
        objs = [r.objective for _, r in solve_sweep(SMALL, eps)]
        assert objs[0] >= objs[1] - 1e-6 >= objs[2] - 2e-6


class TestSweep:
    def test_marks_infeasible(self):
        eps = [0.1 * SMALL.ceiling, 2 * SMALL.ceiling]
        out = list(solve_sweep(SMALL, eps))
        assert out[0][1] is not None and out[1][1] is None

    def test_unsorted(self):
        with pytest.raises(ValueError):
            list(solve_sweep(SMALL, [1.0, 0.5]))

    def test_pareto(self, eval_gains):
        cfg = SMALL.replace(n_starts=2)
        eps = [0.1 * cfg.ceiling, 0.6 * cfg.ceiling, 3 * cfg.ceiling]
        front = pareto_sweep(cfg, eps, eval_gains["best"], n_noise=16, max_channels=50)
        assert len(front) == 2 and front.infeasible == [eps[2]]
        for p in front.points:
            assert p.current == pytest.approx(average_harvested_current(p.record.constellation,
                                                                        eval_gains["best"], cfg.eh))
        with pytest.raises(ValueError):
            ParetoFront(front.points[::-1])
