import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidaqam import (
    Constellation,
    EhParams,
    average_harvested_current,
    epsilon_max,
    harvested_current,
    make_apsk,
    make_square_qam,
    moment2,
    moment4,
    normalize,
    papr,
)
from fluidaqam.energy import max_fourth_moment, max_fourth_moment_profile

from oracles import max_fourth_moment_numeric

P = EhParams()


def test_defaults():
    assert (P.k_o, P.k2, P.k4, P.r_s, P.rho) == (0.0, 0.0034, 0.3829, 1.0, 0.5)


@pytest.mark.parametrize("kw", [{"rho": 1.5}, {"rho": -0.1}, {"r_s": 0}, {"k2": 0}, {"k4": -1}])
def test_params_invalid(kw):
    with pytest.raises(ValueError):
        EhParams(**kw)


class TestMoments:
    def test_unit_ring(self):
        c = make_apsk(8, 0.4)
        assert moment2(c) == 1 and moment4(c) == 1 and papr(c) == 1

    def test_two_point(self):
        c = Constellation([0, math.sqrt(2)], [0, 0], 0)
        assert moment2(c) == pytest.approx(1) and moment4(c) == pytest.approx(2)
        assert papr(c) == pytest.approx(2)

    def test_square_qam(self):
        c = make_square_qam(16)
        assert moment4(c) == pytest.approx(1.32, abs=1e-12)
        assert papr(c) == pytest.approx(1.8, abs=1e-12)

    def test_papr_zero(self):
        with pytest.raises(ValueError):
            papr(Constellation(np.zeros(2), np.zeros(2), 0))


class TestCurrent:
    def test_worked_value(self):
        c = make_apsk(16, 0.0)
        expected = 0.0034 * 0.5 + 0.75 * 0.3829 * 0.25
        assert expected == pytest.approx(0.07349375, abs=1e-15)
        assert harvested_current(c, 1.0, P) == pytest.approx(0.0734938, abs=1e-7)

    def test_all_to_information(self):
        p = EhParams(k_o=0.25, rho=1.0)
        assert harvested_current(make_square_qam(16), 1 + 2j, p) == 0.25

    def test_zero_gain(self):
        assert harvested_current(make_apsk(4, 0.1), 0, EhParams(k_o=0.1)) == 0.1

    def test_average_single(self):
        c = make_square_qam(16)
        a = average_harvested_current(c, [1.0], P)
        assert a == pytest.approx(harvested_current(c, 1.0, P), rel=1e-15)
        assert average_harvested_current(c, [1, 1, 1], P) == pytest.approx(a, rel=1e-15)

    def test_empty(self):
        with pytest.raises(ValueError):
            average_harvested_current(make_apsk(4, 0.1), [], P)

    def test_closed_vs_samples(self, rng):
        worst = 0.0
        for _ in range(100):
            m = 16
            d = rng.uniform(0, math.pi / 2)
            c = normalize(Constellation(rng.uniform(0, 2, m), rng.uniform(-d, d, m), d))
            g = (rng.standard_normal(1000) + 1j * rng.standard_normal(1000)) * math.sqrt(0.5)
            a = average_harvested_current(c, g, P, "closed")
            b = average_harvested_current(c, g, P, "samples")
            worst = max(worst, abs(a - b))
        assert worst < 1e-12

    @settings(max_examples=80, deadline=None)
    @given(st.floats(0, math.pi / 2), st.floats(0, math.pi / 2), st.floats(0, 5), st.floats(0, 5),
           st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, d1, d2, h1, h2, r1, r2):
        c = Constellation([0.5, 1.3228756555322954], [0, 0], 0)
        d1, d2 = sorted((d1, d2))
        h1, h2 = sorted((h1, h2))
        r1, r2 = sorted((r1, r2))
        cd = lambda d: Constellation(c.magnitudes, c.phases, d)
        assert harvested_current(cd(d1), 1, P) >= harvested_current(cd(d2), 1, P)
        assert harvested_current(c, h1, P) <= harvested_current(c, h2, P)
        assert harvested_current(c, 1, P.with_rho(r1)) >= harvested_current(c, 1, P.with_rho(r2))


class TestCeiling:
    def test_profile(self):
        a = max_fourth_moment_profile(16, 15)
        assert list(a[:2]) == [15.0, 1.0] and not a[2:].any()
        assert max_fourth_moment(16, 15) == pytest.approx(226 / 16)

    def test_unit_cap(self):
        mu2, mu4 = 3.1, 11.7
        expect = 0.0034 * 0.5 * mu2 + 0.75 * 0.3829 * 0.25 * mu4
        assert epsilon_max(P, 1.0, mu2, mu4, 16) == pytest.approx(expect, rel=1e-15)

    def test_cap_above_order(self):
        assert max_fourth_moment(4, 10) == pytest.approx(4.0)

    @pytest.mark.parametrize("m,cap", [(2, 1.5), (4, 2.5), (4, 3.0), (8, 3.7), (8, 5.0), (16, 15.0)])
    def test_matches_brute_force(self, m, cap):
        mu2, mu4 = 1.0, 2.0
        brute = max_fourth_moment_numeric(m, cap)
        from fluidaqam.energy import current_from_moments
        expect = float(current_from_moments(1.0, brute, 0.0, mu2, mu4, P))
        assert epsilon_max(P, cap, mu2, mu4, m) == pytest.approx(expect, abs=1e-6)

    def test_above_top_threshold(self, design_moments):
        assert epsilon_max(P, 15, *design_moments, 16) >= 1.57

    def test_cap_monotone(self):
        caps = np.linspace(1, 20, 40)
        vals = [epsilon_max(P, c, 1.0, 2.0, 16) for c in caps]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
