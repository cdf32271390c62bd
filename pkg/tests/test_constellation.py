import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fluidaqam import (
    Constellation,
    ConstellationRecord,
    RecordParseError,
    load_record,
    make_apsk,
    make_square_qam,
    normalize,
    papr,
    save_record,
    validate,
)
from fluidaqam.constellation import dumps_record, loads_record


def codes(c, papr_max=math.inf):
    return {v["code"] for v in validate(c, papr_max)}


def random_valid(m, seed, delta=None):
    rng = np.random.default_rng(seed)
    delta = rng.uniform(0, math.pi / 2) if delta is None else delta
    theta = rng.uniform(-delta, delta, m)
    theta[0], theta[1] = delta, -delta
    return normalize(Constellation(rng.uniform(0.1, 2, m), theta, delta))


class TestValidate:
    def test_wide_qpsk_rejected(self):
        ph = np.array([-3, -1, 1, 3]) * math.pi / 4
        assert "phase_range" in codes(Constellation(np.ones(4), ph, 3 * math.pi / 4))

    def test_unit_ring_valid(self):
        c = Constellation(np.ones(16), np.linspace(-0.3, 0.3, 16), 0.3)
        assert validate(c, 15) == []
        assert papr(c) == 1.0

    def test_power_violation(self):
        c = Constellation(np.full(4, math.sqrt(1.1)), [-0.1, 0, 0, 0.1], 0.1)
        assert codes(c) == {"power"}

    def test_order(self):
        c = normalize(Constellation(np.ones(3), [-0.1, 0, 0.1], 0.1))
        assert codes(c) == {"order"}

    def test_pinning(self):
        c = Constellation(np.ones(4), [-0.1, 0, 0, 0.05], 0.1)
        assert codes(c) == {"phase_max"}
        c = Constellation(np.ones(4), [-0.2, 0, 0, 0.1], 0.1)
        assert {"phase_bounds", "phase_min"} <= codes(c)

    def test_papr_cap(self):
        c = normalize(Constellation([0, 0, 0, 1], [-0.1, 0, 0, 0.1], 0.1))
        assert papr(c) == pytest.approx(4.0)
        assert codes(c, 3.9) == {"papr"}
        assert codes(c, 4.0) == set()

    def test_non_finite(self):
        assert "finite" in codes(Constellation([1, math.nan], [0, 0], 0))

    def test_negative_magnitude(self):
        assert "magnitude_sign" in codes(Constellation([1, -1], [-0.1, 0.1], 0.1))

    def test_descriptor_shape(self):
        (v,) = validate(Constellation(np.full(2, 2.0), [-0.1, 0.1], 0.1))
        assert v["code"] == "power" and isinstance(v["message"], str)


class TestNormalize:
    def test_uniform(self):
        c = normalize(Constellation(np.full(4, 2.0), [-1, 0, 0, 1], 1))
        np.testing.assert_allclose(c.magnitudes, 1.0, rtol=0, atol=1e-15)

    def test_two_point(self):
        c = normalize(Constellation([1, 3], [-0.2, 0.2], 0.2))
        np.testing.assert_allclose(c.magnitudes, [1 / math.sqrt(5), 3 / math.sqrt(5)], rtol=1e-15)
        assert c.phase_range == 0.2

    def test_idempotent(self):
        c = random_valid(16, 3)
        np.testing.assert_allclose(normalize(c).magnitudes, c.magnitudes, rtol=0, atol=1e-15)

    def test_zero(self):
        with pytest.raises(ValueError):
            normalize(Constellation(np.zeros(4), np.zeros(4), 0))

    @settings(max_examples=60, deadline=None)
    @given(arrays(float, st.sampled_from([2, 4, 8, 16]), elements=st.floats(0.01, 100)),
           st.floats(1e-3, 1e3))
    def test_scale_invariant(self, r, alpha):
        c = Constellation(r, np.zeros(r.size), 0)
        a, b = normalize(c), normalize(Constellation(alpha * r, np.zeros(r.size), 0))
        np.testing.assert_allclose(a.magnitudes, b.magnitudes, rtol=1e-13)
        assert abs(a.mean_power - 1) < 1e-14
        assert 1 - 1e-12 <= papr(a) <= r.size + 1e-12


class TestApsk:
    def test_antipodal(self):
        c = make_apsk(2, math.pi / 2)
        assert list(c.phases) == [-math.pi / 2, math.pi / 2]
        np.testing.assert_array_equal(c.magnitudes, [1, 1])

    def test_spacing(self):
        c = make_apsk(16, 0.3)
        np.testing.assert_allclose(np.diff(c.phases), 0.04, atol=1e-15)
        assert c.phases[0] == -0.3 and c.phases[-1] == 0.3

    def test_degenerate_flag(self):
        assert "degenerate" in make_apsk(8, 0.0).flags
        assert "degenerate" not in make_apsk(8, 0.1).flags

    def test_bad_delta(self):
        with pytest.raises(ValueError):
            make_apsk(4, 2.0)

    @given(st.sampled_from([2, 4, 8, 16, 32, 64]), st.floats(0, math.pi / 2))
    def test_always_valid(self, m, delta):
        c = make_apsk(m, delta)
        assert validate(c, 1.0) == []
        assert papr(c) == 1.0


class TestSquareQam:
    def test_qpsk(self):
        c = make_square_qam(4)
        expected = {complex(a, b) / math.sqrt(2) for a in (-1, 1) for b in (-1, 1)}
        for p in c.points:
            assert min(abs(p - e) for e in expected) < 1e-15
        assert papr(c) == pytest.approx(1.0, abs=1e-15)

    def test_sixteen(self):
        c = make_square_qam(16)
        assert papr(c) == pytest.approx(1.8, abs=1e-12)
        assert abs(c.mean_power - 1) < 1e-12
        assert "unconstrained_phase" in c.flags
        assert c.phase_range > math.pi / 2
        assert validate(c, 2) == []

    def test_gray(self):
        c = make_square_qam(16)
        pts = c.points * math.sqrt(10)
        for a in range(16):
            for b in range(a + 1, 16):
                if abs(abs(pts[a] - pts[b]) - 2) < 1e-9:
                    assert bin(a ^ b).count("1") == 1

    @pytest.mark.parametrize("m", [2, 8, 12, 32])
    def test_non_square(self, m):
        with pytest.raises(ValueError):
            make_square_qam(m)


class TestRecords:
    def _rec(self, seed=0):
        return ConstellationRecord(random_valid(16, seed), 0.51234567891234567, 17.0, 42, "abcdef")

    def test_roundtrip(self, tmp_path):
        rec = self._rec()
        back = load_record(save_record(rec, tmp_path / "r.txt"))
        assert back == rec

    def test_flags_roundtrip(self):
        rec = ConstellationRecord(make_square_qam(16), 0.0, 17.0)
        assert loads_record(dumps_record(rec)).constellation.flags == {"unconstrained_phase"}

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0, 5), st.floats(-30, 60))
    def test_roundtrip_property(self, seed, eps, snr):
        rec = ConstellationRecord(random_valid(8, seed), eps, snr, seed, "h")
        back = loads_record(dumps_record(rec))
        assert back == rec
        assert np.array_equal(back.constellation.phases, rec.constellation.phases)

    def test_missing_field(self):
        text = "\n".join(l for l in dumps_record(self._rec()).splitlines() if not l.startswith("phase_range"))
        with pytest.raises(RecordParseError) as info:
            loads_record(text)
        assert info.value.field == "phase_range"
        assert "phase_range" in str(info.value)

    def test_wrong_count(self):
        lines = dumps_record(self._rec()).splitlines()
        lines[2] = " ".join(lines[2].split()[:-1])
        with pytest.raises(RecordParseError) as info:
            loads_record("\n".join(lines))
        assert info.value.field == "magnitudes" and info.value.line == 3

    def test_bad_number(self):
        text = dumps_record(self._rec()).replace("epsilon = ", "epsilon = x")
        with pytest.raises(RecordParseError) as info:
            loads_record(text)
        assert info.value.field == "epsilon"

    def test_seventeen_digits(self):
        rec = self._rec()
        tokens = dumps_record(rec).splitlines()[2].split("=")[1].split()
        assert tokens == [format(v, ".17g") for v in rec.constellation.magnitudes]
