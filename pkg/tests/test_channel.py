import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from cellrelay.channel import (AwgnQam16, FixedPer, PacketOutcome, UniformStream, draw_outcome,
                               effective_per, link_model_from_dict, link_model_to_dict,
                               per_from_ber, qam16_symbol_error)
from cellrelay.exceptions import ConfigError

mpmath.mp.dps = 50


def q_mp(x):
    return mpmath.mpf(1) / 2 * mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2))


def ser_mp(snr):
    q = q_mp(mpmath.sqrt(mpmath.mpf(snr) / 5))
    return 3 * q * (1 - mpmath.mpf(3) / 4 * q)


class TestSymbolError:
    def test_zero_snr(self):
        assert qam16_symbol_error(0.0) == pytest.approx(0.9375, abs=1e-15)

    def test_infinite_snr(self):
        assert qam16_symbol_error(math.inf) == 0.0

    def test_ten(self):
        assert qam16_symbol_error(10.0) == pytest.approx(0.2221, abs=1e-4)

    @pytest.mark.parametrize("snr", [0.5, 3.0, 10.0, 40.0, 120.0])
    def test_against_high_precision(self, snr):
        assert qam16_symbol_error(snr) == pytest.approx(float(ser_mp(snr)), rel=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            qam16_symbol_error(-1.0)


class TestPerFromBer:
    def test_zero(self):
        assert per_from_ber(0.0, 24576) == 0.0

    @pytest.mark.parametrize("ber", [1e-9, 0.01, 0.5, 1.0])
    def test_single_bit(self, ber):
        assert per_from_ber(ber, 1) == pytest.approx(ber, rel=1e-14)

    def test_against_high_precision(self):
        exact = 1 - (1 - mpmath.mpf("1e-5")) ** 24576
        assert per_from_ber(1e-5, 24576) == pytest.approx(float(exact), rel=1e-12)
        assert per_from_ber(1e-5, 24576) == pytest.approx(0.21783, abs=1e-4)

    def test_tiny_ber_is_not_lost(self):
        assert per_from_ber(1e-15, 8) == pytest.approx(8e-15, rel=1e-9)

    @given(st.floats(min_value=0, max_value=1), st.integers(min_value=1, max_value=100_000))
    def test_bounds(self, ber, bits):
        per = per_from_ber(ber, bits)
        assert ber - 1e-15 <= per <= min(1.0, bits * ber) + 1e-12


class TestEffectivePer:
    def test_fixed_identity(self):
        assert effective_per(FixedPer(0.001)) == 0.001

    def test_infinite_snr(self):
        assert effective_per(AwgnQam16(snr_db=math.inf)) == 0.0

    def test_saturated_at_10db(self):
        model = AwgnQam16(snr_db=10.0, packet_bits=24576, coding_gain_db=0.0)
        assert effective_per(model) == pytest.approx(per_from_ber(0.22203 / 4, 24576), abs=1e-9)
        assert effective_per(model) == pytest.approx(1.0, abs=1e-12)

    def test_monotone_in_snr(self):
        grid = np.linspace(-5, 30, 100)
        values = [effective_per(AwgnQam16(snr_db=s, packet_bits=8000)) for s in grid]
        assert all(x >= y for x, y in zip(values, values[1:]))
        assert values[0] > values[-1]

    def test_monotone_in_coding_gain(self):
        gains = np.linspace(0, 10, 50)
        values = [effective_per(AwgnQam16(snr_db=14.0, packet_bits=8000, coding_gain_db=g))
                  for g in gains]
        assert all(x >= y for x, y in zip(values, values[1:]))

    def test_validation(self):
        with pytest.raises(ConfigError):
            FixedPer(1.5)
        with pytest.raises(ConfigError):
            AwgnQam16(snr_db=10, coding_gain_db=-1)

    @pytest.mark.parametrize("model", [FixedPer(0.002), AwgnQam16(12.5, 1000, 3.0)])
    def test_json_round_trip(self, model):
        assert link_model_from_dict(link_model_to_dict(model)) == model

    def test_unknown_type(self):
        with pytest.raises(ConfigError):
            link_model_from_dict({"type": "rayleigh"})


class TestDrawOutcome:
    def test_extremes(self):
        rng = np.random.default_rng(3)
        assert all(draw_outcome(0.0, rng) is PacketOutcome.DELIVERED for _ in range(1000))
        assert all(draw_outcome(1.0, rng) is PacketOutcome.ERRORED for _ in range(1000))

    def test_one_draw_per_call(self):
        a, b = np.random.default_rng(11), np.random.default_rng(11)
        for _ in range(10):
            draw_outcome(0.5, a)
        b.random(10)
        assert a.random() == b.random()

    def test_binomial_count(self):
        stream = UniformStream(2024)
        errors = sum(draw_outcome(0.001, stream) is PacketOutcome.ERRORED
                     for _ in range(1_000_000))
        assert 905 <= errors <= 1095

    def test_reproducible(self):
        s1, s2 = UniformStream(99), UniformStream(99)
        assert [draw_outcome(0.3, s1) for _ in range(500)] == \
               [draw_outcome(0.3, s2) for _ in range(500)]


class TestUniformStream:
    def test_block_size_does_not_change_sequence(self):
        reference = np.random.Generator(np.random.PCG64(42)).random(5000).tolist()
        for block in (1, 7, 1000, 1 << 16):
            stream = UniformStream(42, block=block)
            got = stream.take(3) + [stream.random() for _ in range(1000)] + stream.take(3997)
            assert got == reference

    def test_take_zero(self):
        assert UniformStream(1).take(0) == []
