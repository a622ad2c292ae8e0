import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qiadv.compression import (
    CompressionPreconditionError,
    OneWayProtocol,
    accept_all_protocol,
    compress,
    constant_message_protocol,
    default_budget,
    evaluate_success,
    noisy_copy_protocol,
    one_way_from_strategy,
    parity_hint_protocol,
    stated_communication_bound,
)
from qiadv.game import GameSpec, brute_force_value
from qiadv.info import ispec_smoothed
from qiadv.provers import ConstantZero, PrefixLeak, RandomHash

BETA = 0.05


def measured_cap(proto, beta=BETA):
    return ispec_smoothed(proto.joint(), beta)


class TestOneWay:
    def test_prefix_leak_success_by_enumeration(self):
        proto = one_way_from_strategy(PrefixLeak(2), GameSpec(4, 4))
        # copies 1-2 always win, copies 3-4 win with 3/4 each
        assert proto.success() == pytest.approx(9 / 16, abs=1e-15)

    def test_constant_zero_matches_tail(self):
        proto = one_way_from_strategy(ConstantZero(), GameSpec(3, 2))
        # Pr[Bin(3, 3/4) >= 2]
        assert proto.success() == pytest.approx(27 / 32, abs=1e-15)

    def test_single_copy_value(self):
        proto = one_way_from_strategy(ConstantZero(), GameSpec(1, 1))
        assert proto.success() == pytest.approx(float(brute_force_value(1)))

    def test_sampled_success_agrees(self, rng):
        proto = noisy_copy_protocol(6, 0.3)
        rep = proto.sample_success(20_000, rng)
        assert abs(rep.value - proto.success()) <= 4 * rep.se

    def test_shared_randomness_folds_into_transcript(self):
        proto = one_way_from_strategy(RandomHash(2, family_size=4), GameSpec(4, 3))
        assert proto.n_m == 4 * 4  # key index times 2-bit message
        np.testing.assert_allclose(proto.message_dist.sum(axis=1), 1.0)


class TestCompress:
    def test_budget_and_stated_bound(self):
        assert default_budget(1.0, 0.05) == math.ceil(40 * 2 * math.log(40))
        assert stated_communication_bound(1.0, 0.05) == pytest.approx(1 + math.log2(40) + math.log2(math.log2(40)))

    def test_constant_message(self):
        proto = constant_message_protocol()
        comp = compress(proto, 0.0, BETA, K=1)
        assert comp.communication_bits == 1
        for seed in range(20):
            assert all(comp.encode_all(seed) == 1)
            assert comp.decode(1, seed) == 0
        assert evaluate_success(comp).value == pytest.approx(proto.success()) == pytest.approx(1.0)

    def test_accept_all(self):
        proto = accept_all_protocol()
        comp = compress(proto, measured_cap(proto), BETA)
        assert proto.success() == 1.0
        assert evaluate_success(comp, "monte-carlo", seeds=200).value == 1.0

    def test_precondition_on_cap(self):
        proto = noisy_copy_protocol(8, 0.1)
        measured = measured_cap(proto)
        with pytest.raises(CompressionPreconditionError) as info:
            compress(proto, measured - 0.5, BETA)
        assert info.value.measured == pytest.approx(measured)

    def test_precondition_on_beta(self):
        proto = noisy_copy_protocol(8, 0.1)
        with pytest.raises(CompressionPreconditionError):
            compress(proto, 10.0, proto.success())

    def test_rejection_sampling_identity(self, rng):
        """Below the cap, acceptance is the exact ratio and accepted messages follow p(m|x)."""
        proto = noisy_copy_protocol(5, 0.4)
        c = measured_cap(proto, 0.0)
        comp = compress(proto, c, BETA)
        ratio = proto.message_dist / (2.0 ** c * proto.p_m)
        assert np.all(ratio <= 1 + 1e-12)
        np.testing.assert_allclose(comp.acceptance, ratio, rtol=1e-12)
        np.testing.assert_allclose(comp.accepted_distribution(), proto.message_dist, rtol=1e-12)
        # frequency test of the encoder at x = 0
        counts = np.zeros(proto.n_m)
        for seed in range(4000):
            idx = comp.encode(0, seed)
            if idx:
                counts[comp.decode(idx, seed)] += 1
        freq = counts / counts.sum()
        se = np.sqrt(proto.message_dist[0] * (1 - proto.message_dist[0]) / counts.sum())
        assert np.all(np.abs(freq - proto.message_dist[0]) <= 4 * se + 1e-12)

    def test_exact_and_monte_carlo_agree(self):
        proto = parity_hint_protocol(3, 0.1)
        comp = compress(proto, measured_cap(proto), BETA)
        exact = evaluate_success(comp).value
        mc = evaluate_success(comp, "monte-carlo", seeds=2000)
        assert abs(mc.value - exact) <= 4 * mc.se + 1e-12
        assert mc.best_seed_value >= mc.value

    def test_prefix_leak_degradation(self):
        proto = one_way_from_strategy(PrefixLeak(2), GameSpec(4, 4))
        comp = compress(proto, measured_cap(proto), BETA)
        assert comp.tail_mass_above_cap() <= BETA
        assert evaluate_success(comp).value >= proto.success() - 2 * BETA
        mc = evaluate_success(comp, "monte-carlo", seeds=2000)
        assert mc.value >= proto.success() - 2 * BETA - 3 * mc.se

    @settings(max_examples=15)
    @given(st.integers(2, 8), st.floats(0.0, 0.9), st.sampled_from([0.02, 0.05, 0.1]))
    def test_degradation_bound_exact(self, size, eta, beta):
        proto = noisy_copy_protocol(size, eta)
        if beta > proto.success() / 2:
            return
        comp = compress(proto, measured_cap(proto, beta), beta)
        assert comp.expected_success() >= proto.success() - 2 * beta - 1e-12
        assert comp.abort_probability() <= beta / 2 + 1e-12

    def test_communication_report(self):
        proto = noisy_copy_protocol(8, 0.2)
        c = measured_cap(proto)
        comp = compress(proto, c, BETA)
        assert comp.communication_bits == math.ceil(math.log2(comp.K + 1))
        assert comp.communication_bits <= comp.stated_bound_bits + 2

    def test_decode_range(self):
        comp = compress(constant_message_protocol(), 0.0, BETA, K=3)
        with pytest.raises(ValueError):
            comp.decode(0, 0)
        with pytest.raises(ValueError):
            comp.decode(4, 0)


def test_invalid_protocol_rows():
    with pytest.raises(ValueError):
        OneWayProtocol(np.array([[0.5, 0.4]]), 2, lambda m, y: 0, lambda x, y, a, b: True)
