import inspect
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qiadv.game import COS2_PI_8, Bitstring, win_count, win_vector
from qiadv.info import imax_smoothed, mutual_information, prefix_leak_joint
from qiadv.provers import (
    STRATEGIES,
    ClassicalStrategy,
    ConstantZero,
    MeasurementAngles,
    NoiseParams,
    PrefixLeak,
    QuantumProver,
    RandomHash,
    UniformRandom,
    calibrate,
    classical_prover_run,
    exact_win_probabilities,
    make_strategy,
    memory_density_given_x,
    prover_memory_joint,
    quantum_phase_t0,
    quantum_phase_t1,
)

ANGLES = MeasurementAngles()


def per_copy_rate(n, noise, rng):
    x, y = Bitstring.random(n, rng), Bitstring.random(n, rng)
    a, mem = quantum_phase_t0(x, ANGLES, rng)
    b = quantum_phase_t1(y, mem, ANGLES, noise, rng)
    return win_count(x, y, a, b) / n


class TestQuantum:
    def test_calibration(self):
        np.testing.assert_allclose(exact_win_probabilities(ANGLES), COS2_PI_8, atol=1e-14)
        calibrate(ANGLES)

    def test_bad_angles_are_rejected(self):
        with pytest.raises(ValueError):
            calibrate(MeasurementAngles(alice=(0.0, math.pi / 2)))

    def test_a_is_uniform(self, rng):
        x = Bitstring.random(100_000, rng)
        a, _ = quantum_phase_t0(x, ANGLES, rng)
        assert abs(a.array.mean() - 0.5) <= 3 * math.sqrt(0.25 / 100_000)

    def test_collapsed_memory_states(self, rng):
        x = Bitstring([0] * 200 + [1] * 200)
        a, mem = quantum_phase_t0(x, ANGLES, rng)
        for i in range(400):
            v = mem[i].vector.real
            if x[i] == 0 and a[i] == 0:
                np.testing.assert_allclose(v, [1, 0], atol=1e-15)
            if x[i] == 1 and a[i] == 1:
                np.testing.assert_allclose(v, [-math.sin(math.pi / 4), math.cos(math.pi / 4)], atol=1e-15)

    def test_born_rule_on_basis_state(self, rng):
        from qiadv.provers import QuantumMemory

        n = 200_000
        mem = QuantumMemory(np.tile([1.0, 0.0], (n, 1)))
        b = quantum_phase_t1(Bitstring.zeros(n), mem, ANGLES, NoiseParams(), rng)
        freq = 1 - b.array.mean()
        assert abs(freq - COS2_PI_8) <= 4 * math.sqrt(COS2_PI_8 * (1 - COS2_PI_8) / n)

    def test_noiseless_rate(self, rng):
        assert per_copy_rate(1_000_000, NoiseParams(0.0), rng) == pytest.approx(COS2_PI_8, abs=1e-3)

    @pytest.mark.parametrize("channel", ["readout", "depolarize"])
    def test_noisy_rate(self, rng, channel):
        noise = NoiseParams(0.01, channel)
        assert noise.q == pytest.approx(0.0282842712, abs=1e-9)
        # the flip probability solves (1 - q) cos^2 + q / 2 = cos^2 - gamma
        assert (1 - noise.q) * COS2_PI_8 + noise.q / 2 == pytest.approx(COS2_PI_8 - 0.01, abs=1e-15)
        assert per_copy_rate(1_000_000, noise, rng) == pytest.approx(COS2_PI_8 - 0.01, abs=1e-3)

    @pytest.mark.parametrize("x_i", [0, 1])
    def test_no_signaling(self, x_i):
        rho = memory_density_given_x(x_i, ANGLES)
        assert rho.distance_to_maximally_mixed() <= 1e-12
        assert memory_density_given_x(0).trace_distance(memory_density_given_x(1)) <= 1e-12

    def test_a_does_not_depend_on_y(self, rng):
        x = Bitstring.random(64, rng)
        outs = []
        for y_seed in (1, 2):
            prover = QuantumProver(NoiseParams(0.01), ANGLES, np.random.default_rng(9))
            a = prover.first(x)
            prover.second(Bitstring.random(64, np.random.default_rng(y_seed)))
            outs.append(a)
        assert outs[0] == outs[1]

    def test_memory_destroyed_after_second_phase(self, rng):
        prover = QuantumProver(NoiseParams(), ANGLES, rng)
        prover.first(Bitstring.zeros(8))
        prover.second(Bitstring.zeros(8))
        assert prover.memory.destroyed
        with pytest.raises(RuntimeError):
            prover.second(Bitstring.zeros(8))
        acct = prover.accounting()
        assert acct["tag"] == "model" and acct["declared_width"] == 8 and acct["imax_bits"] == 0.0

    def test_gamma_range(self):
        with pytest.raises(ValueError):
            NoiseParams(0.5)
        with pytest.raises(ValueError):
            NoiseParams(0.01, "bitflip")


class TestClassical:
    def test_prefix_leak_per_copy(self, rng):
        n, c = 40, 10
        strat = PrefixLeak(c)
        for _ in range(20):
            x, y = Bitstring.random(n, rng), Bitstring.random(n, rng)
            a, b, m = classical_prover_run(strat, x, y, strat.shared_randomness(n, rng))
            assert m == Bitstring(x.array[:c])
            assert not a.array.any()
            np.testing.assert_array_equal(b.array[:c], x.array[:c] & y.array[:c])
            assert win_vector(x, y, a, b)[:c].all()

    def test_constant_zero_rate(self, rng):
        n = 100_000
        x, y = Bitstring.random(n, rng), Bitstring.random(n, rng)
        a, b, m = classical_prover_run(ConstantZero(), x, y, None)
        assert len(m) == 0
        assert win_count(x, y, a, b) / n == pytest.approx(0.75, abs=4 * math.sqrt(0.1875 / n))

    @given(st.integers(1, 30), st.integers(0, 2**32 - 1))
    def test_prefix_zero_equals_constant_zero(self, n, seed):
        rng = np.random.default_rng(seed)
        x, y = Bitstring.random(n, rng), Bitstring.random(n, rng)
        assert classical_prover_run(PrefixLeak(0), x, y, None)[:2] == classical_prover_run(ConstantZero(), x, y, None)[:2]

    def test_phase_separation_is_structural(self):
        for cls in STRATEGIES.values():
            assert "y" not in inspect.signature(cls.alice).parameters
        with pytest.raises(TypeError):
            class Cheat(ClassicalStrategy):
                name = "cheat"

                def alice(self, x, y, shared):
                    return x, x

                def bob(self, m, y, shared):
                    return y

    def test_width_is_enforced(self, rng):
        class Overflow(ClassicalStrategy):
            name = "overflow"
            width = 1

            def alice(self, x, shared):
                return np.zeros_like(x), x[:2]

            def bob(self, m, y, shared):
                return np.zeros_like(y)

        x = Bitstring.zeros(4)
        with pytest.raises(ValueError):
            classical_prover_run(Overflow(), x, x, None)

    @pytest.mark.parametrize("text, cls, width", [
        ("constant-zero", ConstantZero, 0), ("prefix-leak:3", PrefixLeak, 3),
        ("random-hash:2", RandomHash, 2), ("uniform-random", UniformRandom, 0),
    ])
    def test_make_strategy(self, text, cls, width):
        s = make_strategy(text)
        assert isinstance(s, cls) and s.width == width

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            make_strategy("telepathy")


class TestMemoryJoint:
    def test_prefix_leak(self):
        joint = prover_memory_joint(PrefixLeak(2), 6)
        assert imax_smoothed(joint, 0.0) == 2.0
        np.testing.assert_allclose(joint.p, prefix_leak_joint(6, 2).p)

    def test_constant_zero_is_product(self):
        joint = prover_memory_joint(ConstantZero(), 5)
        assert joint.is_product()
        assert imax_smoothed(joint, 0.0) == 0.0 and mutual_information(joint) == 0.0

    @settings(max_examples=20)
    @given(st.integers(1, 4), st.integers(4, 9), st.integers(0, 100))
    def test_random_hash_below_width(self, c, n, key_seed):
        joint = prover_memory_joint(RandomHash(c, key_seed=key_seed), n)
        assert imax_smoothed(joint, 0.0) <= c + 1e-12

    def test_uniform_random_not_enumerable(self):
        with pytest.raises(ValueError):
            prover_memory_joint(UniformRandom(), 4)
