"""Honest quantum prover simulation and classical bounded-memory provers.

The quantum prover holds n EPR pairs. At t0 Alice's halves are measured in
a real basis chosen by x and the outcomes form ``a``; the post-measurement
halves on Bob's side are the memory register kept until t1, when they are
measured in a basis chosen by y to give ``b``.

A classical simulation of this has to describe Bob's post-measurement qubit,
and that description depends on x. The register itself does not: averaged
over Alice's outcome its state is I/2 for either x (see
:func:`memory_density_given_x`). :class:`QuantumMemory` therefore carries two
tags, ``model`` for the register and ``plumbing`` for the simulator's
classical description of it.
"""

from __future__ import annotations

import inspect
import itertools
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from qiadv.game import COS2_PI_8, Bitstring, BitsLike, as_bits
from qiadv.info import JointDistribution

EPR = np.eye(2, dtype=complex) / math.sqrt(2.0)
"""(|00> + |11>)/sqrt 2 as a 2x2 amplitude matrix indexed [alice, bob]."""

STATE_TOL = 1e-12
MAX_GAMMA = 0.35


def real_basis(theta) -> np.ndarray:
    """Rows are |theta> and |theta + pi/2>; broadcasts over an array of angles."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    rows = np.stack([np.stack([c, s], axis=-1), np.stack([-s, c], axis=-1)], axis=-2)
    return rows.astype(complex)


@dataclass(frozen=True)
class QubitState:
    amplitudes: Tuple[complex, complex]

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex)
        if v.shape != (2,):
            raise ValueError("a qubit state has exactly two amplitudes")
        if abs(np.vdot(v, v).real - 1.0) > STATE_TOL:
            raise ValueError(f"qubit state not normalized: |v|^2 = {np.vdot(v, v).real}")
        object.__setattr__(self, "amplitudes", (complex(v[0]), complex(v[1])))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=complex)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        if np.max(np.abs(m - m.conj().T)) > STATE_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > STATE_TOL or abs(np.trace(m).imag) > STATE_TOL:
            raise ValueError(f"density matrix trace {np.trace(m)} != 1")
        if np.min(np.linalg.eigvalsh(m)) < -STATE_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def trace_distance(self, other: "DensityMatrix") -> float:
        eig = np.linalg.eigvalsh(self.matrix - other.matrix)
        return 0.5 * float(np.abs(eig).sum())

    def distance_to_maximally_mixed(self) -> float:
        return self.trace_distance(MAXIMALLY_MIXED)


MAXIMALLY_MIXED = DensityMatrix(np.eye(2) / 2)


@dataclass(frozen=True)
class MeasurementAngles:
    """Real measurement bases, indexed by the input bit."""

    alice: Tuple[float, float] = (0.0, math.pi / 4)
    bob: Tuple[float, float] = (math.pi / 8, -math.pi / 8)

    def __post_init__(self):
        if len(self.alice) != 2 or len(self.bob) != 2:
            raise ValueError("need two angles per party")
        object.__setattr__(self, "alice", tuple(float(v) for v in self.alice))
        object.__setattr__(self, "bob", tuple(float(v) for v in self.bob))


def exact_win_probabilities(angles: MeasurementAngles) -> np.ndarray:
    """Born-rule win probability for each input pair, W[x, y], on the full two-qubit state."""
    psi = EPR.ravel()
    out = np.zeros((2, 2))
    for x, y in itertools.product((0, 1), repeat=2):
        ea = real_basis(angles.alice[x])
        fb = real_basis(angles.bob[y])
        for a, b in itertools.product((0, 1), repeat=2):
            if (a ^ b) == (x & y):
                out[x, y] += abs(np.vdot(np.kron(ea[a], fb[b]), psi)) ** 2
    return out


def calibrate(angles: MeasurementAngles, tol: float = 1e-12) -> np.ndarray:
    """Raise unless every input pair is won with probability cos^2(pi/8)."""
    w = exact_win_probabilities(angles)
    if np.max(np.abs(w - COS2_PI_8)) > tol:
        raise ValueError(f"angles do not reach cos^2(pi/8) on every input pair: {w.tolist()}")
    return w


NOISE_CHANNELS = ("readout", "depolarize")


@dataclass(frozen=True)
class NoiseParams:
    """Per-copy deficit ``gamma`` below cos^2(pi/8).

    With probability ``q = gamma / (cos^2(pi/8) - 1/2)`` a copy's outcome is
    replaced by a fair coin: on Bob's bit for ``readout``, or by
    depolarizing the memory qubit to I/2 for ``depolarize``. Either way a
    copy is won with probability exactly ``cos^2(pi/8) - gamma``.
    """

    gamma: float = 0.0
    channel: str = "readout"

    def __post_init__(self):
        if not 0.0 <= self.gamma <= MAX_GAMMA:
            raise ValueError(f"gamma must lie in [0, {MAX_GAMMA}], got {self.gamma}")
        if self.channel not in NOISE_CHANNELS:
            raise ValueError(f"unknown noise channel {self.channel!r}; choose from {NOISE_CHANNELS}")

    @property
    def q(self) -> float:
        return self.gamma / (COS2_PI_8 - 0.5)

    @property
    def per_copy_win(self) -> float:
        return COS2_PI_8 - self.gamma


class QuantumMemory:
    """Bob's halves of the EPR pairs between t0 and t1."""

    TAG = "model"
    PLUMBING_TAG = "plumbing"

    def __init__(self, states: np.ndarray):
        states = np.asarray(states, dtype=complex)
        if states.ndim != 2 or states.shape[1] != 2:
            raise ValueError("memory must be an (n, 2) array of amplitudes")
        norms = np.sum(np.abs(states) ** 2, axis=1)
        if np.max(np.abs(norms - 1.0)) > STATE_TOL:
            raise ValueError("memory holds unnormalized qubit states")
        if np.max(np.abs(states.imag)) > STATE_TOL:
            raise ValueError("memory amplitudes should be real for real-basis strategies")
        self._states: Optional[np.ndarray] = states

    @property
    def destroyed(self) -> bool:
        return self._states is None

    @property
    def states(self) -> np.ndarray:
        if self._states is None:
            raise RuntimeError("memory register was already consumed")
        return self._states

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, i: int) -> QubitState:
        v = self.states[i]
        return QubitState((v[0], v[1]))

    def destroy(self) -> None:
        self._states = None

    def accounting(self) -> Dict[str, Any]:
        return {
            "width_qubits": None if self._states is None else len(self._states),
            "tag": self.TAG,
            "imax_bits": 0.0,
            "note": "register state is I/2 conditioned on either x_i; classical amplitudes are "
            f"{self.PLUMBING_TAG}",
        }


def quantum_phase_t0(
    x: BitsLike, angles: MeasurementAngles, rng: np.random.Generator
) -> Tuple[Bitstring, QuantumMemory]:
    """Measure Alice's half of each EPR pair; return ``a`` and Bob's collapsed halves."""
    xs = as_bits(x)
    n = xs.shape[0]
    basis = real_basis(np.asarray(angles.alice)[xs])  # (n, outcome, alice component)
    # Bob's unnormalized conditional vectors: sum_i conj(e_k[i]) * EPR[i, :]
    bob = np.einsum("nki,ij->nkj", basis.conj(), EPR)
    probs = np.sum(np.abs(bob) ** 2, axis=2)
    a = (rng.random(n) >= probs[:, 0]).astype(np.uint8)
    chosen = bob[np.arange(n), a]
    chosen = chosen / np.sqrt(probs[np.arange(n), a])[:, None]
    return Bitstring(a), QuantumMemory(chosen)


def quantum_phase_t1(
    y: BitsLike,
    memory: QuantumMemory,
    angles: MeasurementAngles,
    noise: NoiseParams,
    rng: np.random.Generator,
) -> Bitstring:
    """Measure each memory qubit in Bob's basis for y_i, through the noise channel."""
    ys = as_bits(y)
    states = memory.states
    n = ys.shape[0]
    if len(states) != n:
        raise ValueError(f"length mismatch: {n} inputs for {len(states)} memory qubits")
    hit = rng.random(n) < noise.q
    u = rng.random(n)
    coin = rng.integers(0, 2, size=n, dtype=np.uint8)
    if noise.channel == "depolarize" and np.any(hit):
        # I/2 unravelled as a uniformly random computational basis state
        states = states.copy()
        states[hit] = np.eye(2, dtype=complex)[coin[hit]]
    f0 = real_basis(np.asarray(angles.bob)[ys])[:, 0, :]
    p0 = np.abs(np.einsum("ni,ni->n", f0.conj(), states)) ** 2
    b = (u >= p0).astype(np.uint8)
    if noise.channel == "readout":
        b = np.where(hit, coin, b).astype(np.uint8)
    return Bitstring(b)


def memory_density_given_x(x_i: int, angles: MeasurementAngles = MeasurementAngles()) -> DensityMatrix:
    """State of one memory qubit given Alice's input bit, averaged over her outcome."""
    if x_i not in (0, 1):
        raise ValueError("x_i must be a bit")
    basis = real_basis(angles.alice[x_i])
    rho = np.zeros((2, 2), dtype=complex)
    for k in (0, 1):
        w = basis[k].conj() @ EPR  # unnormalized, |w|^2 = Pr[outcome k]
        rho += np.outer(w, w.conj())
    if np.max(np.abs(rho.imag)) > STATE_TOL:
        raise ValueError("unexpected imaginary part in a real-basis strategy")
    return DensityMatrix(rho)


class QuantumProver:
    """Two-phase honest prover: :meth:`first` at t0, :meth:`second` at t1."""

    kind = "quantum-sim"

    def __init__(
        self,
        noise: NoiseParams = NoiseParams(),
        angles: MeasurementAngles = MeasurementAngles(),
        rng: Optional[np.random.Generator] = None,
    ):
        calibrate(angles)
        self.noise = noise
        self.angles = angles
        self.rng = rng if rng is not None else np.random.default_rng()
        self.memory: Optional[QuantumMemory] = None

    def first(self, x: BitsLike) -> Bitstring:
        a, self.memory = quantum_phase_t0(x, self.angles, self.rng)
        self._width = len(self.memory)
        return a

    def second(self, y: BitsLike) -> Bitstring:
        if self.memory is None or self.memory.destroyed:
            raise RuntimeError("second phase called without a live memory register")
        b = quantum_phase_t1(y, self.memory, self.angles, self.noise, self.rng)
        self.memory.destroy()
        return b

    def accounting(self) -> Dict[str, Any]:
        return {
            "tag": QuantumMemory.TAG,
            "declared_width": getattr(self, "_width", None),
            "unit": "qubits",
            "imax_bits": 0.0,
            "plumbing": "simulator amplitudes depend on x; not part of the register's accounting",
        }


# -- classical provers -----------------------------------------------------

_EMPTY = np.zeros(0, dtype=np.uint8)
_EMPTY.setflags(write=False)


class ClassicalStrategy:
    """A deterministic two-phase classical prover with shared randomness.

    Subclasses implement ``alice(x, shared) -> (a, m)`` and
    ``bob(m, y, shared) -> b``. Alice never receives y and Bob never
    receives x; a subclass whose methods ask for them is rejected when the
    class is defined.
    """

    name = "abstract"
    width = 0

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        for method, expected in (("alice", ["x", "shared"]), ("bob", ["m", "y", "shared"])):
            fn = getattr(cls, method, None)
            if fn is None:
                continue
            params = [p for p in inspect.signature(fn).parameters if p != "self"]
            if params != expected:
                raise TypeError(
                    f"{cls.__name__}.{method} must take exactly {expected}, got {params}"
                )

    def shared_randomness(self, n: int, rng: np.random.Generator) -> Any:
        return None

    def shared_support(self, n: int) -> List[Tuple[float, Any]]:
        """Exact (probability, value) list of the shared randomness, for accounting."""
        return [(1.0, None)]

    def alice(self, x, shared):
        raise NotImplementedError

    def bob(self, m, y, shared):
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(width={self.width})"


class ConstantZero(ClassicalStrategy):
    name = "constant-zero"

    def alice(self, x, shared):
        return np.zeros_like(x), _EMPTY

    def bob(self, m, y, shared):
        return np.zeros_like(y)


class PrefixLeak(ClassicalStrategy):
    """Remember the first ``c`` input bits and win those copies outright."""

    name = "prefix-leak"

    def __init__(self, c: int):
        if c < 0:
            raise ValueError("c must be >= 0")
        self.width = int(c)

    def alice(self, x, shared):
        return np.zeros_like(x), x[: self.width].copy()

    def bob(self, m, y, shared):
        b = np.zeros_like(y)
        k = min(len(m), len(y))
        b[:k] = m[:k] & y[:k]
        return b


class RandomHash(ClassicalStrategy):
    """Remember ``c`` parities of x along shared random directions.

    The shared randomness picks one of ``family_size`` GF(2) matrices drawn
    from ``key_seed``; the outputs are a = b = 0, so the message is stored
    but never helps.
    """

    name = "random-hash"

    def __init__(self, c: int, family_size: int = 16, key_seed: int = 0):
        if c < 0 or family_size < 1:
            raise ValueError("need c >= 0 and family_size >= 1")
        self.width = int(c)
        self.family_size = int(family_size)
        self.key_seed = int(key_seed)
        self._keys: Dict[int, np.ndarray] = {}

    def keys(self, n: int) -> np.ndarray:
        if n not in self._keys:
            rng = np.random.default_rng([self.key_seed, n, self.width])
            self._keys[n] = rng.integers(0, 2, size=(self.family_size, self.width, n), dtype=np.uint8)
        return self._keys[n]

    def shared_randomness(self, n, rng):
        return int(rng.integers(self.family_size))

    def shared_support(self, n):
        return [(1.0 / self.family_size, k) for k in range(self.family_size)]

    def alice(self, x, shared):
        key = self.keys(len(x))[shared]
        m = (key.astype(np.int64) @ x.astype(np.int64)) % 2
        return np.zeros_like(x), m.astype(np.uint8)

    def bob(self, m, y, shared):
        return np.zeros_like(y)


class UniformRandom(ClassicalStrategy):
    """Independent fair coins for every output bit, drawn from shared randomness."""

    name = "uniform-random"

    def shared_randomness(self, n, rng):
        return rng.integers(0, 2, size=(2, n), dtype=np.uint8)

    def shared_support(self, n):
        raise ValueError("uniform-random has 4^n shared values; exact accounting is not enumerable")

    def alice(self, x, shared):
        return shared[0].copy(), _EMPTY

    def bob(self, m, y, shared):
        return shared[1].copy()


STRATEGIES: Dict[str, Callable[..., ClassicalStrategy]] = {
    ConstantZero.name: ConstantZero,
    PrefixLeak.name: PrefixLeak,
    RandomHash.name: RandomHash,
    UniformRandom.name: UniformRandom,
}


def make_strategy(spec: str, **params) -> ClassicalStrategy:
    """Build a strategy from ``name`` or ``name:c`` (e.g. ``prefix-leak:4``)."""
    name, _, arg = spec.partition(":")
    if name not in STRATEGIES:
        raise ValueError(f"unknown classical strategy {name!r}; known: {sorted(STRATEGIES)}")
    if arg:
        params.setdefault("c", int(arg))
    return STRATEGIES[name](**params)


def classical_prover_run(
    strategy: ClassicalStrategy, x: BitsLike, y: BitsLike, shared: Any
) -> Tuple[Bitstring, Bitstring, Bitstring]:
    """Run both phases; returns (a, b, m) and enforces |m| <= declared width."""
    xs, ys = as_bits(x), as_bits(y)
    if xs.shape != ys.shape:
        raise ValueError("length mismatch between x and y")
    a, m = strategy.alice(xs.copy(), shared)
    m = np.asarray(m, dtype=np.uint8)
    if m.size > strategy.width:
        raise ValueError(f"{strategy!r} emitted {m.size} memory bits, declared {strategy.width}")
    b = strategy.bob(m.copy(), ys.copy(), shared)
    return Bitstring(a), Bitstring(b), Bitstring(m)


MAX_ACCOUNTING_N = 12


def prover_memory_joint(strategy: ClassicalStrategy, n: int) -> JointDistribution:
    """Exact p(x, m) under uniform x and the strategy's shared randomness.

    Row ``x`` is the integer whose binary expansion (most significant bit
    first) is the input string; columns are the distinct messages in sorted
    order.
    """
    if not 1 <= n <= MAX_ACCOUNTING_N:
        raise ValueError(f"exact accounting enumerates 2^n inputs; need 1 <= n <= {MAX_ACCOUNTING_N}")
    support = strategy.shared_support(n)
    rows = 1 << n
    cells: Dict[Tuple[int, bytes], float] = {}
    for xi in range(rows):
        x = np.array([(xi >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.uint8)
        for weight, shared in support:
            _, m = strategy.alice(x.copy(), shared)
            key = (xi, np.asarray(m, dtype=np.uint8).tobytes())
            cells[key] = cells.get(key, 0.0) + weight / rows
    messages = sorted({k[1] for k in cells})
    col = {m: j for j, m in enumerate(messages)}
    arr = np.zeros((rows, len(messages)))
    for (xi, m), v in cells.items():
        arr[xi, col[m]] += v
    return JointDistribution(arr)
