"""Compressing one-way classical protocols by rejection sampling.

Alice and Bob share a stream of candidate messages m_1, m_2, ... drawn
i.i.d. from the message marginal p_M, with a uniform u_j attached to each.
Alice accepts the first j with ``u_j <= min(1, p(m_j|x) / (2^c p_M(m_j)))``
and sends j (or gives up after K candidates); Bob continues as the original
protocol would on m_j. For cells under the cap the accepted message has
exactly the law p(m|x); only the mass above the cap, at most beta when
I_s^beta(X:M) <= c, is distorted, and K is sized so aborting is rare.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np

from qiadv.game import GameSpec, threshold_accept
from qiadv.info import JointDistribution, ispec_smoothed
from qiadv.provers import ClassicalStrategy


class CompressionPreconditionError(ValueError):
    def __init__(self, message: str, measured: Optional[float] = None):
        super().__init__(message)
        self.measured = measured


@dataclass
class OneWayProtocol:
    """Alice sends m ~ message_dist[x]; Bob answers from (m, y).

    Inputs are uniform and independent over ``range(n_x)`` and
    ``range(n_y)``. ``relation(x, y, a, b)`` decides success, where
    ``a = alice_out(x, m)`` and ``b = bob_out(m, y)``.
    """

    message_dist: np.ndarray
    n_y: int
    bob_out: Callable[[int, int], Any]
    relation: Callable[[int, int, Any, Any], bool]
    alice_out: Callable[[int, int], Any] = lambda x, m: None
    name: str = "protocol"
    _values: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        P = np.array(self.message_dist, dtype=float)
        if P.ndim != 2 or np.any(P < 0) or not np.allclose(P.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("message_dist must be a row-stochastic matrix p(m|x)")
        P.setflags(write=False)
        self.message_dist = P
        if P.shape[0] * P.shape[1] * self.n_y > 10**6:
            raise ValueError("exact evaluation is limited to 10^6 (x, m, y) atoms")

    @property
    def n_x(self) -> int:
        return self.message_dist.shape[0]

    @property
    def n_m(self) -> int:
        return self.message_dist.shape[1]

    @property
    def p_m(self) -> np.ndarray:
        return self.message_dist.mean(axis=0)

    def joint(self) -> JointDistribution:
        return JointDistribution(self.message_dist / self.n_x)

    def value_table(self) -> np.ndarray:
        """V[x, m] = Pr_y[success | x, m]."""
        if self._values is None:
            V = np.zeros((self.n_x, self.n_m))
            for x, m in itertools.product(range(self.n_x), range(self.n_m)):
                a = self.alice_out(x, m)
                V[x, m] = sum(bool(self.relation(x, y, a, self.bob_out(m, y))) for y in range(self.n_y))
            self._values = V / self.n_y
        return self._values

    def success(self) -> float:
        """Exact success probability under uniform inputs."""
        return float((self.message_dist * self.value_table()).sum() / self.n_x)

    def sample_success(self, trials: int, rng: np.random.Generator) -> "SuccessReport":
        V = self.value_table()
        xs = rng.integers(self.n_x, size=trials)
        cum = np.cumsum(self.message_dist, axis=1)
        ms = (rng.random(trials)[:, None] > cum[xs]).sum(axis=1).clip(max=self.n_m - 1)
        wins = rng.random(trials) < V[xs, ms]
        rate = float(wins.mean())
        return SuccessReport(rate, math.sqrt(rate * (1 - rate) / trials), "monte-carlo", trials)


@dataclass(frozen=True)
class SuccessReport:
    value: float
    se: float
    mode: str
    samples: int = 0
    best_seed: Optional[int] = None
    best_seed_value: Optional[float] = None

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("value", "se", "mode", "samples", "best_seed", "best_seed_value")}


def default_budget(c: float, beta: float) -> int:
    """K = ceil((2/beta) * 2^c * ln(2/beta)) candidates."""
    return math.ceil((2.0 / beta) * 2.0 ** c * math.log(2.0 / beta))


def stated_communication_bound(c: float, beta: float) -> float:
    """c + log(2/beta) + loglog(2/beta) bits."""
    return c + math.log2(2.0 / beta) + math.log2(math.log2(2.0 / beta))


@dataclass
class CompressedProtocol:
    """Rejection-sampling compression of ``orig`` at cap exponent ``c``."""

    orig: OneWayProtocol
    c: float
    beta: float
    K: int
    stream_seed: int = 0
    measured_ispec: Optional[float] = None

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("candidate budget K must be >= 1")
        p_m = self.orig.p_m
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(p_m > 0, self.orig.message_dist / (2.0 ** self.c * p_m), 0.0)
        self.acceptance = np.minimum(1.0, ratio)
        self._cum_pm = np.cumsum(p_m)

    @property
    def communication_bits(self) -> int:
        """Bits for an index in 1..K plus the abort symbol."""
        return math.ceil(math.log2(self.K + 1))

    @property
    def stated_bound_bits(self) -> float:
        return stated_communication_bound(self.c, self.beta)

    def tail_mass_above_cap(self) -> float:
        """Pr_{x, m}[p(m|x) > 2^c p_M(m)]."""
        # 2**c only round-trips a cell ratio to ~1 ulp
        over = self.orig.message_dist > 2.0 ** self.c * self.orig.p_m * (1 + 1e-12)
        return float((self.orig.message_dist * over).sum() / self.orig.n_x)

    def per_candidate_accept(self) -> np.ndarray:
        """Pr[one candidate accepted | x] = sum_m p_M(m) * acceptance[x, m]."""
        return self.acceptance @ self.orig.p_m

    def abort_probability(self) -> float:
        return float(np.mean((1.0 - self.per_candidate_accept()) ** self.K))

    def accepted_distribution(self) -> np.ndarray:
        """Law of Alice's accepted message given x, conditioned on not aborting."""
        w = self.acceptance * self.orig.p_m
        return w / w.sum(axis=1, keepdims=True)

    def stream(self, seed: int):
        rng = np.random.default_rng([self.stream_seed, seed])
        u_m = rng.random(self.K)
        cands = np.searchsorted(self._cum_pm, u_m * self._cum_pm[-1], side="right").clip(max=self.orig.n_m - 1)
        return cands, rng.random(self.K)

    def encode_all(self, seed: int) -> np.ndarray:
        """Accepted candidate index (1-based) for every x under one stream; 0 on abort."""
        cands, u = self.stream(seed)
        ok = u[None, :] <= self.acceptance[:, cands]
        first = ok.argmax(axis=1)
        return np.where(ok.any(axis=1), first + 1, 0)

    def encode(self, x: int, seed: int) -> int:
        return int(self.encode_all(seed)[x])

    def decode(self, index: int, seed: int) -> int:
        if not 1 <= index <= self.K:
            raise ValueError("index outside 1..K")
        return int(self.stream(seed)[0][index - 1])

    def seed_success(self, seed: int) -> float:
        """Exact success over uniform (x, y) with the stream fixed; aborts lose."""
        idx = self.encode_all(seed)
        cands, _ = self.stream(seed)
        V = self.orig.value_table()
        live = idx > 0
        ms = cands[np.maximum(idx, 1) - 1]
        return float(np.where(live, V[np.arange(self.orig.n_x), ms], 0.0).mean())

    def expected_success(self) -> float:
        """Success averaged over the stream, from the exact accepted-message law."""
        keep = 1.0 - (1.0 - self.per_candidate_accept()) ** self.K
        law = self.accepted_distribution() * keep[:, None]
        return float((law * self.orig.value_table()).sum() / self.orig.n_x)


def compress(orig: OneWayProtocol, c: float, beta: float, K: Optional[int] = None, stream_seed: int = 0) -> CompressedProtocol:
    """Compress ``orig`` after checking I_s^beta(X:M) <= c and 0 < beta <= alpha/2."""
    alpha = orig.success()
    if not 0.0 < beta <= alpha / 2.0:
        raise CompressionPreconditionError(f"need 0 < beta <= alpha/2 = {alpha / 2:.6g}, got beta={beta}")
    measured = ispec_smoothed(orig.joint(), beta)
    if measured > c + 1e-12:
        raise CompressionPreconditionError(
            f"I_s^beta(X:M) = {measured:.6g} exceeds cap exponent c = {c}", measured=measured
        )
    return CompressedProtocol(
        orig, c, beta, K if K is not None else default_budget(c, beta), stream_seed, measured
    )


def evaluate_success(
    protocol, mode: str = "exact", *, seeds: int = 10_000, seed: int = 0
) -> SuccessReport:
    """Success of an original or compressed protocol.

    ``exact`` enumerates inputs (and, for a compressed protocol, uses the
    exact accepted-message law); ``monte-carlo`` samples, for a compressed
    protocol by sweeping ``seeds`` candidate streams, and also reports the
    best single stream, i.e. the best deterministic protocol seen.
    """
    if mode not in ("exact", "monte-carlo"):
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(protocol, OneWayProtocol):
        if mode == "exact":
            return SuccessReport(protocol.success(), 0.0, "exact")
        return protocol.sample_success(seeds, np.random.default_rng(seed))
    if mode == "exact":
        return SuccessReport(protocol.expected_success(), 0.0, "exact")
    values = np.array([protocol.seed_success(seed + s) for s in range(seeds)])
    best = int(values.argmax())
    se = float(values.std(ddof=1) / math.sqrt(seeds)) if seeds > 1 else 0.0
    return SuccessReport(float(values.mean()), se, "monte-carlo", seeds, seed + best, float(values[best]))


# -- protocol builders -----------------------------------------------------

def _int_bits(v: int, n: int) -> np.ndarray:
    return np.array([(v >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.uint8)


def one_way_from_strategy(strategy: ClassicalStrategy, spec: GameSpec) -> OneWayProtocol:
    """View a classical CHSH prover as a one-way protocol for CHSH^{t/n}.

    The transcript is (shared value, message); Bob reads the shared value
    off the transcript, which turns shared coins into Alice's private ones.
    Inputs are enumerated, so ``spec.n`` must be small.
    """
    n = spec.n
    if n > 6:
        raise ValueError("exhaustive one-way view limited to n <= 6")
    support = strategy.shared_support(n)
    transcripts: Dict[tuple, int] = {}
    outputs: Dict[tuple, np.ndarray] = {}
    cells: Dict[tuple, float] = {}
    for xi in range(1 << n):
        x = _int_bits(xi, n)
        for k, (weight, shared) in enumerate(support):
            a, m = strategy.alice(x.copy(), shared)
            key = (k, np.asarray(m, dtype=np.uint8).tobytes())
            j = transcripts.setdefault(key, len(transcripts))
            outputs[(xi, j)] = np.asarray(a, dtype=np.uint8)
            cells[(xi, j)] = cells.get((xi, j), 0.0) + weight
    P = np.zeros((1 << n, len(transcripts)))
    for (xi, j), w in cells.items():
        P[xi, j] = w
    by_index = {j: key for key, j in transcripts.items()}
    shared_values = [s for _, s in support]

    def alice_out(xi, j):
        return outputs.get((xi, j), np.zeros(n, dtype=np.uint8))

    def bob_out(j, yi):
        k, m = by_index[j]
        return strategy.bob(np.frombuffer(m, dtype=np.uint8).copy(), _int_bits(yi, n), shared_values[k])

    def relation(xi, yi, a, b):
        return threshold_accept(spec, _int_bits(xi, n), _int_bits(yi, n), a, b)

    return OneWayProtocol(P, 1 << n, bob_out, relation, alice_out, name=f"{strategy.name}@n={n},t={spec.t}")


def noisy_copy_protocol(size: int, eta: float) -> OneWayProtocol:
    """Alice sends x, replaced by a uniform symbol with probability eta; Bob must output x + y mod size."""
    P = np.full((size, size), eta / size) + (1 - eta) * np.eye(size)
    return OneWayProtocol(
        P, size,
        bob_out=lambda m, y: (m + y) % size,
        relation=lambda x, y, a, b: b == (x + y) % size,
        name=f"noisy-copy(size={size},eta={eta})",
    )


def constant_message_protocol(n_x: int = 4, n_y: int = 4) -> OneWayProtocol:
    """A single message; Bob outputs ``y`` and the relation only checks Bob."""
    return OneWayProtocol(
        np.ones((n_x, 1)), n_y,
        bob_out=lambda m, y: y,
        relation=lambda x, y, a, b: b == y,
        name="constant-message",
    )


def parity_hint_protocol(bits: int, flip: float) -> OneWayProtocol:
    """Alice sends the parity of x through a binary symmetric channel; Bob guesses x's parity xor y."""
    n_x = 1 << bits
    parity = np.array([bin(x).count("1") & 1 for x in range(n_x)])
    P = np.zeros((n_x, 2))
    P[np.arange(n_x), parity] = 1 - flip
    P[np.arange(n_x), 1 - parity] = flip
    return OneWayProtocol(
        P, 2,
        bob_out=lambda m, y: m ^ y,
        relation=lambda x, y, a, b: b == ((bin(x).count("1") & 1) ^ y),
        name=f"parity-hint(bits={bits},flip={flip})",
    )


def accept_all_protocol(n_x: int = 4, n_m: int = 4) -> OneWayProtocol:
    rng = np.random.default_rng(7)
    P = rng.dirichlet(np.ones(n_m), size=n_x)
    return OneWayProtocol(P, 2, bob_out=lambda m, y: 0, relation=lambda x, y, a, b: True, name="accept-all")
