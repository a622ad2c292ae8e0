"""CHSH, its parallel and threshold repetitions, and their values.

Copies are indexed 0-based in code; documentation talks about copy ``i`` of
``n`` in the usual 1-based sense.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np

GOLDEN_CHSH = (1 + math.sqrt(5)) / 4
"""Per-copy rate in the classical bound for CHSH^n, ((1+sqrt 5)/4)."""

COS2_PI_8 = math.cos(math.pi / 8) ** 2
"""Single-copy quantum value of CHSH."""

THRESHOLD_RATIO = Fraction(83, 100)
"""Threshold fraction t/n used by the protocol."""


class Bitstring:
    """Immutable fixed-length bit vector backed by a ``uint8`` array.

    Length 0 is allowed (an empty classical message); game inputs always
    have length ``n >= 1`` because :class:`GameSpec` requires it.
    """

    __slots__ = ("_bits",)

    def __init__(self, bits: Union[Sequence[int], np.ndarray, "Bitstring"]):
        if isinstance(bits, Bitstring):
            arr = bits._bits
        else:
            arr = np.array(bits, dtype=np.int64).ravel()
            if np.any((arr != 0) & (arr != 1)):
                raise ValueError("bitstring entries must be 0 or 1")
            arr = arr.astype(np.uint8)
            arr.setflags(write=False)
        self._bits = arr

    @classmethod
    def zeros(cls, n: int) -> "Bitstring":
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Bitstring":
        return cls(rng.integers(0, 2, size=n, dtype=np.uint8))

    @classmethod
    def from_str(cls, s: str) -> "Bitstring":
        return cls([int(ch) for ch in s])

    @classmethod
    def from_hex(cls, text: str, n: int) -> "Bitstring":
        """Decode ``n`` bits written most-significant-bit first.

        The hex string must have exactly ``ceil(n/4)`` digits and any padding
        bits after position ``n`` must be zero.
        """
        if n < 0:
            raise ValueError("bitstring length must be nonnegative")
        digits = -(-n // 4)
        if len(text) != digits:
            raise ValueError(f"expected {digits} hex digits for {n} bits, got {len(text)}")
        try:
            raw = bytes.fromhex(text + "0" * (len(text) % 2))
        except ValueError as exc:
            raise ValueError(f"invalid hex payload: {exc}") from None
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
        if np.any(bits[n:]):
            raise ValueError("nonzero padding bits")
        return cls(bits[:n])

    def hex(self) -> str:
        digits = -(-len(self) // 4)
        return np.packbits(self._bits).tobytes().hex()[:digits]

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the bits."""
        return self._bits

    def __len__(self) -> int:
        return int(self._bits.size)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Bitstring(self._bits[i])
        return int(self._bits[i])

    def __iter__(self):
        return (int(b) for b in self._bits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Bitstring):
            return NotImplemented
        return np.array_equal(self._bits, other._bits)

    def __hash__(self) -> int:
        return hash((len(self), self._bits.tobytes()))

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self._bits)

    def __repr__(self) -> str:
        s = str(self)
        if len(s) > 32:
            s = s[:29] + "..."
        return f"Bitstring({s!r}, n={len(self)})"


BitsLike = Union[Bitstring, Sequence[int], np.ndarray]


def as_bits(v: BitsLike) -> np.ndarray:
    if isinstance(v, Bitstring):
        return v.array
    return np.asarray(v, dtype=np.uint8)


@dataclass(frozen=True)
class GameSpec:
    """The threshold game CHSH^{t/n}: win at least ``t`` of ``n`` copies.

    ``t = 0`` is admitted as the degenerate always-accept game.
    """

    n: int
    t: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if int(self.t) != self.t or not 0 <= self.t <= self.n:
            raise ValueError(f"need 0 <= t <= n, got t={self.t!r}, n={self.n}")

    @classmethod
    def with_ratio(cls, n: int, ratio: Union[Fraction, float, str] = THRESHOLD_RATIO) -> "GameSpec":
        """Game with ``t = ceil(ratio * n)``; floats are read as decimals."""
        if isinstance(ratio, float):
            ratio = Fraction(repr(ratio))
        return cls(n, math.ceil(Fraction(ratio) * n))

    @property
    def epsilon(self) -> float:
        """Margin of t/n above the classical per-copy rate (1+sqrt 5)/4."""
        return self.t / self.n - GOLDEN_CHSH


def chsh_predicate(x: int, y: int, a: int, b: int) -> bool:
    for v in (x, y, a, b):
        if v not in (0, 1):
            raise ValueError(f"CHSH arguments must be bits, got {(x, y, a, b)}")
    return (a ^ b) == (x & y)


def win_vector(x: BitsLike, y: BitsLike, a: BitsLike, b: BitsLike) -> np.ndarray:
    """Boolean array of per-copy CHSH wins."""
    xs, ys, as_, bs = (as_bits(v) for v in (x, y, a, b))
    n = xs.shape[-1]
    if any(v.shape[-1] != n for v in (ys, as_, bs)):
        raise ValueError(
            f"length mismatch: {[v.shape[-1] for v in (xs, ys, as_, bs)]}"
        )
    return (as_ ^ bs) == (xs & ys)


def win_count(x: BitsLike, y: BitsLike, a: BitsLike, b: BitsLike) -> int:
    return int(np.count_nonzero(win_vector(x, y, a, b)))


def threshold_accept(spec: GameSpec, x: BitsLike, y: BitsLike, a: BitsLike, b: BitsLike) -> bool:
    if as_bits(x).shape[-1] != spec.n:
        raise ValueError(f"length mismatch: expected {spec.n} bits")
    return win_count(x, y, a, b) >= spec.t


def quantum_value(n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.cos(math.pi / 8) ** (2 * n)


def classical_value_bound(n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return GOLDEN_CHSH ** n


def chernoff_bound(n: float, delta: float, gamma: float) -> float:
    """Hoeffding tail exp(-2 (gamma - delta)^2 n) for the mean of n Bernoulli(delta)."""
    for name, v in (("delta", delta), ("gamma", gamma)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return math.exp(-2.0 * (gamma - delta) ** 2 * n)


Predicate = Callable[[int, int, int, int], bool]


def _copy_wins_table(n: int, predicate: Predicate) -> np.ndarray:
    """C[x, y, a, b] = number of copies won, all arguments as n-bit integers."""
    size = 1 << n
    table = np.zeros((size, size, size, size), dtype=np.int64)
    for x, y, a, b in itertools.product(range(size), repeat=4):
        table[x, y, a, b] = sum(
            bool(predicate((x >> i) & 1, (y >> i) & 1, (a >> i) & 1, (b >> i) & 1))
            for i in range(n)
        )
    return table


def brute_force_value(
    n: int,
    t: int | None = None,
    *,
    exact: bool = False,
    predicate: Predicate = chsh_predicate,
) -> Union[float, Fraction]:
    """Classical value of CHSH^{t/n} by exhausting deterministic strategies.

    ``t=None`` means the full parallel game (``t = n``). Every pair of
    deterministic tables (a = A(x), b = B(y)) is scored over the 4^n uniform
    inputs; n=2 is 256 x 256 pairs. Returns a ``Fraction`` when ``exact``.
    """
    if n not in (1, 2):
        raise ValueError(f"brute force is limited to n <= 2, got n={n}")
    t = n if t is None else t
    if not 0 <= t <= n:
        raise ValueError(f"need 0 <= t <= n, got t={t}")
    size = 1 << n
    tables = np.array(list(itertools.product(range(size), repeat=size)), dtype=np.int64)
    copies = _copy_wins_table(n, predicate)
    wins = np.zeros((len(tables), len(tables)), dtype=np.int64)
    for x in range(size):
        ax = tables[:, x]
        for y in range(size):
            won = copies[x, y][ax][:, tables[:, y]] >= t
            wins += won
    value = Fraction(int(wins.max()), size * size)
    return value if exact else float(value)
