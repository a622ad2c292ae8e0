"""Information measures on finite classical joint distributions p(x, m).

All logarithms are base 2. Smoothed quantities are floored at 0 bits: a
smoothing budget large enough to discard every cell above the product
distribution gives 0 rather than a negative (or -inf) value.

Smoothing reading used by :func:`imax_smoothed`: the smoothed distribution
may be subnormalized, and removing mass ``r`` costs ``r/2`` in half-L1
distance, so budget ``gamma`` allows removing up to ``2*gamma``. Pass
``normalized=True`` for the variant where the smoothed distribution must
still sum to one (removed mass is then re-added under the cap, costing
``r``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

MASS_TOL = 1e-12
_NORM_TOL = 1e-9


@dataclass(frozen=True)
class JointDistribution:
    """Nonnegative matrix ``p[x, m]``; rows index X, columns index M."""

    p: np.ndarray

    def __post_init__(self):
        arr = np.array(self.p, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"joint distribution must be a nonempty matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("joint distribution entries must be finite and >= 0")
        total = arr.sum()
        if not 0 < total <= 1 + _NORM_TOL:
            raise ValueError(f"total mass must lie in (0, 1], got {total}")
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    @classmethod
    def from_pairs(
        cls, samples: Mapping[Tuple[Hashable, Hashable], float]
    ) -> Tuple["JointDistribution", list, list]:
        """Build from ``{(x, m): prob}``; returns the distribution and row/column labels."""
        xs = sorted({k[0] for k in samples}, key=repr)
        ms = sorted({k[1] for k in samples}, key=repr)
        xi = {x: i for i, x in enumerate(xs)}
        mi = {m: j for j, m in enumerate(ms)}
        arr = np.zeros((len(xs), len(ms)))
        for (x, m), v in samples.items():
            arr[xi[x], mi[m]] += v
        return cls(arr), xs, ms

    @classmethod
    def product(cls, px: Sequence[float], pm: Sequence[float]) -> "JointDistribution":
        return cls(np.outer(px, pm))

    @classmethod
    def from_text(cls, source: Union[str, Path]) -> "JointDistribution":
        """Parse one row per x of whitespace-separated probabilities.

        ``source`` is a path or the text itself; blank lines and ``#``
        comments are skipped.
        """
        text = source.read_text() if isinstance(source, Path) else source
        if isinstance(source, str) and "\n" not in source and Path(source).is_file():
            text = Path(source).read_text()
        rows = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                rows.append([float(v) for v in line.split()])
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("matrix rows must be nonempty and of equal length")
        return cls(np.array(rows))

    def to_text(self) -> str:
        return "\n".join(" ".join(repr(float(v)) for v in row) for row in self.p) + "\n"

    @property
    def shape(self) -> Tuple[int, int]:
        return self.p.shape

    @property
    def total(self) -> float:
        return float(self.p.sum())

    @property
    def px(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def pm(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def is_normalized(self) -> bool:
        return abs(self.total - 1.0) <= _NORM_TOL

    def is_product(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.p, np.outer(self.px, self.pm), rtol=0.0, atol=tol))


def _require_normalized(p: JointDistribution) -> None:
    if not p.is_normalized():
        raise ValueError(f"measure requires a normalized distribution (total mass {p.total})")


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"smoothing budget must lie in [0, 1], got {gamma}")
    return gamma


def _entropy(probs: np.ndarray) -> float:
    q = probs[probs > 0]
    return float(-(q * np.log2(q)).sum())


def mutual_information(p: JointDistribution) -> float:
    """H(X) + H(M) - H(XM) in bits."""
    _require_normalized(p)
    value = _entropy(p.px) + _entropy(p.pm) - _entropy(p.p.ravel())
    return max(value, 0.0)


def _support_ratios(p: JointDistribution) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Positive-mass cells: (mass, product mass, ratio), sorted by ratio descending.

    Ties keep cell (row-major) order.
    """
    prod = np.outer(p.px, p.pm).ravel()
    mass = p.p.ravel()
    live = mass > 0
    # joint <= each marginal, so a live cell never has zero product mass
    assert np.all(prod[live] > 0), "positive joint mass on a zero-marginal cell"
    mass, prod = mass[live], prod[live]
    ratio = mass / prod
    order = np.argsort(-ratio, kind="stable")
    return mass[order], prod[order], ratio[order]


def imax_smoothed(p: JointDistribution, gamma: float, *, normalized: bool = False) -> float:
    """Smoothed max-information I_max^gamma(X:M) by water-filling.

    The cheapest gamma-close distribution under the cap ``T * p_X * p_M``
    clips every cell down to the cap, removing
    ``excess(T) = sum max(0, p - T p_X p_M)``. ``excess`` is convex,
    piecewise linear and decreasing in ``T``, so the minimal feasible ``T``
    is found by locating its breakpoint interval among the sorted ratios
    and solving the linear piece.
    """
    _require_normalized(p)
    gamma = _check_gamma(gamma)
    budget = gamma if normalized else 2.0 * gamma
    mass, prod, ratio = _support_ratios(p)
    cum_mass = np.cumsum(mass)
    cum_prod = np.cumsum(prod)
    # excess at T = ratio[k]: only cells strictly before k exceed the cap
    before_mass = np.concatenate(([0.0], cum_mass[:-1]))
    before_prod = np.concatenate(([0.0], cum_prod[:-1]))
    excess_at = before_mass - ratio * before_prod
    # excess_at is nondecreasing and excess_at[0] == 0, so j always exists
    j = int(np.nonzero(excess_at <= budget)[0][-1])
    # on [ratio[j+1], ratio[j]] exactly cells 0..j sit above the cap
    T = (cum_mass[j] - budget) / cum_prod[j]
    lower = ratio[j + 1] if j + 1 < len(ratio) else 0.0
    T = min(max(T, lower), ratio[j])
    return max(0.0, math.log2(T)) if T > 0 else 0.0


def ispec_smoothed(p: JointDistribution, gamma: float) -> float:
    """Smoothed spectrum max-information I_s^gamma(X:M).

    Minimal ``c`` with ``Pr_p[p(x,m) / (p(x) p(m)) > 2^c] <= gamma``. The
    tail mass is a right-continuous step function of ``c``, so the minimum
    sits at one of the cell ratios.
    """
    _require_normalized(p)
    gamma = _check_gamma(gamma)
    mass, _, ratio = _support_ratios(p)
    above = np.concatenate(([0.0], np.cumsum(mass)[:-1]))
    # above[k] counts earlier cells; a tie group's mass above is its first member's
    distinct_start = np.concatenate(([True], ratio[1:] < ratio[:-1]))
    ok = distinct_start & (above <= gamma + MASS_TOL)
    if gamma + MASS_TOL >= mass.sum():
        return 0.0
    k = int(np.nonzero(ok)[0][-1])
    return max(0.0, math.log2(ratio[k]))


def imax_oracle(
    p: JointDistribution, gamma: float, *, normalized: bool = False, tol: float = 2.0 ** -40
) -> float:
    """Independent check of :func:`imax_smoothed` by bisection on the exponent.

    For each trial exponent ``c`` the mass-minimal feasible distribution is
    built explicitly by clipping ``p`` to ``2^c p_X p_M``; ``c`` is feasible
    when the clipped distribution is within budget. Limited to 64 cells.
    """
    _require_normalized(p)
    gamma = _check_gamma(gamma)
    if p.p.size > 64:
        raise ValueError(f"oracle limited to |X|*|M| <= 64, got {p.p.size}")
    cap_base = np.outer(p.px, p.pm)
    budget = gamma if normalized else 2.0 * gamma

    def feasible(c: float) -> bool:
        clipped = np.minimum(p.p, 2.0 ** c * cap_base)
        removed = float(np.abs(p.p - clipped).sum())
        if normalized:
            # refill under the cap; possible whenever total cap 2^c >= 1
            slack = float((2.0 ** c * cap_base - clipped).sum())
            if slack + MASS_TOL < removed:
                return False
        return removed <= budget

    positive = p.p > 0
    hi = float(np.log2(np.max(p.p[positive] / cap_base[positive])))
    hi = max(hi, 0.0)
    lo = 0.0
    if feasible(lo):
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def is_imax_relation_sides(p: JointDistribution, gamma: float) -> Tuple[float, float]:
    """(I_s^{18 gamma^2}, I_max^gamma + log((8 + gamma^2)/gamma^2) + 2)."""
    if not 0.0 < gamma <= 1.0 / math.sqrt(12.0):
        raise ValueError(f"relation requires 0 < gamma <= 1/sqrt(12), got {gamma}")
    # for gamma > 1/sqrt(18) the budget covers all mass and I_s is 0 either way
    lhs = ispec_smoothed(p, min(1.0, 18.0 * gamma * gamma))
    rhs = imax_smoothed(p, gamma) + math.log2((8.0 + gamma * gamma) / (gamma * gamma)) + 2.0
    return lhs, rhs


def check_is_imax_relation(p: JointDistribution, gamma: float) -> bool:
    lhs, rhs = is_imax_relation_sides(p, gamma)
    return lhs <= rhs


def random_joint(
    rng: np.random.Generator, shape: Tuple[int, int], *, sparsity: float = 0.0, concentration: float = 1.0
) -> JointDistribution:
    """Dirichlet-distributed joint, optionally with cells zeroed at random."""
    w = rng.gamma(concentration, size=shape)
    if sparsity > 0:
        w = w * (rng.random(shape) >= sparsity)
    if w.sum() == 0:
        w.flat[rng.integers(w.size)] = 1.0
    return JointDistribution(w / w.sum())


def prefix_leak_joint(n: int, c: int) -> JointDistribution:
    """Uniform X on n bits with M = its first c bits."""
    if not 0 <= c <= n:
        raise ValueError("need 0 <= c <= n")
    rows = 1 << n
    arr = np.zeros((rows, 1 << c))
    for x in range(rows):
        arr[x, x >> (n - c)] = 1.0 / rows
    return JointDistribution(arr)


def joint_from_conditional(px: Iterable[float], cond: np.ndarray) -> JointDistribution:
    """p(x, m) = p(x) * cond[x, m]."""
    px = np.asarray(list(px), dtype=float)
    cond = np.asarray(cond, dtype=float)
    return JointDistribution(px[:, None] * cond)
