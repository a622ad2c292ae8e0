"""Exact binomial tails and seeded Monte Carlo plumbing."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np
from scipy.special import gammaln, logsumexp

T = TypeVar("T")


def log_binom_pmf(n: int, k: np.ndarray, p: float) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    out = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    with np.errstate(divide="ignore"):
        out = out + np.where(k > 0, k * np.log(p) if p > 0 else -np.inf, 0.0)
        out = out + np.where(n - k > 0, (n - k) * np.log1p(-p) if p < 1 else -np.inf, 0.0)
    return out


def binomial_upper_tail(n: int, t: int, p: float) -> float:
    """Pr[Bin(n, p) >= t] by summing log-pmf terms."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if t <= 0:
        return 1.0
    if t > n:
        return 0.0
    k = np.arange(t, n + 1)
    return float(min(1.0, math.exp(logsumexp(log_binom_pmf(n, k, p)))))


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo success frequency with its binomial standard error."""

    successes: int
    trials: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    @property
    def se(self) -> float:
        r = self.rate
        return math.sqrt(r * (1 - r) / self.trials)

    def as_dict(self) -> dict:
        return {"rate": self.rate, "se": self.se, "successes": self.successes, "trials": self.trials}


def trial_seeds(seed: Optional[int], count: int) -> List[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(count)


def run_trials(
    fn: Callable[[np.random.SeedSequence], T],
    seeds: Sequence[np.random.SeedSequence],
    workers: int = 1,
) -> List[T]:
    """Evaluate ``fn`` per seed, in seed order; ``fn`` must be picklable for workers > 1."""
    if workers <= 1:
        return [fn(s) for s in seeds]
    chunk = max(1, len(seeds) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds, chunksize=chunk))
