"""Threshold-repeated CHSH with bounded-memory classical provers and a simulated quantum prover.

Simulation of the honest (noisy) quantum prover and bounded-memory classical
provers, exact information measures on small joint distributions, message
compression by rejection sampling, and a networked verifier/prover runtime.
"""

from qiadv.game import (
    Bitstring,
    GameSpec,
    brute_force_value,
    chernoff_bound,
    chsh_predicate,
    classical_value_bound,
    quantum_value,
    threshold_accept,
    win_count,
)
from qiadv.info import (
    JointDistribution,
    check_is_imax_relation,
    imax_oracle,
    imax_smoothed,
    ispec_smoothed,
    mutual_information,
)

__version__ = "0.1.0"

__all__ = [
    "Bitstring",
    "GameSpec",
    "JointDistribution",
    "brute_force_value",
    "check_is_imax_relation",
    "chernoff_bound",
    "chsh_predicate",
    "classical_value_bound",
    "imax_oracle",
    "imax_smoothed",
    "ispec_smoothed",
    "mutual_information",
    "quantum_value",
    "threshold_accept",
    "win_count",
]
