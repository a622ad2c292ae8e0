"""Networked verifier and prover clients."""

from qiadv.runtime.client import ClientReport, build_prover, prover_client, run_session
from qiadv.runtime.sessionlog import ReplayReport, SessionLog, SessionRecord, read_log, replay
from qiadv.runtime.verifier import Verifier, VerifierThread

__all__ = [
    "ClientReport",
    "ReplayReport",
    "SessionLog",
    "SessionRecord",
    "Verifier",
    "VerifierThread",
    "build_prover",
    "prover_client",
    "read_log",
    "replay",
    "run_session",
]
