"""Prover clients for the verifier service."""

from __future__ import annotations

import socket
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from qiadv.game import Bitstring
from qiadv.provers import (
    ClassicalStrategy,
    MeasurementAngles,
    NoiseParams,
    QuantumMemory,
    QuantumProver,
    make_strategy,
)
from qiadv.runtime import wire


class _ClassicalProver:
    """Adapts a :class:`ClassicalStrategy` to the two-phase first/second interface."""

    def __init__(self, strategy: ClassicalStrategy, n: int, rng: np.random.Generator):
        self.strategy = strategy
        self.shared = strategy.shared_randomness(n, rng)
        self.message: Optional[np.ndarray] = None

    def first(self, x: Bitstring) -> Bitstring:
        a, m = self.strategy.alice(x.array.copy(), self.shared)
        m = np.asarray(m, dtype=np.uint8)
        if m.size > self.strategy.width:
            raise ValueError(f"strategy emitted {m.size} bits, declared {self.strategy.width}")
        self.message = m
        return Bitstring(a)

    def second(self, y: Bitstring) -> Bitstring:
        b = self.strategy.bob(self.message.copy(), y.array.copy(), self.shared)
        self.message = None
        return Bitstring(b)

    def accounting(self) -> Dict[str, Any]:
        return {"tag": QuantumMemory.TAG, "declared_width": self.strategy.width, "strategy": self.strategy.name}


def build_prover(kind: str, n: int, rng: np.random.Generator, params: Optional[Dict[str, Any]] = None):
    """``quantum-sim`` or ``classical:<name>[:c]``; ``c`` may be ``"n"`` for full width."""
    params = dict(params or {})
    if kind == "quantum-sim":
        noise = NoiseParams(float(params.get("gamma", 0.0)), params.get("channel", "readout"))
        return QuantumProver(noise, MeasurementAngles(), rng)
    prefix, _, spec = kind.partition(":")
    if prefix != "classical" or not spec:
        raise ValueError(f"unknown prover kind {kind!r}")
    name, _, arg = spec.partition(":")
    if arg:
        params["c"] = arg
    if params.get("c") == "n":
        params["c"] = n
    if "c" in params:
        params["c"] = int(params["c"])
    return _ClassicalProver(make_strategy(name, **params), n, rng)


@dataclass
class ClientReport:
    kind: str
    sessions: int = 0
    completed: int = 0
    accepted: int = 0
    voided: int = 0
    errors: List[str] = field(default_factory=list)
    memory: Dict[str, Any] = field(default_factory=dict)

    @property
    def accept_rate(self) -> float:
        return self.accepted / self.completed if self.completed else 0.0

    def as_dict(self) -> dict:
        return {**asdict(self), "accept_rate": self.accept_rate}


def run_session(
    address: Tuple[str, int],
    kind: str,
    rng: np.random.Generator,
    params: Optional[Dict[str, Any]] = None,
    timeout: float = 60.0,
) -> Tuple[Dict[str, Any], Dict[str, Any]]:
    """One full session; returns (verdict payload, memory accounting)."""
    with socket.create_connection(address, timeout=timeout) as sock:
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        wire.send_frame(sock, wire.make_frame("HELLO", None, {"prover": kind, "memory": {"tag": QuantumMemory.TAG}}))
        hello = _expect(sock, "HELLO")
        session_id = hello["session_id"]
        n = int(hello["payload"]["n"])
        prover = build_prover(kind, n, rng, params)

        x = wire.decode_bits(_expect(sock, "X"), n)
        a = prover.first(x)
        wire.send_frame(sock, wire.make_frame("A", session_id, wire.bits_payload(a)))

        y_frame = _expect(sock, "Y")
        y = wire.decode_bits(y_frame, n)
        b = prover.second(y)
        challenge = y_frame["payload"].get("challenge")
        wire.send_frame(sock, wire.make_frame("B", session_id, wire.bits_payload(b, challenge=challenge)))
        verdict = _expect(sock, "VERDICT")
        accounting = prover.accounting()
        if isinstance(prover, QuantumProver):
            accounting["destroyed_after_b"] = prover.memory.destroyed
        return verdict["payload"], accounting


def _expect(sock: socket.socket, kind: str) -> Dict[str, Any]:
    frame = wire.recv_frame(sock)
    if frame["type"] == "ERROR":
        raise wire.ProtocolError((frame.get("payload") or {}).get("reason", "error"), "from verifier")
    if frame["type"] != kind:
        raise wire.ProtocolError(wire.PHASE_VIOLATION, f"expected {kind}, got {frame['type']}")
    return frame


def prover_client(
    kind: str,
    address: Tuple[str, int],
    sessions: int = 1,
    params: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
    timeout: float = 60.0,
) -> ClientReport:
    """Play ``sessions`` sequential sessions against a verifier."""
    report = ClientReport(kind)
    rng = np.random.default_rng(seed)
    for _ in range(sessions):
        report.sessions += 1
        try:
            verdict, report.memory = run_session(address, kind, rng, params, timeout)
        except (ConnectionError, socket.timeout, OSError) as exc:
            report.voided += 1
            report.errors.append(f"connection: {exc}")
            continue
        except wire.ProtocolError as exc:
            report.errors.append(str(exc))
            continue
        report.completed += 1
        report.accepted += bool(verdict.get("accept"))
    return report
