"""Verifier service: one serial state machine per TCP session."""

from __future__ import annotations

import asyncio
import logging
import threading
import time
import uuid
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from qiadv.game import Bitstring, GameSpec, threshold_accept, win_count
from qiadv.runtime import wire
from qiadv.runtime.sessionlog import SessionLog, SessionRecord

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0


class Verifier:
    """Runs CHSH^{t/n} sessions over the framed protocol.

    With ``seed`` set, session ``i`` (in order of connection) draws its
    session id, x, y and challenge from ``default_rng([seed, i])``, so
    sequential runs reproduce transcripts. Without a seed each session uses
    fresh OS entropy. ``phase_gap`` seconds are waited between receiving A
    and drawing y; the actual t0/t1 readings are logged either way.
    """

    def __init__(
        self,
        spec: GameSpec,
        seed: Optional[int] = None,
        timeout: float = DEFAULT_TIMEOUT,
        log_path=None,
        max_sessions: Optional[int] = None,
        phase_gap: float = 0.0,
    ):
        if phase_gap < 0:
            raise ValueError("phase_gap must be nonnegative")
        self.spec = spec
        self.seed = seed
        self.timeout = timeout
        self.store = SessionLog(log_path) if log_path else None
        self.max_sessions = max_sessions
        self.phase_gap = phase_gap
        self.records: List[SessionRecord] = []
        self._counter = 0
        self._finished = 0
        self._done: Optional[asyncio.Event] = None
        self._server: Optional[asyncio.base_events.Server] = None

    def _session_rng(self) -> Tuple[np.random.Generator, str]:
        index = self._counter
        self._counter += 1
        if self.seed is None:
            return np.random.default_rng(), uuid.uuid4().hex
        rng = np.random.default_rng([self.seed, index])
        return rng, rng.bytes(16).hex()

    async def _expect(self, reader, kind: str, session_id: str) -> Dict[str, Any]:
        frame = await asyncio.wait_for(wire.read_frame(reader), self.timeout)
        if frame["type"] == "ERROR":
            raise wire.ProtocolError("prover error", str(frame.get("payload")))
        if frame["type"] != kind:
            raise wire.ProtocolError(wire.PHASE_VIOLATION, f"expected {kind}, got {frame['type']}")
        if kind != "HELLO" and frame.get("session_id") != session_id:
            raise wire.ProtocolError(wire.PHASE_VIOLATION, "session id mismatch")
        return frame

    async def handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        rng, session_id = self._session_rng()
        spec = self.spec
        record = SessionRecord(session_id=session_id, n=spec.n, t=spec.t)
        try:
            hello = await self._expect(reader, "HELLO", session_id)
            payload = hello.get("payload") or {}
            record.memory_meta = {"prover": payload.get("prover"), **(payload.get("memory") or {})}
            await wire.write_frame(writer, wire.make_frame("HELLO", session_id, {"n": spec.n, "t": spec.t}))

            x = Bitstring.random(spec.n, rng)
            record.x = x.hex()
            record.t0 = time.monotonic()
            await wire.write_frame(writer, wire.make_frame("X", session_id, wire.bits_payload(x)))
            a = wire.decode_bits(await self._expect(reader, "A", session_id), spec.n)
            record.a = a.hex()

            # y is drawn only once A is in hand
            if self.phase_gap:
                await asyncio.sleep(self.phase_gap)
            y = Bitstring.random(spec.n, rng)
            challenge = rng.bytes(8).hex()
            record.y = y.hex()
            record.t1 = time.monotonic()
            await wire.write_frame(writer, wire.make_frame("Y", session_id, wire.bits_payload(y, challenge=challenge)))
            b_frame = await self._expect(reader, "B", session_id)
            if (b_frame.get("payload") or {}).get("challenge") != challenge:
                raise wire.ProtocolError(wire.PHASE_VIOLATION, "B does not answer this Y")
            b = wire.decode_bits(b_frame, spec.n)
            record.b = b.hex()

            record.win_count = win_count(x, y, a, b)
            accept = threshold_accept(spec, x, y, a, b)
            record.verdict = "accept" if accept else "reject"
            await wire.write_frame(
                writer,
                wire.make_frame("VERDICT", session_id, {"accept": accept, "win_count": record.win_count, "t": spec.t}),
            )
        except wire.ProtocolError as exc:
            record.reason = exc.reason if not exc.detail else f"{exc.reason}: {exc.detail}"
            await self._send_error(writer, session_id, exc.reason, exc.detail)
        except asyncio.TimeoutError:
            record.reason = "timeout"
            await self._send_error(writer, session_id, "timeout")
        except (asyncio.IncompleteReadError, ConnectionError) as exc:
            record.reason = f"connection lost: {type(exc).__name__}"
        finally:
            if not record.complete:
                record.verdict = "reject"
            self._persist(record)
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass

    async def _send_error(self, writer, session_id, reason, detail=""):
        try:
            await wire.write_frame(writer, wire.make_frame("ERROR", session_id, {"reason": reason, "detail": detail}))
        except (ConnectionError, OSError):
            pass

    def _persist(self, record: SessionRecord) -> None:
        self.records.append(record)
        if self.store is not None:
            self.store.append(record)
        self._finished += 1
        if self.max_sessions is not None and self._finished >= self.max_sessions and self._done is not None:
            self._done.set()

    async def start(self, host: str = "127.0.0.1", port: int = 0) -> Tuple[str, int]:
        self._done = asyncio.Event()
        self._server = await asyncio.start_server(self.handle, host, port)
        sockname = self._server.sockets[0].getsockname()
        return sockname[0], sockname[1]

    async def serve(self, host: str = "127.0.0.1", port: int = 0, ready=None) -> List[SessionRecord]:
        """Serve until ``max_sessions`` sessions finish (forever if None)."""
        address = await self.start(host, port)
        if ready is not None:
            ready(address)
        try:
            await self._done.wait()
        finally:
            self._server.close()
            await self._server.wait_closed()
        return self.records


class VerifierThread:
    """A :class:`Verifier` on a private event loop in a background thread."""

    def __init__(self, verifier: Verifier, host: str = "127.0.0.1", port: int = 0):
        self.verifier = verifier
        self._host, self._port = host, port
        self._loop = asyncio.new_event_loop()
        self._thread = threading.Thread(target=self._loop.run_forever, daemon=True)
        self.address: Optional[Tuple[str, int]] = None

    def __enter__(self) -> "VerifierThread":
        self._thread.start()
        fut = asyncio.run_coroutine_threadsafe(self.verifier.start(self._host, self._port), self._loop)
        self.address = fut.result(timeout=10)
        return self

    def __exit__(self, *exc) -> None:
        async def _close():
            self.verifier._server.close()
            await self.verifier._server.wait_closed()

        asyncio.run_coroutine_threadsafe(_close(), self._loop).result(timeout=10)
        self._loop.call_soon_threadsafe(self._loop.stop)
        self._thread.join(timeout=10)
        self._loop.close()

    def wait(self, sessions: int, timeout: float = 60.0) -> List[SessionRecord]:
        deadline = time.monotonic() + timeout
        while len(self.verifier.records) < sessions:
            if time.monotonic() > deadline:
                raise TimeoutError(f"only {len(self.verifier.records)} of {sessions} sessions finished")
            time.sleep(0.005)
        return list(self.verifier.records)
