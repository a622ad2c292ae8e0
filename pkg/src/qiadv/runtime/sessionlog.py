"""Append-only NDJSON session records and the replay checker."""

from __future__ import annotations

import json
import math
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

from qiadv.game import Bitstring, GameSpec, threshold_accept, win_count


@dataclass
class SessionRecord:
    """One verifier-prover interaction. Bitstrings are stored as hex."""

    session_id: str
    n: int
    t: int
    x: Optional[str] = None
    a: Optional[str] = None
    y: Optional[str] = None
    b: Optional[str] = None
    verdict: str = "reject"
    win_count: Optional[int] = None
    t0: Optional[float] = None
    t1: Optional[float] = None
    reason: Optional[str] = None
    memory_meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return None not in (self.x, self.a, self.y, self.b, self.win_count)

    @property
    def accepted(self) -> bool:
        return self.verdict == "accept"

    def bits(self, name: str) -> Bitstring:
        return Bitstring.from_hex(getattr(self, name), self.n)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "SessionRecord":
        return cls(**d)


class SessionLog:
    """Newline-delimited JSON file; appends are serialized by a lock."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, record: SessionRecord) -> None:
        line = record.to_json() + "\n"
        with self._lock, self.path.open("a", encoding="utf-8") as fh:
            fh.write(line)


def read_log(path: Union[str, Path]) -> Iterator[SessionRecord]:
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield SessionRecord.from_dict(json.loads(line))
            except (json.JSONDecodeError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad session record: {exc}") from None


@dataclass
class ReplayReport:
    records: int
    complete: int
    accepted: int
    mismatches: List[str]
    x_ones_z: float
    y_ones_z: float

    @property
    def ok(self) -> bool:
        return not self.mismatches

    @property
    def uniform(self) -> bool:
        return abs(self.x_ones_z) < 4.0 and abs(self.y_ones_z) < 4.0

    def as_dict(self) -> dict:
        return {**asdict(self), "ok": self.ok, "uniform": self.uniform}


def _ones_z(ones: int, total: int) -> float:
    return 0.0 if total == 0 else (ones - total / 2) / math.sqrt(total / 4)


def replay(records: Union[str, Path, List[SessionRecord]]) -> ReplayReport:
    """Recompute every complete session's verdict and test x, y for uniform bits."""
    recs = list(read_log(records)) if isinstance(records, (str, Path)) else list(records)
    mismatches = []
    complete = accepted = 0
    x_ones = y_ones = total = 0
    for r in recs:
        if not r.complete:
            if r.verdict != "reject":
                mismatches.append(f"{r.session_id}: incomplete session marked {r.verdict}")
            continue
        complete += 1
        spec = GameSpec(r.n, r.t)
        x, a, y, b = (r.bits(k) for k in "xayb")
        count = win_count(x, y, a, b)
        expected = "accept" if threshold_accept(spec, x, y, a, b) else "reject"
        if count != r.win_count or expected != r.verdict:
            mismatches.append(
                f"{r.session_id}: logged {r.verdict}/{r.win_count}, recomputed {expected}/{count}"
            )
        accepted += r.accepted
        x_ones += int(x.array.sum())
        y_ones += int(y.array.sum())
        total += r.n
    return ReplayReport(len(recs), complete, accepted, mismatches, _ones_z(x_ones, total), _ones_z(y_ones, total))
