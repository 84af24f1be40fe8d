"""Run trace: an ordered, append-only event log.

Every store mutation, block, plan outcome, audit and ascription report is
recorded as one event with a monotonically increasing index and the module
of origin, so a run can be replayed or diffed byte-for-byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Event:
    index: int
    module: str
    kind: str
    payload: dict[str, Any]


@dataclass
class Trace:
    events: list[Event] = field(default_factory=list)

    def emit(self, module: str, kind: str, **payload: Any) -> Event:
        ev = Event(index=len(self.events), module=module, kind=kind, payload=payload)
        self.events.append(ev)
        return ev

    def kinds(self) -> list[str]:
        return [ev.kind for ev in self.events]

    def find(self, kind: str) -> list[Event]:
        return [ev for ev in self.events if ev.kind == kind]
