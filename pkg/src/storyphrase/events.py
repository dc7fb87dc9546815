"""Append-only study event log: one self-describing JSON record per line.

Every record carries exactly the StudyEvent fields:
    at          float epoch seconds
    participant opaque participant id
    kind        enrolled | story-chosen | assigned | round-opened | attempt |
                round-passed | round-failed | revealed | survey | invited
    round       0..6 (0 = memorization phase)
    payload     kind-specific object

All study state and every metric is derivable by replaying the log.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import LogCorrupt

KINDS = {
    "enrolled",
    "story-chosen",
    "assigned",
    "round-opened",
    "attempt",
    "round-passed",
    "round-failed",
    "revealed",
    "survey",
    "invited",
}


@dataclass
class StudyEvent:
    at: float
    participant: str
    kind: str
    round: int
    payload: dict = field(default_factory=dict)

    def to_line(self) -> str:
        return json.dumps(
            {
                "at": self.at,
                "participant": self.participant,
                "kind": self.kind,
                "round": self.round,
                "payload": self.payload,
            },
            sort_keys=True,
            separators=(",", ":"),
        )


def event_from_line(line: str, line_number: int) -> StudyEvent:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise LogCorrupt(line_number, str(exc))
    if not isinstance(obj, dict):
        raise LogCorrupt(line_number, "record is not an object")
    missing = {"at", "participant", "kind", "round", "payload"} - obj.keys()
    if missing:
        raise LogCorrupt(line_number, f"missing fields {sorted(missing)}")
    if obj["kind"] not in KINDS:
        raise LogCorrupt(line_number, f"unknown kind {obj['kind']!r}")
    return StudyEvent(
        at=float(obj["at"]),
        participant=str(obj["participant"]),
        kind=obj["kind"],
        round=int(obj["round"]),
        payload=obj["payload"],
    )


def read_events(path) -> list[StudyEvent]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if not line.endswith("\n"):
                raise LogCorrupt(number, "truncated trailing record")
            events.append(event_from_line(stripped, number))
    return events


class EventLogWriter:
    """Append-only writer; one flushed line per event."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "a", encoding="utf-8")

    def append(self, events) -> None:
        for event in events:
            self._fh.write(event.to_line() + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()
