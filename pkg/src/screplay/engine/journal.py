"""Severity-tagged journal of divergences between kernel and model."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum


class Severity(Enum):
    CRIT = "CRIT"
    WARN = "WARN"
    INFO = "INFO"

    @property
    def rank(self) -> int:
        return {"CRIT": 2, "WARN": 1, "INFO": 0}[self.value]

    def __lt__(self, other: "Severity") -> bool:
        return self.rank < other.rank

    def __le__(self, other: "Severity") -> bool:
        return self.rank <= other.rank


class JournalKind:
    # The kernel granted what the model denies: the one unrecoverable case.
    DENIED_BUT_GRANTED = "DeniedButGranted"
    # The kernel denied what the model grants; triaged by errno.
    GRANTED_BUT_DENIED = "GrantedButDenied"
    FINAL_STATE_DIVERGENCE = "FinalStateDivergence"
    # No final snapshot in the trace, final comparison skipped.
    SNAPSHOT_SKIPPED = "SnapshotSkipped"
    # Trace contains a syscall with no graph in the catalog.
    UNMODELED_SYSCALL = "UnmodeledSyscall"


@dataclass(frozen=True)
class JournalEntry:
    severity: Severity
    seq: int  # 0 for trace-level entries
    kind: str
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == JournalKind.DENIED_BUT_GRANTED and self.severity is not Severity.CRIT:
            raise ValueError("DeniedButGranted entries are always CRIT")

    def to_json(self) -> dict:
        return {
            "severity": self.severity.value,
            "seq": self.seq,
            "kind": self.kind,
            "detail": self.detail,
        }

    def summary(self) -> str:
        parts = [f"[{self.severity.value}]", f"seq={self.seq}", self.kind]
        if "errno" in self.detail:
            parts.append(self.detail["errno"])
        if "denial_site" in self.detail:
            parts.append(f"denied at {self.detail['denial_site']}")
        if "name" in self.detail:
            parts.append(f"({self.detail['name']})")
        if self.kind == JournalKind.FINAL_STATE_DIVERGENCE:
            parts.append(f"{len(self.detail.get('divergences', []))} divergences")
        return " ".join(parts)


def serialize_journal(entries) -> str:
    """One JSON object per line, in journal order."""
    return "".join(json.dumps(e.to_json(), separators=(",", ":")) + "\n" for e in entries)


def parse_journal(text: str) -> list[JournalEntry]:
    entries = []
    for line in text.splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        entries.append(
            JournalEntry(Severity(obj["severity"]), obj["seq"], obj["kind"], obj["detail"])
        )
    return entries
