"""Trace replay engine: verdict matrix, journal, coverage."""

from .journal import (
    JournalEntry,
    JournalKind,
    Severity,
    parse_journal,
    serialize_journal,
)
from .coverage import CoverageMismatch, CoverageReport
from .replay import ReplayResult, ReplayStatus, check_err_code, replay_trace

__all__ = [
    "CoverageMismatch",
    "CoverageReport",
    "JournalEntry",
    "JournalKind",
    "ReplayResult",
    "ReplayStatus",
    "Severity",
    "check_err_code",
    "parse_journal",
    "replay_trace",
    "serialize_journal",
]
