"""Trace file format: parsing, serialization, kernel-to-model mapping."""

from .model import (
    KernelSnapshot,
    MalformedLine,
    MissingSnapshot,
    NonMonotonicSeq,
    SnapshotFd,
    SnapshotFile,
    SnapshotProcess,
    SnapshotRole,
    SnapshotUser,
    SyscallRecord,
    SyscallResult,
    Trace,
    TraceError,
)
from .format import parse_trace, serialize_trace
from .mapping import (
    Divergence,
    IdMap,
    InconsistentSnapshot,
    UnknownKernelId,
    compare_states,
    map_snapshot,
)

__all__ = [
    "Divergence",
    "IdMap",
    "InconsistentSnapshot",
    "KernelSnapshot",
    "MalformedLine",
    "MissingSnapshot",
    "NonMonotonicSeq",
    "SnapshotFd",
    "SnapshotFile",
    "SnapshotProcess",
    "SnapshotRole",
    "SnapshotUser",
    "SyscallRecord",
    "SyscallResult",
    "Trace",
    "TraceError",
    "UnknownKernelId",
    "compare_states",
    "map_snapshot",
    "parse_trace",
    "serialize_trace",
]
