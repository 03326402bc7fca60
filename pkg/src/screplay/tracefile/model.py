"""In-memory form of the on-disk trace: snapshots plus syscall records."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..policy.labels import SecurityLabel


class TraceError(Exception):
    pass


class MalformedLine(TraceError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class MissingSnapshot(TraceError):
    def __init__(self):
        super().__init__("trace does not start with a snapshot record")


class NonMonotonicSeq(TraceError):
    def __init__(self, line_no: int, seq: int, previous: int):
        super().__init__(f"line {line_no}: seq {seq} not greater than {previous}")
        self.line_no = line_no
        self.seq = seq
        self.previous = previous


@dataclass(frozen=True)
class SnapshotUser:
    uid: int
    roles: tuple[int, ...]
    int_level: int
    sec: SecurityLabel


@dataclass(frozen=True)
class SnapshotFd:
    fd: int
    inode: int
    access: str  # "read" or "write"


@dataclass(frozen=True)
class SnapshotProcess:
    pid: int
    uid: int
    int_level: int
    sec: SecurityLabel
    fds: tuple[SnapshotFd, ...]


@dataclass(frozen=True)
class SnapshotFile:
    inode: int
    parent: int | None  # None marks a filesystem root
    name: str
    is_dir: bool
    int_level: int
    sec: SecurityLabel


@dataclass(frozen=True)
class SnapshotRole:
    role: int
    kind: str  # "ordinary" / "administrative" / "negative"
    rights: tuple[tuple[int, str], ...]  # (inode, access kind)


@dataclass(frozen=True)
class KernelSnapshot:
    users: tuple[SnapshotUser, ...] = ()
    processes: tuple[SnapshotProcess, ...] = ()
    files: tuple[SnapshotFile, ...] = ()
    roles: tuple[SnapshotRole, ...] = ()


@dataclass(frozen=True)
class SyscallResult:
    code: int  # >= 0 success, negative -errno
    outputs: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SyscallRecord:
    seq: int
    name: str
    pid: int
    args: dict
    result: SyscallResult
    aux: dict = field(default_factory=dict)

    @property
    def granted(self) -> bool:
        return self.result.code >= 0


@dataclass(frozen=True)
class Trace:
    snapshot: KernelSnapshot
    calls: tuple[SyscallRecord, ...] = ()
    final_snapshot: KernelSnapshot | None = None
