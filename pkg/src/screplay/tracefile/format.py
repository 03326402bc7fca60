"""Line-delimited trace serialization.

One JSON object per UTF-8 line. The first line is the snapshot, each call
is one line, and an optional trailing line holds the final snapshot:

    {"type":"snapshot","users":[...],"processes":[...],"files":[...],"roles":[...]}
    {"type":"syscall","seq":1,"name":"open","pid":10,"args":{...},"result":{"code":3,"outputs":{"fd":3}},"aux":{"inode":5}}
    {"type":"final_snapshot",...}

Canonical form sorts collections by their id field and uses compact
separators; parse/serialize round-trips are exact on canonical input.
"""

from __future__ import annotations

import json

from ..policy.labels import SecurityLabel
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
)


def _sec_to_json(sec: SecurityLabel) -> dict:
    return {"level": sec.level, "cats": sorted(sec.categories)}


def _sec_from_json(obj, line_no: int) -> SecurityLabel:
    try:
        cats = obj["cats"]
        if not all(isinstance(c, int) and not isinstance(c, bool) for c in cats):
            raise ValueError("categories must be integers")
        return SecurityLabel(obj["level"], frozenset(cats))
    except (TypeError, KeyError, ValueError) as exc:
        raise MalformedLine(line_no, f"bad security label: {exc}") from None


def _snapshot_to_json(snap: KernelSnapshot, kind: str) -> dict:
    return {
        "type": kind,
        "users": [
            {
                "uid": u.uid,
                "roles": sorted(u.roles),
                "int": u.int_level,
                "sec": _sec_to_json(u.sec),
            }
            for u in sorted(snap.users, key=lambda u: u.uid)
        ],
        "processes": [
            {
                "pid": p.pid,
                "uid": p.uid,
                "int": p.int_level,
                "sec": _sec_to_json(p.sec),
                "fds": [
                    {"fd": fd.fd, "inode": fd.inode, "access": fd.access}
                    for fd in sorted(p.fds, key=lambda f: (f.fd, f.access))
                ],
            }
            for p in sorted(snap.processes, key=lambda p: p.pid)
        ],
        "files": [
            {
                "inode": f.inode,
                "parent": f.parent,
                "name": f.name,
                "dir": f.is_dir,
                "int": f.int_level,
                "sec": _sec_to_json(f.sec),
            }
            for f in sorted(snap.files, key=lambda f: f.inode)
        ],
        "roles": [
            {
                "role": r.role,
                "kind": r.kind,
                "rights": [
                    {"inode": inode, "access": access}
                    for inode, access in sorted(r.rights)
                ],
            }
            for r in sorted(snap.roles, key=lambda r: r.role)
        ],
    }


def _require_fields(obj: dict, fields: dict, line_no: int, where: str) -> None:
    if not isinstance(obj, dict):
        raise MalformedLine(line_no, f"{where}: expected an object, got {type(obj).__name__}")
    for name, types in fields.items():
        if name not in obj:
            raise MalformedLine(line_no, f"{where}: missing field {name!r}")
        if types is not None and not isinstance(obj[name], types):
            raise MalformedLine(
                line_no, f"{where}: field {name!r} has wrong type {type(obj[name]).__name__}"
            )


def _int_field(obj, name, line_no, where, optional=False):
    value = obj.get(name)
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedLine(line_no, f"{where}: field {name!r} must be an integer")
    return value


def _snapshot_from_json(obj: dict, line_no: int) -> KernelSnapshot:
    for section in ("users", "processes", "files", "roles"):
        if not isinstance(obj.get(section, []), list):
            raise MalformedLine(line_no, f"snapshot section {section!r} must be a list")
    users = []
    for u in obj.get("users", []):
        _require_fields(u, {"uid": int, "roles": list, "int": int, "sec": dict}, line_no, "user")
        if not all(isinstance(r, int) and not isinstance(r, bool) for r in u["roles"]):
            raise MalformedLine(line_no, "user roles must be integers")
        users.append(
            SnapshotUser(u["uid"], tuple(u["roles"]), u["int"], _sec_from_json(u["sec"], line_no))
        )
    processes = []
    for p in obj.get("processes", []):
        _require_fields(p, {"pid": int, "uid": int, "int": int, "sec": dict, "fds": list}, line_no, "process")
        fds = []
        for fd in p["fds"]:
            _require_fields(fd, {"fd": int, "inode": int, "access": str}, line_no, "fd")
            if fd["access"] not in ("read", "write"):
                raise MalformedLine(line_no, f"fd access must be read/write, got {fd['access']!r}")
            fds.append(SnapshotFd(fd["fd"], fd["inode"], fd["access"]))
        processes.append(
            SnapshotProcess(p["pid"], p["uid"], p["int"], _sec_from_json(p["sec"], line_no), tuple(fds))
        )
    files = []
    for f in obj.get("files", []):
        _require_fields(f, {"inode": int, "name": str, "dir": bool, "int": int, "sec": dict}, line_no, "file")
        parent = _int_field(f, "parent", line_no, "file", optional=True)
        files.append(
            SnapshotFile(f["inode"], parent, f["name"], f["dir"], f["int"], _sec_from_json(f["sec"], line_no))
        )
    roles = []
    for r in obj.get("roles", []):
        _require_fields(r, {"role": int, "kind": str, "rights": list}, line_no, "role")
        if r["kind"] not in ("ordinary", "administrative", "negative"):
            raise MalformedLine(line_no, f"unknown role kind {r['kind']!r}")
        rights = []
        for right in r["rights"]:
            _require_fields(right, {"inode": int, "access": str}, line_no, "right")
            if right["access"] not in ("read", "write", "own"):
                raise MalformedLine(line_no, f"right access must be read/write/own, got {right['access']!r}")
            rights.append((right["inode"], right["access"]))
        roles.append(SnapshotRole(r["role"], r["kind"], tuple(rights)))
    return KernelSnapshot(tuple(users), tuple(processes), tuple(files), tuple(roles))


def _record_to_json(rec: SyscallRecord) -> dict:
    return {
        "type": "syscall",
        "seq": rec.seq,
        "name": rec.name,
        "pid": rec.pid,
        "args": rec.args,
        "result": {"code": rec.result.code, "outputs": rec.result.outputs},
        "aux": rec.aux,
    }


def _record_from_json(obj: dict, line_no: int) -> SyscallRecord:
    _require_fields(
        obj,
        {"seq": int, "name": str, "pid": int, "args": dict, "result": dict},
        line_no,
        "syscall",
    )
    result = obj["result"]
    _require_fields(result, {"code": int, "outputs": dict}, line_no, "result")
    seq = obj["seq"]
    if isinstance(seq, bool) or seq <= 0:
        raise MalformedLine(line_no, f"seq must be a positive integer, got {seq!r}")
    if result["code"] < 0 and result["outputs"]:
        raise MalformedLine(line_no, "denied call must not carry outputs")
    aux = obj.get("aux", {})
    if not isinstance(aux, dict):
        raise MalformedLine(line_no, "aux must be an object")
    return SyscallRecord(
        seq=seq,
        name=obj["name"],
        pid=obj["pid"],
        args=obj["args"],
        result=SyscallResult(result["code"], result["outputs"]),
        aux=aux,
    )


def serialize_trace(trace: Trace) -> str:
    """Canonical text form of a trace, one record per line."""
    dump = lambda obj: json.dumps(obj, separators=(",", ":"), sort_keys=False)
    lines = [dump(_snapshot_to_json(trace.snapshot, "snapshot"))]
    lines.extend(dump(_record_to_json(rec)) for rec in trace.calls)
    if trace.final_snapshot is not None:
        lines.append(dump(_snapshot_to_json(trace.final_snapshot, "final_snapshot")))
    return "\n".join(lines) + "\n"


def parse_trace(data) -> Trace:
    """Parse trace text (str or UTF-8 bytes).

    Raises MalformedLine, MissingSnapshot, or NonMonotonicSeq.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = data.splitlines()

    snapshot = None
    final = None
    calls: list[SyscallRecord] = []
    last_seq = 0
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLine(line_no, f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict) or "type" not in obj:
            raise MalformedLine(line_no, "record must be an object with a 'type' field")
        kind = obj["type"]
        if snapshot is None:
            if kind != "snapshot":
                raise MissingSnapshot()
            snapshot = _snapshot_from_json(obj, line_no)
            continue
        if final is not None:
            raise MalformedLine(line_no, "records after final_snapshot")
        if kind == "syscall":
            rec = _record_from_json(obj, line_no)
            if rec.seq <= last_seq:
                raise NonMonotonicSeq(line_no, rec.seq, last_seq)
            last_seq = rec.seq
            calls.append(rec)
        elif kind == "final_snapshot":
            final = _snapshot_from_json(obj, line_no)
        elif kind == "snapshot":
            raise MalformedLine(line_no, "duplicate snapshot record")
        else:
            raise MalformedLine(line_no, f"unknown record type {kind!r}")
    if snapshot is None:
        raise MissingSnapshot()
    return Trace(snapshot=snapshot, calls=tuple(calls), final_snapshot=final)
