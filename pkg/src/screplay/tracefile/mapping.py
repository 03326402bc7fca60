"""Mapping between kernel-world identifiers and model identifiers.

The map is a bijection per namespace (uid/UserId, pid/SubjectId,
inode/EntityId, kernel role id/RoleId). Model ids are chosen equal to the
kernel ids, which keeps replays easy to read; the bijection is still kept
explicit so nothing downstream relies on the equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..policy.invariants import Violation, check_invariants
from ..policy.labels import SecurityLabel
from ..policy.state import AccessKind, PolicyState, RoleKind
from .model import KernelSnapshot, TraceError


class InconsistentSnapshot(TraceError):
    """The kernel's own state violates the model's invariants."""

    def __init__(self, violations):
        super().__init__(
            "snapshot is inconsistent: " + "; ".join(str(v) for v in violations)
        )
        self.violations = list(violations)


class UnknownKernelId(TraceError):
    def __init__(self, namespace: str, kernel_id):
        super().__init__(f"kernel {namespace} {kernel_id!r} is not mapped")
        self.namespace = namespace
        self.kernel_id = kernel_id


_ACCESS = {"read": AccessKind.READ, "write": AccessKind.WRITE, "own": AccessKind.OWN}
_ROLE_KIND = {
    "ordinary": RoleKind.ORDINARY,
    "administrative": RoleKind.ADMINISTRATIVE,
    "negative": RoleKind.NEGATIVE,
}


@dataclass
class IdMap:
    users: dict[int, int] = field(default_factory=dict)
    subjects: dict[int, int] = field(default_factory=dict)
    entities: dict[int, int] = field(default_factory=dict)
    roles: dict[int, int] = field(default_factory=dict)

    def _get(self, table: dict, namespace: str, kernel_id: int) -> int:
        try:
            return table[kernel_id]
        except KeyError:
            raise UnknownKernelId(namespace, kernel_id) from None

    def user(self, uid: int) -> int:
        return self._get(self.users, "uid", uid)

    def subject(self, pid: int) -> int:
        return self._get(self.subjects, "pid", pid)

    def entity(self, inode: int) -> int:
        return self._get(self.entities, "inode", inode)

    def role(self, rid: int) -> int:
        return self._get(self.roles, "role", rid)

    def has_entity(self, inode: int) -> bool:
        return inode in self.entities

    def add_entity(self, inode: int) -> int:
        """Register an inode first seen mid-trace (a created file)."""
        if inode in self.entities:
            return self.entities[inode]
        self.entities[inode] = inode
        return inode


def map_snapshot(snapshot: KernelSnapshot) -> tuple[PolicyState, IdMap]:
    """Build the model state a snapshot describes.

    Raises InconsistentSnapshot when the snapshot references undeclared ids
    or the resulting state fails any model invariant.
    """
    problems: list[Violation] = []

    uids = {u.uid for u in snapshot.users}
    inodes = {f.inode for f in snapshot.files}
    rids = {r.role for r in snapshot.roles}
    pids = {p.pid for p in snapshot.processes}

    def undeclared(kind, value):
        problems.append(Violation("snapshot", "undeclared-id", (kind, value)))

    for u in snapshot.users:
        for r in u.roles:
            if r not in rids:
                undeclared("role", r)
    for p in snapshot.processes:
        if p.uid not in uids:
            undeclared("uid", p.uid)
        for fd in p.fds:
            if fd.inode not in inodes:
                undeclared("inode", fd.inode)
    for f in snapshot.files:
        if f.parent is not None and f.parent not in inodes:
            undeclared("inode", f.parent)
    for r in snapshot.roles:
        for inode, _ in r.rights:
            if inode not in inodes:
                undeclared("inode", inode)
    if problems:
        raise InconsistentSnapshot(problems)

    idmap = IdMap(
        users={u: u for u in uids},
        subjects={p: p for p in pids},
        entities={i: i for i in inodes},
        roles={r: r for r in rids},
    )

    state = PolicyState(
        users=frozenset(idmap.users[u] for u in uids),
        subjects=frozenset(idmap.subjects[p] for p in pids),
        subject_owner={idmap.subject(p.pid): idmap.user(p.uid) for p in snapshot.processes},
        entities=frozenset(idmap.entities[i] for i in inodes),
        entity_is_container={idmap.entity(f.inode): f.is_dir for f in snapshot.files},
        entity_parent={
            idmap.entity(f.inode): idmap.entity(f.parent)
            for f in snapshot.files
            if f.parent is not None
        },
        entity_name={idmap.entity(f.inode): f.name for f in snapshot.files},
        roles=frozenset(idmap.roles[r] for r in rids),
        role_kind={idmap.role(r.role): _ROLE_KIND[r.kind] for r in snapshot.roles},
        subject_int={idmap.subject(p.pid): p.int_level for p in snapshot.processes},
        entity_int={idmap.entity(f.inode): f.int_level for f in snapshot.files},
        subject_sec={idmap.subject(p.pid): p.sec for p in snapshot.processes},
        entity_sec={idmap.entity(f.inode): f.sec for f in snapshot.files},
        subject_accesses={
            idmap.subject(p.pid): frozenset(
                (idmap.entity(fd.inode), _ACCESS[fd.access]) for fd in p.fds
            )
            for p in snapshot.processes
        },
        role_rights={
            idmap.role(r.role): frozenset(
                (idmap.entity(inode), _ACCESS[access]) for inode, access in r.rights
            )
            for r in snapshot.roles
        },
        user_roles={
            idmap.user(u.uid): frozenset(idmap.role(r) for r in u.roles)
            for u in snapshot.users
        },
    )

    violations = check_invariants(state)
    if violations:
        raise InconsistentSnapshot(violations)
    return state, idmap


# --------------------------------------------------------------- compare --


@dataclass(frozen=True)
class Divergence:
    field: str
    key: tuple
    expected: object
    actual: object

    def to_json(self) -> dict:
        return {
            "field": self.field,
            "key": [_plain(k) for k in self.key],
            "expected": _plain(self.expected),
            "actual": _plain(self.actual),
        }


def _plain(value):
    if isinstance(value, AccessKind) or isinstance(value, RoleKind):
        return value.value
    if isinstance(value, SecurityLabel):
        return {"level": value.level, "cats": sorted(value.categories)}
    return value


_ID_SETS = ("users", "subjects", "entities", "roles")
_SCALAR_MAPS = (
    "subject_owner",
    "entity_is_container",
    "entity_parent",
    "entity_name",
    "role_kind",
    "subject_int",
    "entity_int",
    "subject_sec",
    "entity_sec",
)
_SET_MAPS = ("subject_accesses", "role_rights", "user_roles")

PRESENT = "present"
ABSENT = "absent"


def compare_states(expected: PolicyState, actual: PolicyState) -> list[Divergence]:
    """Field-by-field comparison; empty iff the states are equal.

    The first argument is the reference (e.g. the mapped final snapshot),
    the second the replayed state; swapping them swaps expected/actual.
    """
    out: list[Divergence] = []

    for fname in _ID_SETS:
        exp, act = getattr(expected, fname), getattr(actual, fname)
        for missing in sorted(exp - act):
            out.append(Divergence(fname, (missing,), PRESENT, ABSENT))
        for extra in sorted(act - exp):
            out.append(Divergence(fname, (extra,), ABSENT, PRESENT))

    for fname in _SCALAR_MAPS:
        exp, act = getattr(expected, fname), getattr(actual, fname)
        for key in sorted(set(exp) | set(act)):
            if key not in act:
                out.append(Divergence(fname, (key,), exp[key], ABSENT))
            elif key not in exp:
                out.append(Divergence(fname, (key,), ABSENT, act[key]))
            elif exp[key] != act[key]:
                out.append(Divergence(fname, (key,), exp[key], act[key]))

    for fname in _SET_MAPS:
        exp, act = getattr(expected, fname), getattr(actual, fname)
        for key in sorted(set(exp) | set(act)):
            exp_items = exp.get(key, frozenset())
            act_items = act.get(key, frozenset())
            for item in sorted(exp_items - act_items, key=repr):
                flat = (key, *item) if isinstance(item, tuple) else (key, item)
                out.append(Divergence(fname, flat, PRESENT, ABSENT))
            for item in sorted(act_items - exp_items, key=repr):
                flat = (key, *item) if isinstance(item, tuple) else (key, item)
                out.append(Divergence(fname, flat, ABSENT, PRESENT))

    return out
