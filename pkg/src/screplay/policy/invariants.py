"""The three-group invariant checker over PolicyState.

Every invariant is a named, independently checkable predicate. A check
returns the violating witnesses (smallest tuple that pins the offense) plus
the size of the domain it quantified over; a domain size of zero means the
check was vacuous, which the coverage report uses to tell "held" apart from
"never exercised".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .labels import SecurityLabel
from .state import AccessKind, PolicyState, RoleKind

TYPING = "typing"
CONSISTENCY = "consistency"
SECURITY = "security"


@dataclass(frozen=True)
class Violation:
    group: str
    name: str
    witness: tuple

    def __str__(self):
        return f"{self.group}/{self.name} witness={self.witness}"


CheckResult = tuple[list[tuple], int]
CheckFn = Callable[[PolicyState], CheckResult]

_REGISTRY: list[tuple[str, str, CheckFn]] = []


def _invariant(group: str, name: str):
    def register(fn: CheckFn) -> CheckFn:
        _REGISTRY.append((group, name, fn))
        return fn

    return register


def _check_total_map(mapping: dict, domain: frozenset, valid_value) -> CheckResult:
    bad = [(k,) for k in domain if k not in mapping]
    bad += [(k,) for k in mapping if k not in domain]
    bad += [(k,) for k, v in mapping.items() if k in domain and not valid_value(v)]
    return bad, len(domain) + len(mapping)


def _is_level(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v >= 0


# ---------------------------------------------------------------- typing ---


@_invariant(TYPING, "subject-owner")
def _subject_owner(s: PolicyState) -> CheckResult:
    return _check_total_map(s.subject_owner, s.subjects, lambda u: u in s.users)


@_invariant(TYPING, "entity-container")
def _entity_container(s: PolicyState) -> CheckResult:
    return _check_total_map(s.entity_is_container, s.entities, lambda v: isinstance(v, bool))


@_invariant(TYPING, "entity-parent")
def _entity_parent(s: PolicyState) -> CheckResult:
    bad = [(e,) for e, p in s.entity_parent.items() if e not in s.entities or p not in s.entities]
    return bad, len(s.entity_parent)


@_invariant(TYPING, "entity-name")
def _entity_name(s: PolicyState) -> CheckResult:
    return _check_total_map(s.entity_name, s.entities, lambda n: isinstance(n, str))


@_invariant(TYPING, "role-kind")
def _role_kind(s: PolicyState) -> CheckResult:
    return _check_total_map(s.role_kind, s.roles, lambda k: isinstance(k, RoleKind))


@_invariant(TYPING, "subject-int")
def _subject_int(s: PolicyState) -> CheckResult:
    return _check_total_map(s.subject_int, s.subjects, _is_level)


@_invariant(TYPING, "entity-int")
def _entity_int(s: PolicyState) -> CheckResult:
    return _check_total_map(s.entity_int, s.entities, _is_level)


@_invariant(TYPING, "subject-sec")
def _subject_sec(s: PolicyState) -> CheckResult:
    return _check_total_map(s.subject_sec, s.subjects, lambda v: isinstance(v, SecurityLabel))


@_invariant(TYPING, "entity-sec")
def _entity_sec(s: PolicyState) -> CheckResult:
    return _check_total_map(s.entity_sec, s.entities, lambda v: isinstance(v, SecurityLabel))


def _wellformed_pairs(pairs: Iterable, s: PolicyState) -> bool:
    return all(
        isinstance(kind, AccessKind) and e in s.entities for e, kind in pairs
    )


@_invariant(TYPING, "subject-accesses")
def _subject_accesses(s: PolicyState) -> CheckResult:
    bad, n = _check_total_map(
        s.subject_accesses, s.subjects, lambda pairs: _wellformed_pairs(pairs, s)
    )
    n += sum(len(p) for p in s.subject_accesses.values())
    return bad, n


@_invariant(TYPING, "role-rights")
def _role_rights(s: PolicyState) -> CheckResult:
    bad, n = _check_total_map(s.role_rights, s.roles, lambda pairs: _wellformed_pairs(pairs, s))
    n += sum(len(p) for p in s.role_rights.values())
    return bad, n


@_invariant(TYPING, "user-roles")
def _user_roles(s: PolicyState) -> CheckResult:
    return _check_total_map(s.user_roles, s.users, lambda rs: all(r in s.roles for r in rs))


# ----------------------------------------------------------- consistency ---


@_invariant(CONSISTENCY, "acyclic-hierarchy")
def _acyclic(s: PolicyState) -> CheckResult:
    on_cycle = set()
    cleared: set[int] = set()
    for start in s.entity_parent:
        seen: list[int] = []
        node = start
        while node in s.entity_parent and node not in cleared and node not in seen:
            seen.append(node)
            node = s.entity_parent[node]
        if node in seen:
            on_cycle.update(seen[seen.index(node):])
        cleared.update(seen)
    witnesses = [(min(on_cycle),)] if on_cycle else []
    return witnesses, len(s.entity_parent)


@_invariant(CONSISTENCY, "parents-are-containers")
def _parents_containers(s: PolicyState) -> CheckResult:
    bad = [
        (e,)
        for e, p in s.entity_parent.items()
        if not s.entity_is_container.get(p, False)
    ]
    return bad, len(s.entity_parent)


@_invariant(CONSISTENCY, "name-unique-in-parent")
def _unique_names(s: PolicyState) -> CheckResult:
    seen: dict[tuple, int] = {}
    bad = []
    for e, p in sorted(s.entity_parent.items()):
        key = (p, s.entity_name.get(e))
        if key in seen:
            bad.append(key)
        seen[key] = e
    return bad, len(s.entity_parent)


# -------------------------------------------------------------- security ---


@_invariant(SECURITY, "MIC-write")
def _mic_write(s: PolicyState) -> CheckResult:
    bad, n = [], 0
    for subj, pairs in s.subject_accesses.items():
        for e, kind in pairs:
            if kind is not AccessKind.WRITE:
                continue
            n += 1
            if s.entity_int.get(e, 0) > s.subject_int.get(subj, 0):
                bad.append((subj, e))
    return bad, n


@_invariant(SECURITY, "MLS-read")
def _mls_read(s: PolicyState) -> CheckResult:
    bad, n = [], 0
    for subj, pairs in s.subject_accesses.items():
        for e, kind in pairs:
            if kind is not AccessKind.READ:
                continue
            n += 1
            if not s.entity_sec.get(e, SecurityLabel(0)) <= s.subject_sec.get(subj, SecurityLabel(0)):
                bad.append((subj, e))
    return bad, n


@_invariant(SECURITY, "MLS-write")
def _mls_write(s: PolicyState) -> CheckResult:
    bad, n = [], 0
    for subj, pairs in s.subject_accesses.items():
        for e, kind in pairs:
            if kind is not AccessKind.WRITE:
                continue
            n += 1
            if not s.subject_sec.get(subj, SecurityLabel(0)) <= s.entity_sec.get(e, SecurityLabel(0)):
                bad.append((subj, e))
    return bad, n


@_invariant(SECURITY, "RBAC-grant")
def _rbac_grant(s: PolicyState) -> CheckResult:
    bad, n = [], 0
    for subj, pairs in s.subject_accesses.items():
        owner = s.subject_owner.get(subj)
        for e, kind in pairs:
            n += 1
            granted = any(
                (e, kind) in s.rights_of(r)
                for r in s.roles_of_user(owner)
                if s.role_kind.get(r) is not RoleKind.NEGATIVE
            )
            if not granted:
                bad.append((subj, e, kind))
    return bad, n


@_invariant(SECURITY, "negative-role")
def _negative_role(s: PolicyState) -> CheckResult:
    bad, n = [], 0
    for subj, pairs in s.subject_accesses.items():
        owner = s.subject_owner.get(subj)
        for e, kind in pairs:
            n += 1
            if s.forbidden_by_negative(owner, e, kind):
                bad.append((subj, e, kind))
    return bad, n


# ---------------------------------------------------------------- driver ---


def invariant_names() -> list[tuple[str, str]]:
    """All (group, name) pairs, in registration order."""
    return [(group, name) for group, name, _ in _REGISTRY]


def run_invariant_checks(state: PolicyState) -> list[tuple[str, str, list[tuple], int]]:
    """Run every named check; returns (group, name, witnesses, domain_size)."""
    return [(group, name, *fn(state)) for group, name, fn in _REGISTRY]


def check_invariants(state: PolicyState) -> list[Violation]:
    """All violations in the state; empty iff every named invariant holds."""
    out = []
    for group, name, witnesses, _ in run_invariant_checks(state):
        out.extend(Violation(group, name, w) for w in witnesses)
    return out
