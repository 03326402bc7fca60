"""Guarded primitive events over PolicyState.

Each catalog event carries an ordered list of named guard conjuncts and a
pure action. Guards are strong enough that applying any enabled event from
an invariant-satisfying state lands in an invariant-satisfying state; the
test suite enforces this by randomized walks and bounded exhaustive search.

Actions never mutate the input state: they build a new PolicyState sharing
unchanged containers with the old one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .labels import SecurityLabel
from .state import AccessKind, PolicyState, RoleKind

Params = dict
GuardFn = Callable[[PolicyState, Params], bool]
ActionFn = Callable[[PolicyState, Params], PolicyState]


class EventError(Exception):
    pass


class UnknownEvent(EventError):
    def __init__(self, name: str):
        super().__init__(f"no such event: {name!r}")
        self.event = name


class ArityMismatch(EventError):
    def __init__(self, event: str, reason: str):
        super().__init__(f"{event}: {reason}")
        self.event = event


class GuardFailure(EventError):
    """Raised by apply_event when a guard conjunct does not hold."""

    def __init__(self, event: str, conjunct: str):
        super().__init__(f"guard of {event} failed at conjunct {conjunct!r}")
        self.event = event
        self.conjunct = conjunct


def _is_id(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v >= 0


_PARAM_CHECKS: dict[str, Callable] = {
    "id": _is_id,
    "opt_id": lambda v: v is None or _is_id(v),
    "level": _is_id,
    "sec": lambda v: isinstance(v, SecurityLabel),
    "access_kind": lambda v: isinstance(v, AccessKind),
    "role_kind": lambda v: isinstance(v, RoleKind),
    "name": lambda v: isinstance(v, str),
}


@dataclass(frozen=True)
class EventDescriptor:
    """A named event: parameter signature, guard conjuncts, action."""

    name: str
    signature: tuple[tuple[str, str], ...]
    guard: tuple[tuple[str, GuardFn], ...]
    action: ActionFn

    def validate_params(self, params: Params) -> None:
        expected = [n for n, _ in self.signature]
        if sorted(params) != sorted(expected):
            raise ArityMismatch(
                self.name, f"expected params {expected}, got {sorted(params)}"
            )
        for pname, ptype in self.signature:
            if not _PARAM_CHECKS[ptype](params[pname]):
                raise ArityMismatch(
                    self.name, f"param {pname!r} is not a valid {ptype}: {params[pname]!r}"
                )

    def failing_conjunct(self, state: PolicyState, params: Params) -> str | None:
        """Name of the first unsatisfied guard conjunct, or None if enabled."""
        for cname, fn in self.guard:
            if not fn(state, params):
                return cname
        return None


# ------------------------------------------------------- dict copy helpers


def _with(d: dict, key, value) -> dict:
    new = dict(d)
    new[key] = value
    return new


def _without(d: dict, key) -> dict:
    new = dict(d)
    new.pop(key, None)
    return new


def _name_free(state: PolicyState, parent, name, *, ignore=None) -> bool:
    return not any(
        p == parent and state.entity_name.get(c) == name and c != ignore
        for c, p in state.entity_parent.items()
    )


def _rbac_justified_without(
    state: PolicyState, owner, pair, *, drop_role=None, drop_right=None
) -> bool:
    """Would (e, kind) still be granted to owner's subjects after removing a
    role assignment or a role's right?"""
    for r in state.roles_of_user(owner):
        if r == drop_role:
            continue
        if state.role_kind.get(r) is RoleKind.NEGATIVE:
            continue
        rights = state.rights_of(r)
        if drop_right is not None and r == drop_right[0] and pair == drop_right[1]:
            rights = rights - {pair}
        if pair in rights:
            return True
    return False


# ------------------------------------------------------------ the catalog


def _act_create_user(s: PolicyState, p: Params) -> PolicyState:
    u = p["user"]
    return s.evolve(users=s.users | {u}, user_roles=_with(s.user_roles, u, frozenset()))


def _act_delete_user(s: PolicyState, p: Params) -> PolicyState:
    u = p["user"]
    return s.evolve(users=s.users - {u}, user_roles=_without(s.user_roles, u))


def _act_create_subject(s: PolicyState, p: Params) -> PolicyState:
    subj = p["subject"]
    return s.evolve(
        subjects=s.subjects | {subj},
        subject_owner=_with(s.subject_owner, subj, p["owner"]),
        subject_int=_with(s.subject_int, subj, p["int_level"]),
        subject_sec=_with(s.subject_sec, subj, p["sec"]),
        subject_accesses=_with(s.subject_accesses, subj, frozenset()),
    )


def _act_delete_subject(s: PolicyState, p: Params) -> PolicyState:
    subj = p["subject"]
    return s.evolve(
        subjects=s.subjects - {subj},
        subject_owner=_without(s.subject_owner, subj),
        subject_int=_without(s.subject_int, subj),
        subject_sec=_without(s.subject_sec, subj),
        subject_accesses=_without(s.subject_accesses, subj),
    )


def _act_create_entity(container: bool) -> ActionFn:
    def act(s: PolicyState, p: Params) -> PolicyState:
        e = p["entity"]
        parent = p.get("parent")
        new_parent = s.entity_parent if parent is None else _with(s.entity_parent, e, parent)
        return s.evolve(
            entities=s.entities | {e},
            entity_is_container=_with(s.entity_is_container, e, container),
            entity_parent=new_parent,
            entity_name=_with(s.entity_name, e, p["name"]),
            entity_int=_with(s.entity_int, e, p["int_level"]),
            entity_sec=_with(s.entity_sec, e, p["sec"]),
        )

    return act


def _act_delete_entity(s: PolicyState, p: Params) -> PolicyState:
    e = p["entity"]
    accesses = {
        subj: frozenset(pair for pair in pairs if pair[0] != e)
        for subj, pairs in s.subject_accesses.items()
    }
    rights = {
        r: frozenset(pair for pair in pairs if pair[0] != e)
        for r, pairs in s.role_rights.items()
    }
    return s.evolve(
        entities=s.entities - {e},
        entity_is_container=_without(s.entity_is_container, e),
        entity_parent=_without(s.entity_parent, e),
        entity_name=_without(s.entity_name, e),
        entity_int=_without(s.entity_int, e),
        entity_sec=_without(s.entity_sec, e),
        subject_accesses=accesses,
        role_rights=rights,
    )


def _act_rename_entity(s: PolicyState, p: Params) -> PolicyState:
    return s.evolve(entity_name=_with(s.entity_name, p["entity"], p["new_name"]))


def _act_create_role(s: PolicyState, p: Params) -> PolicyState:
    r = p["role"]
    return s.evolve(
        roles=s.roles | {r},
        role_kind=_with(s.role_kind, r, p["kind"]),
        role_rights=_with(s.role_rights, r, frozenset()),
    )


def _act_delete_role(s: PolicyState, p: Params) -> PolicyState:
    r = p["role"]
    return s.evolve(
        roles=s.roles - {r},
        role_kind=_without(s.role_kind, r),
        role_rights=_without(s.role_rights, r),
    )


def _act_assign_role(s: PolicyState, p: Params) -> PolicyState:
    u, r = p["user"], p["role"]
    return s.evolve(user_roles=_with(s.user_roles, u, s.roles_of_user(u) | {r}))


def _act_revoke_role(s: PolicyState, p: Params) -> PolicyState:
    u, r = p["user"], p["role"]
    return s.evolve(user_roles=_with(s.user_roles, u, s.roles_of_user(u) - {r}))


def _act_grant_rights(s: PolicyState, p: Params) -> PolicyState:
    r = p["role"]
    pair = (p["entity"], p["kind"])
    return s.evolve(role_rights=_with(s.role_rights, r, s.rights_of(r) | {pair}))


def _act_revoke_rights(s: PolicyState, p: Params) -> PolicyState:
    r = p["role"]
    pair = (p["entity"], p["kind"])
    return s.evolve(role_rights=_with(s.role_rights, r, s.rights_of(r) - {pair}))


def _act_take_access(kind: AccessKind) -> ActionFn:
    def act(s: PolicyState, p: Params) -> PolicyState:
        subj = p["subject"]
        pairs = s.accesses_of(subj) | {(p["entity"], kind)}
        return s.evolve(subject_accesses=_with(s.subject_accesses, subj, pairs))

    return act


def _act_release_access(s: PolicyState, p: Params) -> PolicyState:
    subj = p["subject"]
    pairs = s.accesses_of(subj) - {(p["entity"], p["kind"])}
    return s.evolve(subject_accesses=_with(s.subject_accesses, subj, pairs))


def _act_set_entity_int(s: PolicyState, p: Params) -> PolicyState:
    return s.evolve(entity_int=_with(s.entity_int, p["entity"], p["level"]))


def _act_set_entity_sec(s: PolicyState, p: Params) -> PolicyState:
    return s.evolve(entity_sec=_with(s.entity_sec, p["entity"], p["sec"]))


def _writers_of(s: PolicyState, e) -> list:
    return [subj for subj in s.subjects if s.holds(subj, e, AccessKind.WRITE)]


def _readers_of(s: PolicyState, e) -> list:
    return [subj for subj in s.subjects if s.holds(subj, e, AccessKind.READ)]


def _subjects_of_user(s: PolicyState, u) -> list:
    return [subj for subj, owner in s.subject_owner.items() if owner == u]


def _negative_grant_safe(s: PolicyState, p: Params) -> bool:
    """Adding (entity, kind) to a negative role must not contradict an access
    already held by a subject of any user carrying that role."""
    r = p["role"]
    if s.role_kind.get(r) is not RoleKind.NEGATIVE:
        return True
    pair = (p["entity"], p["kind"])
    for u, rs in s.user_roles.items():
        if r in rs:
            for subj in _subjects_of_user(s, u):
                if pair in s.accesses_of(subj):
                    return False
    return True


def _negative_assign_safe(s: PolicyState, p: Params) -> bool:
    r = p["role"]
    if s.role_kind.get(r) is not RoleKind.NEGATIVE:
        return True
    forbidden = s.rights_of(r)
    return not any(
        pair in forbidden
        for subj in _subjects_of_user(s, p["user"])
        for pair in s.accesses_of(subj)
    )


def _revoke_role_safe(s: PolicyState, p: Params) -> bool:
    """Revoking a granting role must not orphan a held access."""
    u, r = p["user"], p["role"]
    if s.role_kind.get(r) is RoleKind.NEGATIVE:
        return True
    for subj in _subjects_of_user(s, u):
        for pair in s.accesses_of(subj):
            if not _rbac_justified_without(s, u, pair, drop_role=r):
                return False
    return True


def _revoke_rights_safe(s: PolicyState, p: Params) -> bool:
    r = p["role"]
    if s.role_kind.get(r) is RoleKind.NEGATIVE:
        return True
    pair = (p["entity"], p["kind"])
    for u, rs in s.user_roles.items():
        if r not in rs:
            continue
        for subj in _subjects_of_user(s, u):
            if pair in s.accesses_of(subj):
                if not _rbac_justified_without(s, u, pair, drop_right=(r, pair)):
                    return False
    return True


def _ev(name, signature, guard, action) -> EventDescriptor:
    return EventDescriptor(name, tuple(signature), tuple(guard), action)


CATALOG: dict[str, EventDescriptor] = {
    ev.name: ev
    for ev in [
        _ev(
            "create_user",
            [("user", "id")],
            [("user-fresh", lambda s, p: p["user"] not in s.users)],
            _act_create_user,
        ),
        _ev(
            "delete_user",
            [("user", "id")],
            [
                ("user-exists", lambda s, p: p["user"] in s.users),
                (
                    "owns-no-subject",
                    lambda s, p: not _subjects_of_user(s, p["user"]),
                ),
            ],
            _act_delete_user,
        ),
        _ev(
            "create_subject",
            [("subject", "id"), ("owner", "id"), ("int_level", "level"), ("sec", "sec")],
            [
                ("subject-fresh", lambda s, p: p["subject"] not in s.subjects),
                ("owner-exists", lambda s, p: p["owner"] in s.users),
            ],
            _act_create_subject,
        ),
        _ev(
            "delete_subject",
            [("subject", "id")],
            [("subject-exists", lambda s, p: p["subject"] in s.subjects)],
            _act_delete_subject,
        ),
        _ev(
            "create_object",
            [
                ("entity", "id"),
                ("parent", "id"),
                ("name", "name"),
                ("int_level", "level"),
                ("sec", "sec"),
            ],
            [
                ("entity-fresh", lambda s, p: p["entity"] not in s.entities),
                ("parent-exists", lambda s, p: p["parent"] in s.entities),
                (
                    "parent-is-container",
                    lambda s, p: s.entity_is_container.get(p["parent"], False),
                ),
                ("name-free", lambda s, p: _name_free(s, p["parent"], p["name"])),
            ],
            _act_create_entity(container=False),
        ),
        _ev(
            "create_container",
            [
                ("entity", "id"),
                ("parent", "opt_id"),
                ("name", "name"),
                ("int_level", "level"),
                ("sec", "sec"),
            ],
            [
                ("entity-fresh", lambda s, p: p["entity"] not in s.entities),
                (
                    "parent-exists",
                    lambda s, p: p["parent"] is None or p["parent"] in s.entities,
                ),
                (
                    "parent-is-container",
                    lambda s, p: p["parent"] is None
                    or s.entity_is_container.get(p["parent"], False),
                ),
                (
                    "name-free",
                    lambda s, p: p["parent"] is None
                    or _name_free(s, p["parent"], p["name"]),
                ),
            ],
            _act_create_entity(container=True),
        ),
        _ev(
            "delete_entity",
            [("entity", "id")],
            [
                ("entity-exists", lambda s, p: p["entity"] in s.entities),
                ("no-children", lambda s, p: not s.children_of(p["entity"])),
            ],
            _act_delete_entity,
        ),
        _ev(
            "rename_entity",
            [("entity", "id"), ("new_name", "name")],
            [
                ("entity-exists", lambda s, p: p["entity"] in s.entities),
                ("has-parent", lambda s, p: p["entity"] in s.entity_parent),
                (
                    "name-free",
                    lambda s, p: _name_free(
                        s,
                        s.entity_parent.get(p["entity"]),
                        p["new_name"],
                        ignore=p["entity"],
                    ),
                ),
            ],
            _act_rename_entity,
        ),
        _ev(
            "create_role",
            [("role", "id"), ("kind", "role_kind")],
            [("role-fresh", lambda s, p: p["role"] not in s.roles)],
            _act_create_role,
        ),
        _ev(
            "delete_role",
            [("role", "id")],
            [
                ("role-exists", lambda s, p: p["role"] in s.roles),
                (
                    "not-assigned",
                    lambda s, p: not any(p["role"] in rs for rs in s.user_roles.values()),
                ),
            ],
            _act_delete_role,
        ),
        _ev(
            "assign_role",
            [("user", "id"), ("role", "id")],
            [
                ("user-exists", lambda s, p: p["user"] in s.users),
                ("role-exists", lambda s, p: p["role"] in s.roles),
                (
                    "not-already-assigned",
                    lambda s, p: p["role"] not in s.roles_of_user(p["user"]),
                ),
                ("negative-safe", _negative_assign_safe),
            ],
            _act_assign_role,
        ),
        _ev(
            "revoke_role",
            [("user", "id"), ("role", "id")],
            [
                ("user-exists", lambda s, p: p["user"] in s.users),
                ("role-assigned", lambda s, p: p["role"] in s.roles_of_user(p["user"])),
                ("no-orphaned-access", _revoke_role_safe),
            ],
            _act_revoke_role,
        ),
        _ev(
            "grant_rights",
            [("role", "id"), ("entity", "id"), ("kind", "access_kind")],
            [
                ("role-exists", lambda s, p: p["role"] in s.roles),
                ("entity-exists", lambda s, p: p["entity"] in s.entities),
                ("negative-safe", _negative_grant_safe),
            ],
            _act_grant_rights,
        ),
        _ev(
            "revoke_rights",
            [("role", "id"), ("entity", "id"), ("kind", "access_kind")],
            [
                ("role-exists", lambda s, p: p["role"] in s.roles),
                (
                    "right-granted",
                    lambda s, p: (p["entity"], p["kind"]) in s.rights_of(p["role"]),
                ),
                ("no-orphaned-access", _revoke_rights_safe),
            ],
            _act_revoke_rights,
        ),
        _ev(
            "access_read_entity",
            [("subject", "id"), ("entity", "id")],
            [
                ("subject-exists", lambda s, p: p["subject"] in s.subjects),
                ("entity-exists", lambda s, p: p["entity"] in s.entities),
                (
                    "rbac-allows",
                    lambda s, p: s.grants(
                        s.subject_owner.get(p["subject"]), p["entity"], AccessKind.READ
                    ),
                ),
                (
                    "mls-read",
                    lambda s, p: s.entity_sec[p["entity"]] <= s.subject_sec[p["subject"]],
                ),
            ],
            _act_take_access(AccessKind.READ),
        ),
        _ev(
            "access_write_entity",
            [("subject", "id"), ("entity", "id")],
            [
                ("subject-exists", lambda s, p: p["subject"] in s.subjects),
                ("entity-exists", lambda s, p: p["entity"] in s.entities),
                (
                    "rbac-allows",
                    lambda s, p: s.grants(
                        s.subject_owner.get(p["subject"]), p["entity"], AccessKind.WRITE
                    ),
                ),
                (
                    "mic-write",
                    lambda s, p: s.entity_int[p["entity"]] <= s.subject_int[p["subject"]],
                ),
                (
                    "mls-write",
                    lambda s, p: s.subject_sec[p["subject"]] <= s.entity_sec[p["entity"]],
                ),
            ],
            _act_take_access(AccessKind.WRITE),
        ),
        _ev(
            "release_access",
            [("subject", "id"), ("entity", "id"), ("kind", "access_kind")],
            [
                ("subject-exists", lambda s, p: p["subject"] in s.subjects),
                (
                    "access-held",
                    lambda s, p: (p["entity"], p["kind"]) in s.accesses_of(p["subject"]),
                ),
            ],
            _act_release_access,
        ),
        _ev(
            "set_entity_int",
            [("entity", "id"), ("level", "level")],
            [
                ("entity-exists", lambda s, p: p["entity"] in s.entities),
                (
                    "writers-dominate",
                    lambda s, p: all(
                        p["level"] <= s.subject_int[w] for w in _writers_of(s, p["entity"])
                    ),
                ),
            ],
            _act_set_entity_int,
        ),
        _ev(
            "set_entity_sec",
            [("entity", "id"), ("sec", "sec")],
            [
                ("entity-exists", lambda s, p: p["entity"] in s.entities),
                (
                    "readers-dominate",
                    lambda s, p: all(
                        p["sec"] <= s.subject_sec[r] for r in _readers_of(s, p["entity"])
                    ),
                ),
                (
                    "writers-dominated",
                    lambda s, p: all(
                        s.subject_sec[w] <= p["sec"] for w in _writers_of(s, p["entity"])
                    ),
                ),
            ],
            _act_set_entity_sec,
        ),
    ]
}


def _lookup(event: str) -> EventDescriptor:
    try:
        return CATALOG[event]
    except KeyError:
        raise UnknownEvent(event) from None


def enabled(state: PolicyState, event: str, params: Params) -> bool:
    """True iff the event's guard holds in the state."""
    desc = _lookup(event)
    desc.validate_params(params)
    return desc.failing_conjunct(state, params) is None


def apply_event(state: PolicyState, event: str, params: Params) -> PolicyState:
    """Apply an enabled event; raises GuardFailure (naming the first failed
    conjunct) otherwise. The input state is never modified."""
    desc = _lookup(event)
    desc.validate_params(params)
    failed = desc.failing_conjunct(state, params)
    if failed is not None:
        raise GuardFailure(event, failed)
    return desc.action(state, params)
