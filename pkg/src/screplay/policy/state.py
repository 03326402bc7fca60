"""The policy model's world state.

PolicyState is an immutable value: every transition builds a new state and
never touches the input. All container fields hold immutable values
(frozensets, ints, enums), so shallow copies of the top-level dicts give
safe structural sharing. Rollback is then just "keep the old object".

Identifier namespaces (users, subjects, entities, roles) are disjoint by
construction even when the integers coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .labels import SecurityLabel

UserId = int
SubjectId = int
EntityId = int
RoleId = int


class AccessKind(Enum):
    """How a subject may touch an entity, or what a role right permits."""

    READ = "read"
    WRITE = "write"
    OWN = "own"


class RoleKind(Enum):
    ORDINARY = "ordinary"
    ADMINISTRATIVE = "administrative"
    # A negative role's rights list forbidden accesses instead of granting them.
    NEGATIVE = "negative"


Access = tuple[EntityId, AccessKind]


@dataclass(frozen=True)
class PolicyState:
    """All state variables of the access-control model.

    ``entity_parent`` is partial: root entities have no key. ``entity_name``
    is the entity's component name within its parent; roots have name "".
    """

    users: frozenset[UserId] = frozenset()
    subjects: frozenset[SubjectId] = frozenset()
    subject_owner: dict[SubjectId, UserId] = field(default_factory=dict)
    entities: frozenset[EntityId] = frozenset()
    entity_is_container: dict[EntityId, bool] = field(default_factory=dict)
    entity_parent: dict[EntityId, EntityId] = field(default_factory=dict)
    entity_name: dict[EntityId, str] = field(default_factory=dict)
    roles: frozenset[RoleId] = frozenset()
    role_kind: dict[RoleId, RoleKind] = field(default_factory=dict)
    subject_int: dict[SubjectId, int] = field(default_factory=dict)
    entity_int: dict[EntityId, int] = field(default_factory=dict)
    subject_sec: dict[SubjectId, SecurityLabel] = field(default_factory=dict)
    entity_sec: dict[EntityId, SecurityLabel] = field(default_factory=dict)
    subject_accesses: dict[SubjectId, frozenset[Access]] = field(default_factory=dict)
    role_rights: dict[RoleId, frozenset[Access]] = field(default_factory=dict)
    user_roles: dict[UserId, frozenset[RoleId]] = field(default_factory=dict)

    @classmethod
    def empty(cls) -> "PolicyState":
        return cls()

    def evolve(self, **changes) -> "PolicyState":
        """New state with the given fields replaced; the original is untouched."""
        return replace(self, **changes)

    # -- read helpers used across guards; all total --

    def accesses_of(self, s: SubjectId) -> frozenset[Access]:
        return self.subject_accesses.get(s, frozenset())

    def rights_of(self, r: RoleId) -> frozenset[Access]:
        return self.role_rights.get(r, frozenset())

    def roles_of_user(self, u: UserId) -> frozenset[RoleId]:
        return self.user_roles.get(u, frozenset())

    def holds(self, s: SubjectId, e: EntityId, kind: AccessKind) -> bool:
        return (e, kind) in self.accesses_of(s)

    def children_of(self, e: EntityId) -> frozenset[EntityId]:
        return frozenset(c for c, p in self.entity_parent.items() if p == e)

    def grants(self, u: UserId, e: EntityId, kind: AccessKind) -> bool:
        """RBAC decision for user ``u`` on (e, kind): some non-negative role of
        the user lists the pair, and no negative role of the user lists it."""
        granted = False
        for r in self.roles_of_user(u):
            if (e, kind) in self.rights_of(r):
                if self.role_kind.get(r) is RoleKind.NEGATIVE:
                    return False
                granted = True
        return granted

    def forbidden_by_negative(self, u: UserId, e: EntityId, kind: AccessKind) -> bool:
        return any(
            self.role_kind.get(r) is RoleKind.NEGATIVE and (e, kind) in self.rights_of(r)
            for r in self.roles_of_user(u)
        )

    def roots(self) -> frozenset[EntityId]:
        return frozenset(e for e in self.entities if e not in self.entity_parent)
