import os

import pytest

from screplay.policy.labels import SecurityLabel
from screplay.policy.state import AccessKind, PolicyState, RoleKind

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))


def repo_path(*parts: str) -> str:
    return os.path.join(REPO_ROOT, *parts)


@pytest.fixture
def golden(request):
    def load(name: str) -> bytes:
        with open(repo_path("traces", name), "rb") as fh:
            return fh.read()

    return load


LOW = SecurityLabel(0)
HIGH = SecurityLabel(1, frozenset({0}))


def small_state(
    *,
    file_present: bool = True,
    subject_int: int = 1,
    file_int: int = 0,
    subject_sec: SecurityLabel = LOW,
    file_sec: SecurityLabel = LOW,
    rights: frozenset = frozenset(),
    held: frozenset = frozenset(),
) -> PolicyState:
    """One user/subject/role, a root container (1), optionally a file (2)."""
    entities = {1} | ({2} if file_present else set())
    return PolicyState(
        users=frozenset({1}),
        subjects=frozenset({1}),
        subject_owner={1: 1},
        entities=frozenset(entities),
        entity_is_container={1: True, **({2: False} if file_present else {})},
        entity_parent={2: 1} if file_present else {},
        entity_name={1: "", **({2: "f"} if file_present else {})},
        roles=frozenset({1}),
        role_kind={1: RoleKind.ORDINARY},
        subject_int={1: subject_int},
        entity_int={1: 0, **({2: file_int} if file_present else {})},
        subject_sec={1: subject_sec},
        entity_sec={1: LOW, **({2: file_sec} if file_present else {})},
        subject_accesses={1: frozenset(held)},
        role_rights={1: frozenset(rights)},
        user_roles={1: frozenset({1})},
    )


def all_rights_state(**kwargs) -> PolicyState:
    rights = frozenset(
        {(1, AccessKind.WRITE), (2, AccessKind.READ), (2, AccessKind.WRITE), (2, AccessKind.OWN)}
    )
    return small_state(rights=rights, **kwargs)
