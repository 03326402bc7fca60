import pytest

from screplay.policy.events import (
    ArityMismatch,
    CATALOG,
    GuardFailure,
    UnknownEvent,
    apply_event,
    enabled,
)
from screplay.policy.invariants import check_invariants
from screplay.policy.state import AccessKind, PolicyState, RoleKind

from conftest import LOW, all_rights_state, small_state
from exhaustive import random_enabled_walk


def test_catalog_is_the_versioned_nineteen():
    assert sorted(CATALOG) == sorted(
        [
            "create_user",
            "delete_user",
            "create_subject",
            "delete_subject",
            "create_object",
            "create_container",
            "delete_entity",
            "rename_entity",
            "create_role",
            "delete_role",
            "assign_role",
            "revoke_role",
            "grant_rights",
            "revoke_rights",
            "access_read_entity",
            "access_write_entity",
            "release_access",
            "set_entity_int",
            "set_entity_sec",
        ]
    )


def test_enabled_on_empty_state():
    empty = PolicyState.empty()
    assert enabled(empty, "create_user", {"user": 1})
    assert not enabled(empty, "delete_entity", {"entity": 5})


def test_enabled_respects_integrity_rule():
    state = all_rights_state(subject_int=0, file_int=2)
    assert not enabled(state, "access_write_entity", {"subject": 1, "entity": 2})
    state = all_rights_state(subject_int=2, file_int=2)
    assert enabled(state, "access_write_entity", {"subject": 1, "entity": 2})


def test_unknown_event():
    with pytest.raises(UnknownEvent):
        enabled(PolicyState.empty(), "frobnicate", {})


def test_arity_mismatch():
    with pytest.raises(ArityMismatch):
        apply_event(PolicyState.empty(), "create_user", {"user": 1, "extra": 2})
    with pytest.raises(ArityMismatch):
        apply_event(PolicyState.empty(), "create_user", {})
    with pytest.raises(ArityMismatch):
        apply_event(PolicyState.empty(), "create_user", {"user": "one"})


def test_create_object_example():
    state = small_state(file_present=False)
    after = apply_event(
        state,
        "create_object",
        {"entity": 7, "parent": 1, "name": "n", "int_level": 1, "sec": LOW},
    )
    assert 7 in after.entities
    assert after.entity_parent[7] == 1
    assert state.entities == frozenset({1})  # input untouched


def test_guard_failure_names_first_conjunct_and_preserves_state():
    state = small_state()
    snapshot = state.evolve()
    with pytest.raises(GuardFailure) as exc:
        apply_event(state, "delete_entity", {"entity": 5})
    assert exc.value.conjunct == "entity-exists"
    assert state == snapshot


def test_guard_failure_on_container_with_children():
    state = small_state()
    with pytest.raises(GuardFailure) as exc:
        apply_event(state, "delete_entity", {"entity": 1})
    assert exc.value.conjunct == "no-children"


def test_delete_entity_strips_accesses_and_rights():
    state = all_rights_state(held=frozenset({(2, AccessKind.READ)}))
    after = apply_event(state, "delete_entity", {"entity": 2})
    assert 2 not in after.entities
    assert all(e != 2 for e, _ in after.subject_accesses[1])
    assert all(e != 2 for e, _ in after.role_rights[1])
    assert check_invariants(after) == []


def test_revoke_role_blocked_while_access_depends_on_it():
    state = all_rights_state(held=frozenset({(2, AccessKind.READ)}))
    assert not enabled(state, "revoke_role", {"user": 1, "role": 1})
    released = apply_event(state, "release_access", {"subject": 1, "entity": 2, "kind": AccessKind.READ})
    assert enabled(released, "revoke_role", {"user": 1, "role": 1})


def test_negative_role_blocks_access_and_assignment():
    state = all_rights_state()
    state = apply_event(state, "create_role", {"role": 2, "kind": RoleKind.NEGATIVE})
    state = apply_event(state, "grant_rights", {"role": 2, "entity": 2, "kind": AccessKind.READ})
    state = apply_event(state, "assign_role", {"user": 1, "role": 2})
    assert not enabled(state, "access_read_entity", {"subject": 1, "entity": 2})
    # Taking the access first blocks assigning the forbidding role instead.
    other = apply_event(all_rights_state(), "access_read_entity", {"subject": 1, "entity": 2})
    other = apply_event(other, "create_role", {"role": 2, "kind": RoleKind.NEGATIVE})
    other = apply_event(other, "grant_rights", {"role": 2, "entity": 2, "kind": AccessKind.READ})
    assert not enabled(other, "assign_role", {"user": 1, "role": 2})


def test_set_entity_int_guarded_by_current_writers():
    state = all_rights_state(subject_int=1, file_int=0)
    state = apply_event(state, "access_write_entity", {"subject": 1, "entity": 2})
    assert not enabled(state, "set_entity_int", {"entity": 2, "level": 2})
    assert enabled(state, "set_entity_int", {"entity": 2, "level": 1})
    after = apply_event(state, "set_entity_int", {"entity": 2, "level": 1})
    assert check_invariants(after) == []


def test_grant_rights_then_invariants_hold():
    state = small_state()
    after = apply_event(state, "grant_rights", {"role": 1, "entity": 2, "kind": AccessKind.WRITE})
    assert check_invariants(after) == []
    # Granting the same right twice is a no-op, not an error.
    assert apply_event(after, "grant_rights", {"role": 1, "entity": 2, "kind": AccessKind.WRITE}) == after


def test_random_walk_preserves_invariants():
    violations, applied = random_enabled_walk(
        PolicyState.empty(), steps=1500, seed=99, check_invariants=check_invariants
    )
    assert violations == []
    assert applied == 1500
