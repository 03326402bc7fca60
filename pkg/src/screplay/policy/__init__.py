"""Value-semantic access-control model: state, guarded events, invariants."""

from .labels import BOTTOM_LABEL, SecurityLabel
from .state import AccessKind, EntityId, PolicyState, RoleId, RoleKind, SubjectId, UserId
from .invariants import Violation, check_invariants, invariant_names, run_invariant_checks
from .events import (
    CATALOG,
    ArityMismatch,
    EventDescriptor,
    EventError,
    GuardFailure,
    UnknownEvent,
    apply_event,
    enabled,
)
from .flows import derive_flows, flow_edges

__all__ = [
    "AccessKind",
    "ArityMismatch",
    "BOTTOM_LABEL",
    "CATALOG",
    "EntityId",
    "EventDescriptor",
    "EventError",
    "GuardFailure",
    "PolicyState",
    "RoleId",
    "RoleKind",
    "SecurityLabel",
    "SubjectId",
    "UnknownEvent",
    "UserId",
    "Violation",
    "apply_event",
    "check_invariants",
    "derive_flows",
    "enabled",
    "flow_edges",
    "invariant_names",
    "run_invariant_checks",
]
