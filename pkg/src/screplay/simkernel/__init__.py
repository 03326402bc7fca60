"""Mock kernel: deterministic trace generation with fault injection."""

from .state import SimState
from .checker import Decision, creator_role, decide
from .config import (
    FAULT_KINDS,
    MISSING_HOOK,
    RESOURCE_EXHAUSTION,
    WRONG_DENY,
    WRONG_GRANT,
    FaultNeverTriggers,
    FaultSpec,
    InvalidConfig,
    SimConfig,
    SimError,
    dump_config,
    load_config,
)
from .generate import build_initial_state, generate_trace, inject

__all__ = [
    "Decision",
    "FAULT_KINDS",
    "FaultNeverTriggers",
    "FaultSpec",
    "InvalidConfig",
    "MISSING_HOOK",
    "RESOURCE_EXHAUSTION",
    "SimConfig",
    "SimError",
    "SimState",
    "WRONG_DENY",
    "WRONG_GRANT",
    "build_initial_state",
    "creator_role",
    "decide",
    "dump_config",
    "generate_trace",
    "inject",
    "load_config",
]
