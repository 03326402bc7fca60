"""Syscall event graphs and the single-call replay interpreter."""

from .model import (
    Arc,
    CatalogEffect,
    EventNode,
    GraphError,
    MalformedParams,
    ReplayOutcome,
    Resolution,
    SyscallGraph,
    UnknownSyscall,
    Verdict,
    find_root,
    fresh_entity_id,
    primary_role,
    resolve_path,
    to_dot,
    validate_params,
)
from .interpreter import replay_syscall
from .catalog import GRAPH_CATALOG, build_catalog
from .validate import GraphDefect, bounded_cases, validate_graph

__all__ = [
    "Arc",
    "CatalogEffect",
    "EventNode",
    "GRAPH_CATALOG",
    "GraphDefect",
    "GraphError",
    "MalformedParams",
    "ReplayOutcome",
    "Resolution",
    "SyscallGraph",
    "UnknownSyscall",
    "Verdict",
    "bounded_cases",
    "build_catalog",
    "find_root",
    "fresh_entity_id",
    "primary_role",
    "replay_syscall",
    "resolve_path",
    "to_dot",
    "validate_graph",
    "validate_params",
]
