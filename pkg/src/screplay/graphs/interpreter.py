"""Single-syscall replay: walk the event graph to a Granted/Denied verdict.

The walk starts at the graph's initial node. At each node the guard is
evaluated (first failing conjunct denies the call at that node), the effect
is applied to the working state, and the successor arcs pick the next node;
a node without arcs is the final node and ends the walk as Granted.

Denial is side-effect free at this boundary: a Denied outcome carries the
caller's input state unchanged, whatever had accumulated along the path.
"""

from __future__ import annotations

from ..policy.events import GuardFailure, apply_event
from ..policy.state import PolicyState
from .model import (
    Params,
    ReplayOutcome,
    SyscallGraph,
    UnknownSyscall,
    Verdict,
    validate_params,
)


class CoverageHook:
    """Observation interface for coverage accounting; all methods optional."""

    def node_visited(self, graph: str, node: str) -> None:  # pragma: no cover
        pass

    def conjunct_observed(self, graph: str, conjunct: str, value: bool) -> None:  # pragma: no cover
        pass


def _evaluate_guard(graph, node, state, params, hook) -> str | None:
    """First failing conjunct name, or None. Every conjunct of the node is
    evaluated for observation even after one fails; the semantic result is
    still the first failure in order."""
    failed = None
    for cname, pred in node.guard:
        value = bool(pred(state, params))
        if hook is not None:
            hook.conjunct_observed(graph.name, cname, value)
        if not value and failed is None:
            failed = cname
    return failed


def replay_syscall(
    state: PolicyState,
    graphs: dict[str, SyscallGraph],
    syscall: str,
    params: Params,
    hook=None,
) -> ReplayOutcome:
    """Replay one syscall invocation against the model state.

    Pure: equal inputs give equal outcomes. Raises UnknownSyscall and
    MalformedParams; never leaks partial state on denial.
    """
    if syscall not in graphs:
        raise UnknownSyscall(syscall)
    graph = graphs[syscall]
    params = validate_params(syscall, params)

    original = state
    node = graph.nodes[graph.initial]
    path: list[str] = []

    while True:
        path.append(node.name)
        if hook is not None:
            hook.node_visited(graph.name, node.name)

        failed = _evaluate_guard(graph, node, state, params, hook)
        if failed is not None:
            return ReplayOutcome(
                Verdict.DENIED, tuple(path), original, node.name, -node.deny_errno
            )

        if node.effect is not None:
            try:
                bound = node.effect.bind(state, params)
                state = apply_event(state, node.effect.event, bound)
            except GuardFailure:
                # The node admitted a case its catalog event forbids. The
                # model denies; graph validation hunts these down.
                return ReplayOutcome(
                    Verdict.DENIED, tuple(path), original, node.name, -node.deny_errno
                )

        if not node.arcs:
            return ReplayOutcome(
                Verdict.GRANTED, tuple(path), state, None, graph.result_fn(state, params)
            )

        target = None
        for arc in node.arcs:
            if arc.condition(state, params):
                target = arc.target
                break
        if target is None:
            return ReplayOutcome(
                Verdict.DENIED, tuple(path), original, node.name, -node.deny_errno
            )
        node = graph.nodes[target]
