"""Information-flow derivation.

A held write access moves information from the subject into the entity; a
held read access moves it from the entity into the reader. Flows are the
transitive closure of those edges. Nodes are tagged with their namespace so
a subject and an entity with the same numeric id stay distinct.
"""

from __future__ import annotations

from .state import AccessKind, PolicyState

FlowNode = tuple[str, int]

SUBJECT = "subject"
ENTITY = "entity"


def flow_edges(state: PolicyState) -> set[tuple[FlowNode, FlowNode]]:
    """Direct one-step flows induced by currently held accesses."""
    edges = set()
    for subj, pairs in state.subject_accesses.items():
        for e, kind in pairs:
            if kind is AccessKind.WRITE:
                edges.add(((SUBJECT, subj), (ENTITY, e)))
            elif kind is AccessKind.READ:
                edges.add(((ENTITY, e), (SUBJECT, subj)))
    return edges


def derive_flows(state: PolicyState) -> set[tuple[FlowNode, FlowNode]]:
    """Transitive closure of the direct flow edges (excluding empty paths)."""
    adj: dict[FlowNode, set[FlowNode]] = {}
    for src, dst in flow_edges(state):
        adj.setdefault(src, set()).add(dst)

    closure = set()
    for start in adj:
        # BFS; a node can flow to itself only via a genuine cycle.
        frontier = list(adj[start])
        reached = set()
        while frontier:
            node = frontier.pop()
            if node in reached:
                continue
            reached.add(node)
            frontier.extend(adj.get(node, ()))
        closure.update((start, node) for node in reached)
    return closure
