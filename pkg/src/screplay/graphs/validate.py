"""Structural and behavioral validation of syscall graphs.

Structural checks enforce the single-entry/single-exit shape and
reachability. Behavioral checks walk a finite enumeration of (state,
params) cases through the graph and flag two things: nondeterminism (more
than one viable successor at a reached node) and catalog disagreement (a
node whose guard admits a case its bound catalog event rejects).

The bundled enumeration crosses a small filesystem-shaped state family
(one user, one or two subjects, a root, a directory, an optional file, two
integrity levels, two confidentiality levels with one category, curated
right sets and held accesses, an optional negative role) with boundary
parameter variants per syscall. Callers may supply their own cases.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..policy.events import CATALOG
from ..policy.invariants import check_invariants
from ..policy.labels import SecurityLabel
from ..policy.state import AccessKind, PolicyState, RoleKind
from .model import Params, SyscallGraph, validate_params

ROOT, DIR, FILE = 1, 2, 3

LOW = SecurityLabel(0)
HIGH = SecurityLabel(1, frozenset({0}))


@dataclass(frozen=True)
class GraphDefect:
    kind: str
    node: str
    witness: tuple = ()

    def __str__(self):
        return f"{self.kind} at {self.node} {self.witness}"


def _build_state(
    subj_int,
    subj_sec,
    file_present,
    file_int,
    file_sec,
    file_rights,
    root_write,
    negative_forbids,
    held,
    other_writer,
) -> PolicyState:
    entities = {ROOT, DIR} | ({FILE} if file_present else set())
    subjects = {1} | ({2} if other_writer else set())
    rights = {(FILE, k) for _, k in file_rights} if file_present else set()
    if root_write:
        rights |= {(ROOT, AccessKind.WRITE), (DIR, AccessKind.WRITE)}
    roles = {1}
    role_kind = {1: RoleKind.ORDINARY}
    role_rights = {1: frozenset(rights)}
    user_roles = {1: frozenset({1})}
    if negative_forbids is not None and file_present:
        roles.add(2)
        role_kind[2] = RoleKind.NEGATIVE
        role_rights[2] = frozenset({(FILE, negative_forbids)})
        user_roles[1] = frozenset({1, 2})
    accesses = {1: frozenset((FILE, k) for k in held if file_present)}
    if other_writer:
        accesses[2] = frozenset({(FILE, AccessKind.WRITE)} if file_present else set())
    return PolicyState(
        users=frozenset({1}),
        subjects=frozenset(subjects),
        subject_owner={s: 1 for s in subjects},
        entities=frozenset(entities),
        entity_is_container={ROOT: True, DIR: True, **({FILE: False} if file_present else {})},
        entity_parent={DIR: ROOT, **({FILE: ROOT} if file_present else {})},
        entity_name={ROOT: "", DIR: "d", **({FILE: "f"} if file_present else {})},
        roles=frozenset(roles),
        role_kind=role_kind,
        subject_int={s: subj_int if s == 1 else 0 for s in subjects},
        entity_int={ROOT: 0, DIR: 0, **({FILE: file_int} if file_present else {})},
        subject_sec={s: subj_sec if s == 1 else LOW for s in subjects},
        entity_sec={ROOT: LOW, DIR: LOW, **({FILE: file_sec} if file_present else {})},
        subject_accesses=accesses,
        role_rights=role_rights,
        user_roles=user_roles,
    )


_RIGHT_SETS = [
    frozenset(),
    frozenset({(0, AccessKind.READ)}),
    frozenset({(0, AccessKind.WRITE)}),
    frozenset({(0, AccessKind.READ), (0, AccessKind.WRITE)}),
    frozenset({(0, AccessKind.READ), (0, AccessKind.WRITE), (0, AccessKind.OWN)}),
]

_HELD_SETS = [
    frozenset(),
    frozenset({AccessKind.READ}),
    frozenset({AccessKind.WRITE}),
    frozenset({AccessKind.READ, AccessKind.WRITE}),
]

_states_cache: list[PolicyState] | None = None


def bounded_states() -> list[PolicyState]:
    """The invariant-satisfying members of the bounded state family."""
    global _states_cache
    if _states_cache is not None:
        return _states_cache
    states = []
    combos = itertools.product(
        (0, 1),  # subject integrity
        (LOW, HIGH),  # subject confidentiality
        (False, True),  # file present
        (0, 1),  # file integrity
        (LOW, HIGH),  # file confidentiality
        _RIGHT_SETS,
        (False, True),  # write rights on root and dir
        (None, AccessKind.READ, AccessKind.WRITE),  # negative role forbids
        _HELD_SETS,
        (False, True),  # second subject holding write on the file
    )
    for combo in combos:
        (si, ss, fp, fi, fs, rights, rootw, neg, held, ow) = combo
        if not fp and (fi or fs != LOW or rights or neg or held or ow):
            continue  # file-dependent features are meaningless without the file
        state = _build_state(si, ss, fp, fi, fs, rights, rootw, neg, held, ow)
        if check_invariants(state):
            continue
        states.append(state)
    _states_cache = states
    return states


def _open_params() -> list[Params]:
    cases = [
        ("/f", {"O_RDONLY"}),
        ("/f", {"O_WRONLY"}),
        ("/f", {"O_RDWR"}),
        ("/f", {"O_WRONLY", "O_CREAT"}),
        ("/f", {"O_WRONLY", "O_TRUNC"}),
        ("/new", {"O_WRONLY", "O_CREAT"}),
        ("/new", {"O_RDONLY"}),
        ("/d/x", {"O_WRONLY", "O_CREAT"}),
        ("/missing/x", {"O_WRONLY", "O_CREAT"}),
        ("bad", {"O_RDONLY"}),
        ("/", {"O_RDONLY"}),
    ]
    return [{"caller": 1, "pathname": path, "flags": flags} for path, flags in cases]


def _close_params() -> list[Params]:
    kinds = [
        (AccessKind.READ,),
        (AccessKind.WRITE,),
        (AccessKind.READ, AccessKind.WRITE),
        (),
    ]
    out = []
    for entity in (FILE, ROOT, None, 99):
        for ks in kinds:
            out.append({"caller": 1, "entity": entity, "kinds": ks})
    return out


def _rw_params() -> list[Params]:
    return [{"caller": 1, "entity": e} for e in (FILE, ROOT, None, 99)]


def _path_params(paths) -> list[Params]:
    return [{"caller": 1, "pathname": p} for p in paths]


def _setlabel_params() -> list[Params]:
    return [
        {"caller": 1, "pathname": "/f", "level": 0},
        {"caller": 1, "pathname": "/f", "level": 1},
        {"caller": 1, "pathname": "/missing", "level": 1},
    ]


_PARAM_CASES = {
    "open": _open_params,
    "close": _close_params,
    "read": _rw_params,
    "write": _rw_params,
    "unlink": lambda: _path_params(["/f", "/d", "/missing", "/missing/x", "bad", "/"]),
    "mkdir": lambda: _path_params(["/nd", "/f", "/d/nd", "/missing/nd", "bad"]),
    "setlabel": _setlabel_params,
}


def bounded_cases(syscall: str) -> list[tuple[PolicyState, Params]]:
    """The default (state, params) enumeration for behavioral validation."""
    if syscall not in _PARAM_CASES:
        return []
    params = [validate_params(syscall, p) for p in _PARAM_CASES[syscall]()]
    return [(state, p) for state in bounded_states() for p in params]


# -------------------------------------------------------------- checking --


def _structural_defects(graph: SyscallGraph) -> list[GraphDefect]:
    defects = []
    nodes = graph.nodes
    if graph.initial not in nodes:
        return [GraphDefect("missing-node", graph.initial)]
    if graph.final not in nodes:
        return [GraphDefect("missing-node", graph.final)]

    incoming: dict[str, int] = {name: 0 for name in nodes}
    for name, node in nodes.items():
        for arc in node.arcs:
            if arc.target not in nodes:
                defects.append(GraphDefect("dangling-arc", name, (arc.target,)))
            else:
                incoming[arc.target] += 1

    for name, count in incoming.items():
        if count == 0 and name != graph.initial:
            defects.append(GraphDefect("multiple-initial", name))
    for name, node in nodes.items():
        if not node.arcs and name != graph.final:
            defects.append(GraphDefect("multiple-final", name))
    if nodes[graph.final].arcs:
        defects.append(GraphDefect("final-has-arcs", graph.final))

    reachable = {graph.initial}
    frontier = [graph.initial]
    while frontier:
        name = frontier.pop()
        for arc in nodes[name].arcs:
            if arc.target in nodes and arc.target not in reachable:
                reachable.add(arc.target)
                frontier.append(arc.target)
    for name in nodes:
        if name not in reachable:
            defects.append(GraphDefect("unreachable", name))

    reaches_final = {graph.final}
    changed = True
    while changed:
        changed = False
        for name, node in nodes.items():
            if name in reaches_final:
                continue
            if any(arc.target in reaches_final for arc in node.arcs):
                reaches_final.add(name)
                changed = True
    for name in nodes:
        if name in reachable and name not in reaches_final:
            defects.append(GraphDefect("dead-end", name))
    return defects


def _walk_defects(graph: SyscallGraph, cases, check_catalog: bool) -> list[GraphDefect]:
    defects: dict[tuple, GraphDefect] = {}
    for idx, (state, params) in enumerate(cases):
        node = graph.nodes[graph.initial]
        for _ in range(len(graph.nodes) + 1):
            if any(not pred(state, params) for _, pred in node.guard):
                break
            if node.effect is not None:
                desc = CATALOG[node.effect.event]
                try:
                    bound = node.effect.bind(state, params)
                    desc.validate_params(bound)
                    failed = desc.failing_conjunct(state, bound)
                except Exception as exc:  # binding blew up: also a disagreement
                    failed = repr(exc)
                if failed is not None:
                    if check_catalog:
                        key = ("catalog-disagreement", node.name)
                        defects.setdefault(
                            key,
                            GraphDefect(
                                "catalog-disagreement",
                                node.name,
                                (node.effect.event, failed, idx),
                            ),
                        )
                    break
                state = desc.action(state, bound)
            if not node.arcs:
                break
            viable = [arc for arc in node.arcs if arc.condition(state, params)]
            if len(viable) > 1:
                key = ("nondeterministic", node.name)
                defects.setdefault(
                    key,
                    GraphDefect(
                        "nondeterministic",
                        node.name,
                        (tuple(arc.label for arc in viable), idx),
                    ),
                )
            if not viable:
                break
            node = graph.nodes[viable[0].target]
    return list(defects.values())


def validate_graph(
    graph: SyscallGraph,
    cases=None,
    check_catalog: bool = True,
) -> list[GraphDefect]:
    """All defects found in the graph: structure, determinism, catalog
    agreement. An empty list means the graph upholds the single-entry,
    single-exit, deterministic-successor construction over the enumerated
    cases. Defects are data, never exceptions."""
    defects = _structural_defects(graph)
    if any(d.kind in ("missing-node", "dangling-arc") for d in defects):
        return defects
    if cases is None:
        cases = bounded_cases(graph.name)
    defects.extend(_walk_defects(graph, cases, check_catalog))
    return defects
