"""Syscall event graphs: nodes with guards, effects, and successor arcs.

A syscall is a graph of events. Each node carries named guard conjuncts
(the first failing conjunct denies the call at that node), an optional
effect (a reference to a policy catalog event plus a parameter binding, or
nothing for purely local steps), and an ordered list of condition-guarded
arcs to successor nodes. A node with no arcs is the final node. If no arc
condition holds the call is denied at that node.

Conjunct identity is (graph, conjunct name): nodes of one graph that check
the same thing share the same named predicate, and coverage accounting
counts each named check once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..errnos import EACCES
from ..policy.state import AccessKind, PolicyState

Params = dict
Pred = Callable[[PolicyState, Params], bool]


class GraphError(Exception):
    pass


class UnknownSyscall(GraphError):
    def __init__(self, name: str):
        super().__init__(f"no graph for syscall {name!r}")
        self.syscall = name


class MalformedParams(GraphError):
    def __init__(self, syscall: str, reason: str):
        super().__init__(f"{syscall}: {reason}")
        self.syscall = syscall


class Verdict:
    GRANTED = "Granted"
    DENIED = "Denied"


@dataclass(frozen=True)
class CatalogEffect:
    """Reference to a policy catalog event with a parameter binding."""

    event: str
    bind: Callable[[PolicyState, Params], dict]


@dataclass(frozen=True)
class Arc:
    label: str
    condition: Pred
    target: str


@dataclass(frozen=True)
class EventNode:
    name: str
    guard: tuple[tuple[str, Pred], ...] = ()
    effect: CatalogEffect | None = None
    arcs: tuple[Arc, ...] = ()
    deny_errno: int = EACCES


@dataclass(frozen=True)
class SyscallGraph:
    name: str
    nodes: dict[str, EventNode]
    initial: str
    final: str
    # Return value on Granted; denial return values come from node errnos.
    result_fn: Callable[[PolicyState, Params], int] = field(default=lambda s, p: 0)

    def conjunct_names(self) -> list[str]:
        seen: list[str] = []
        for node in self.nodes.values():
            for cname, _ in node.guard:
                if cname not in seen:
                    seen.append(cname)
        return seen


@dataclass(frozen=True)
class ReplayOutcome:
    verdict: str
    path: tuple[str, ...]
    final_state: PolicyState
    denial_site: str | None
    return_value: int

    @property
    def granted(self) -> bool:
        return self.verdict == Verdict.GRANTED


# ------------------------------------------------------- path resolution --


@dataclass(frozen=True)
class Resolution:
    """Result of walking a pathname through the entity hierarchy.

    ``ok`` means the path is syntactically valid and every intermediate
    component resolved to a container; ``target`` is the entity at the full
    path (None if the leaf does not exist); ``parent`` is the entity the
    leaf lives (or would live) in.
    """

    ok: bool
    target: int | None = None
    parent: int | None = None
    leaf: str | None = None


_FAILED = Resolution(ok=False)


def find_root(state: PolicyState) -> int | None:
    """The unique parentless container, or None if there is no such thing."""
    roots = [e for e in state.roots() if state.entity_is_container.get(e, False)]
    if len(roots) != 1:
        return None
    return roots[0]


def resolve_path(state: PolicyState, pathname) -> Resolution:
    if not isinstance(pathname, str) or not pathname.startswith("/"):
        return _FAILED
    root = find_root(state)
    if root is None:
        return _FAILED
    if pathname == "/":
        return Resolution(ok=True, target=root, parent=None, leaf=None)
    components = pathname[1:].split("/")
    if any(c == "" for c in components):
        return _FAILED

    children: dict[tuple[int, str], int] = {}
    for child, parent in state.entity_parent.items():
        children[(parent, state.entity_name.get(child, ""))] = child

    current = root
    for comp in components[:-1]:
        nxt = children.get((current, comp))
        if nxt is None or not state.entity_is_container.get(nxt, False):
            return _FAILED
        current = nxt
    leaf = components[-1]
    return Resolution(ok=True, target=children.get((current, leaf)), parent=current, leaf=leaf)


def primary_role(state: PolicyState, user) -> int | None:
    """The lowest-numbered non-negative role assigned to the user; this is
    the role that receives rights over entities the user's subjects create."""
    from ..policy.state import RoleKind

    candidates = [
        r
        for r in state.roles_of_user(user)
        if state.role_kind.get(r) is not RoleKind.NEGATIVE
    ]
    return min(candidates) if candidates else None


def fresh_entity_id(state: PolicyState) -> int:
    e = 0
    while e in state.entities:
        e += 1
    return e


# ---------------------------------------------------- parameter checking --

OPEN_MODES = ("O_RDONLY", "O_WRONLY", "O_RDWR")
OPEN_FLAGS = frozenset(OPEN_MODES) | {"O_CREAT", "O_TRUNC"}


def _is_id(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v >= 0


def _is_opt_id(v) -> bool:
    return v is None or _is_id(v)


def _require(syscall: str, params: Params, allowed: set[str], required: set[str]) -> None:
    keys = set(params)
    if not required <= keys:
        raise MalformedParams(syscall, f"missing params: {sorted(required - keys)}")
    if not keys <= allowed:
        raise MalformedParams(syscall, f"unknown params: {sorted(keys - allowed)}")


def _check(syscall: str, cond: bool, reason: str) -> None:
    if not cond:
        raise MalformedParams(syscall, reason)


def _validate_open(params: Params) -> Params:
    _require("open", params, {"caller", "pathname", "flags", "new_entity"}, {"caller", "pathname", "flags"})
    _check("open", _is_id(params["caller"]), "caller must be a subject id")
    _check("open", isinstance(params["pathname"], str), "pathname must be a string")
    try:
        flags = frozenset(params["flags"])
    except TypeError:
        raise MalformedParams("open", "flags must be a set of flag names") from None
    _check("open", flags <= OPEN_FLAGS, f"unknown flags: {sorted(flags - OPEN_FLAGS)}")
    modes = [m for m in OPEN_MODES if m in flags]
    _check("open", len(modes) == 1, "exactly one of O_RDONLY/O_WRONLY/O_RDWR required")
    _check(
        "open",
        "O_TRUNC" not in flags or modes[0] in ("O_WRONLY", "O_RDWR"),
        "O_TRUNC requires a writable mode",
    )
    _check("open", _is_opt_id(params.get("new_entity")), "new_entity must be an id")
    out = dict(params)
    out["flags"] = flags
    out.setdefault("new_entity", None)
    return out


def _validate_path_call(name: str, extra: dict | None = None):
    extra = extra or {}

    def validate(params: Params) -> Params:
        allowed = {"caller", "pathname"} | set(extra)
        required = {"caller", "pathname"} | {k for k, (req, _) in extra.items() if req}
        _require(name, params, allowed, required)
        _check(name, _is_id(params["caller"]), "caller must be a subject id")
        _check(name, isinstance(params["pathname"], str), "pathname must be a string")
        for key, (req, check) in extra.items():
            if key in params:
                _check(name, check(params[key]), f"invalid {key}")
        out = dict(params)
        for key, (req, _) in extra.items():
            out.setdefault(key, None)
        return out

    return validate


def _validate_entity_call(name: str, with_kinds: bool):
    def validate(params: Params) -> Params:
        allowed = {"caller", "entity"} | ({"kinds"} if with_kinds else set())
        _require(name, params, allowed, {"caller"})
        _check(name, _is_id(params["caller"]), "caller must be a subject id")
        _check(name, _is_opt_id(params.get("entity")), "entity must be an id or None")
        out = dict(params)
        out.setdefault("entity", None)
        if with_kinds:
            kinds = params.get("kinds", ())
            try:
                kinds = tuple(kinds)
            except TypeError:
                raise MalformedParams(name, "kinds must be a sequence") from None
            _check(name, all(isinstance(k, AccessKind) for k in kinds), "kinds must be AccessKind values")
            out["kinds"] = kinds
        return out

    return validate


def _validate_setlabel(params: Params) -> Params:
    base = _validate_path_call("setlabel")(dict((k, v) for k, v in params.items() if k != "level"))
    _check("setlabel", "level" in params, "missing params: ['level']")
    _check("setlabel", _is_id(params["level"]), "level must be a non-negative integer")
    base["level"] = params["level"]
    return base


PARAM_VALIDATORS: dict[str, Callable[[Params], Params]] = {
    "open": _validate_open,
    "close": _validate_entity_call("close", with_kinds=True),
    "read": _validate_entity_call("read", with_kinds=False),
    "write": _validate_entity_call("write", with_kinds=False),
    "unlink": _validate_path_call("unlink"),
    "mkdir": _validate_path_call("mkdir", {"new_entity": (False, _is_opt_id)}),
    "setlabel": _validate_setlabel,
}


def validate_params(syscall: str, params: Params) -> Params:
    """Check a parameter map against the syscall's declared signature and
    return the normalized copy. Raises MalformedParams."""
    if syscall not in PARAM_VALIDATORS:
        raise UnknownSyscall(syscall)
    return PARAM_VALIDATORS[syscall](params)


# --------------------------------------------------------------- exports --


def to_dot(graph: SyscallGraph) -> str:
    """Render a graph as DOT text for inspection."""
    lines = [f'digraph "{graph.name}" {{', "  rankdir=LR;"]
    for name, node in graph.nodes.items():
        shape = "doublecircle" if name == graph.final else "box"
        style = ', style=bold' if name == graph.initial else ""
        guard = "\\n".join(cname for cname, _ in node.guard)
        label = name if not guard else f"{name}\\n[{guard}]"
        effect = f"\\n<{node.effect.event}>" if node.effect else ""
        lines.append(f'  "{name}" [shape={shape}{style}, label="{label}{effect}"];')
    for name, node in graph.nodes.items():
        for arc in node.arcs:
            lines.append(f'  "{name}" -> "{arc.target}" [label="{arc.label}"];')
    lines.append("}")
    return "\n".join(lines)
