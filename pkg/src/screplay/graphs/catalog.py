"""The bundled syscall graph catalog.

Seven syscalls are modeled: open (all branches: create, truncate, read,
write, existing/absent target, permission denials), close, read, write,
unlink, mkdir, setlabel. Every graph follows the same construction and
passes validate_graph.

Conventions, fixed here and mirrored by the mock kernel:
  - entities created by a subject take the subject's integrity and
    confidentiality labels;
  - the write right over a created entity goes to the creating user's
    primary role (the lowest-numbered non-negative role assigned to it);
  - denial return values: ENOENT from existence checks, EACCES from
    permission checks, EPERM from integrity/ownership refusals, EINVAL
    from argument validation;
  - a Granted open returns a model fd (3 + the caller's held access
    count), never meant to match kernel fd numbering.
"""

from __future__ import annotations

from ..errnos import EACCES, EINVAL, ENOENT, EPERM
from ..policy.labels import BOTTOM_LABEL
from ..policy.state import AccessKind, PolicyState
from .model import (
    Arc,
    CatalogEffect,
    EventNode,
    Params,
    SyscallGraph,
    fresh_entity_id,
    primary_role,
    resolve_path,
)


def _owner(s: PolicyState, p: Params):
    return s.subject_owner.get(p["caller"])


def _res(s: PolicyState, p: Params):
    return resolve_path(s, p["pathname"])


def _mode(p: Params) -> str:
    flags = p["flags"]
    return "O_RDONLY" if "O_RDONLY" in flags else ("O_RDWR" if "O_RDWR" in flags else "O_WRONLY")


def _reads(p: Params) -> bool:
    return _mode(p) in ("O_RDONLY", "O_RDWR")


def _sec_of_subject(s: PolicyState, subj):
    return s.subject_sec.get(subj, BOTTOM_LABEL)


def _sec_of_entity(s: PolicyState, e):
    return s.entity_sec.get(e, BOTTOM_LABEL)


def _parent_write_conjuncts():
    """Permission to write into the target's directory: RBAC grant plus the
    integrity and confidentiality write rules."""

    def rbac(s, p):
        return s.grants(_owner(s, p), _res(s, p).parent, AccessKind.WRITE)

    def mic(s, p):
        parent = _res(s, p).parent
        return s.entity_int.get(parent, 0) <= s.subject_int.get(p["caller"], 0)

    def mls(s, p):
        parent = _res(s, p).parent
        return _sec_of_subject(s, p["caller"]) <= _sec_of_entity(s, parent)

    return [
        ("parent-write-rbac", rbac),
        ("parent-write-mic", mic),
        ("parent-write-mls", mls),
    ]


def _read_allowed(s: PolicyState, p: Params) -> bool:
    if not _reads(p):
        return True
    target = _res(s, p).target
    return s.grants(_owner(s, p), target, AccessKind.READ) and _sec_of_entity(
        s, target
    ) <= _sec_of_subject(s, p["caller"])


def _write_allowed(s: PolicyState, p: Params) -> bool:
    if _reads(p) and _mode(p) != "O_RDWR":
        return True
    if _mode(p) == "O_RDONLY":
        return True
    target = _res(s, p).target
    return (
        s.grants(_owner(s, p), target, AccessKind.WRITE)
        and s.entity_int.get(target, 0) <= s.subject_int.get(p["caller"], 0)
        and _sec_of_subject(s, p["caller"]) <= _sec_of_entity(s, target)
    )


def _build_open() -> SyscallGraph:
    def path_resolves(s, p):
        return _res(s, p).ok

    def openable(s, p):
        return _res(s, p).target is not None or "O_CREAT" in p["flags"]

    def grantor_known(s, p):
        return primary_role(s, _owner(s, p)) is not None

    parent_write = _parent_write_conjuncts()

    def bind_write_parent(s, p):
        return {"subject": p["caller"], "entity": _res(s, p).parent}

    def bind_create(s, p):
        res = _res(s, p)
        new = p["new_entity"] if p["new_entity"] is not None else fresh_entity_id(s)
        return {
            "entity": new,
            "parent": res.parent,
            "name": res.leaf,
            "int_level": s.subject_int.get(p["caller"], 0),
            "sec": _sec_of_subject(s, p["caller"]),
        }

    def bind_grant(s, p):
        return {
            "role": primary_role(s, _owner(s, p)),
            "entity": _res(s, p).target,
            "kind": AccessKind.WRITE,
        }

    def bind_access(s, p):
        return {"subject": p["caller"], "entity": _res(s, p).target}

    def target_exists(s, p):
        return _res(s, p).target is not None

    def wants_create(s, p):
        return _res(s, p).target is None and "O_CREAT" in p["flags"]

    always = lambda s, p: True
    nodes = {
        "open_start": EventNode(
            "open_start",
            guard=(("path-resolves", path_resolves), ("openable", openable)),
            arcs=(
                Arc("exists", target_exists, "open_check"),
                Arc("create", wants_create, "open_check_p"),
            ),
            deny_errno=ENOENT,
        ),
        "open_check_p": EventNode(
            "open_check_p",
            guard=tuple(parent_write),
            arcs=(Arc("ok", always, "open_write_p"),),
            deny_errno=EACCES,
        ),
        "open_write_p": EventNode(
            "open_write_p",
            guard=tuple(parent_write),
            effect=CatalogEffect("access_write_entity", bind_write_parent),
            arcs=(Arc("ok", always, "open_create"),),
            deny_errno=EACCES,
        ),
        "open_create": EventNode(
            "open_create",
            guard=(("path-resolves", path_resolves),),
            effect=CatalogEffect("create_object", bind_create),
            arcs=(Arc("ok", always, "open_grant"),),
            deny_errno=EACCES,
        ),
        "open_grant": EventNode(
            "open_grant",
            guard=(("grantor-role-known", grantor_known),),
            effect=CatalogEffect("grant_rights", bind_grant),
            arcs=(Arc("ok", always, "open_check"),),
            deny_errno=EACCES,
        ),
        "open_check": EventNode(
            "open_check",
            guard=(("read-allowed", _read_allowed), ("write-allowed", _write_allowed)),
            arcs=(
                Arc("read", lambda s, p: _reads(p), "open_read"),
                Arc("write", lambda s, p: not _reads(p), "open_write"),
            ),
            deny_errno=EACCES,
        ),
        "open_read": EventNode(
            "open_read",
            guard=(("read-allowed", _read_allowed),),
            effect=CatalogEffect("access_read_entity", bind_access),
            arcs=(
                Arc("rw", lambda s, p: _mode(p) == "O_RDWR", "open_write"),
                Arc("done", lambda s, p: _mode(p) != "O_RDWR", "open_finish"),
            ),
            deny_errno=EACCES,
        ),
        "open_write": EventNode(
            "open_write",
            guard=(("write-allowed", _write_allowed),),
            effect=CatalogEffect("access_write_entity", bind_access),
            arcs=(
                Arc("trunc", lambda s, p: "O_TRUNC" in p["flags"], "open_truncate"),
                Arc("done", lambda s, p: "O_TRUNC" not in p["flags"], "open_finish"),
            ),
            deny_errno=EACCES,
        ),
        # File contents are not modeled; truncation is a local no-op step.
        "open_truncate": EventNode(
            "open_truncate",
            arcs=(Arc("ok", always, "open_finish"),),
        ),
        "open_finish": EventNode("open_finish"),
    }
    return SyscallGraph(
        "open",
        nodes,
        initial="open_start",
        final="open_finish",
        result_fn=lambda s, p: 3 + len(s.accesses_of(p["caller"])),
    )


def _entity_known(s: PolicyState, p: Params) -> bool:
    return p["entity"] is not None and p["entity"] in s.entities


def _build_close() -> SyscallGraph:
    def read_held(s, p):
        return s.holds(p["caller"], p["entity"], AccessKind.READ)

    def write_held(s, p):
        return s.holds(p["caller"], p["entity"], AccessKind.WRITE)

    def bind_release(kind):
        def bind(s, p):
            return {"subject": p["caller"], "entity": p["entity"], "kind": kind}

        return bind

    nodes = {
        "close_start": EventNode(
            "close_start",
            guard=(("entity-known", _entity_known),),
            arcs=(
                Arc("read", lambda s, p: AccessKind.READ in p["kinds"], "close_release_r"),
                Arc(
                    "write",
                    lambda s, p: AccessKind.READ not in p["kinds"]
                    and AccessKind.WRITE in p["kinds"],
                    "close_release_w",
                ),
            ),
            deny_errno=EINVAL,
        ),
        "close_release_r": EventNode(
            "close_release_r",
            guard=(("read-held", read_held),),
            effect=CatalogEffect("release_access", bind_release(AccessKind.READ)),
            arcs=(
                Arc("write", lambda s, p: AccessKind.WRITE in p["kinds"], "close_release_w"),
                Arc("done", lambda s, p: AccessKind.WRITE not in p["kinds"], "close_finish"),
            ),
            deny_errno=EINVAL,
        ),
        "close_release_w": EventNode(
            "close_release_w",
            guard=(("write-held", write_held),),
            effect=CatalogEffect("release_access", bind_release(AccessKind.WRITE)),
            arcs=(Arc("done", lambda s, p: True, "close_finish"),),
            deny_errno=EINVAL,
        ),
        "close_finish": EventNode("close_finish"),
    }
    return SyscallGraph("close", nodes, initial="close_start", final="close_finish")


def _build_rw(name: str, kind: AccessKind) -> SyscallGraph:
    def access_held(s, p):
        return s.holds(p["caller"], p["entity"], kind)

    start, check, finish = f"{name}_start", f"{name}_check", f"{name}_finish"
    nodes = {
        start: EventNode(
            start,
            guard=(("entity-known", _entity_known),),
            arcs=(Arc("ok", lambda s, p: True, check),),
            deny_errno=EINVAL,
        ),
        check: EventNode(
            check,
            guard=((f"{kind.value}-access-held", access_held),),
            arcs=(Arc("ok", lambda s, p: True, finish),),
            deny_errno=EACCES,
        ),
        finish: EventNode(finish),
    }
    return SyscallGraph(name, nodes, initial=start, final=finish)


def _build_unlink() -> SyscallGraph:
    def path_resolves(s, p):
        return _res(s, p).ok

    def target_exists(s, p):
        return _res(s, p).target is not None

    def not_container(s, p):
        return not s.entity_is_container.get(_res(s, p).target, False)

    def own_right(s, p):
        return s.grants(_owner(s, p), _res(s, p).target, AccessKind.OWN)

    def bind_delete(s, p):
        return {"entity": _res(s, p).target}

    always = lambda s, p: True
    nodes = {
        "unlink_start": EventNode(
            "unlink_start",
            guard=(("path-resolves", path_resolves), ("target-exists", target_exists)),
            arcs=(Arc("ok", always, "unlink_check_kind"),),
            deny_errno=ENOENT,
        ),
        "unlink_check_kind": EventNode(
            "unlink_check_kind",
            guard=(("target-not-container", not_container),),
            arcs=(Arc("ok", always, "unlink_check_p"),),
            deny_errno=EPERM,
        ),
        "unlink_check_p": EventNode(
            "unlink_check_p",
            guard=tuple(_parent_write_conjuncts()) + (("target-own-right", own_right),),
            arcs=(Arc("ok", always, "unlink_delete"),),
            deny_errno=EACCES,
        ),
        "unlink_delete": EventNode(
            "unlink_delete",
            guard=(("target-exists", target_exists), ("target-not-container", not_container)),
            effect=CatalogEffect("delete_entity", bind_delete),
            arcs=(Arc("ok", always, "unlink_finish"),),
            deny_errno=EPERM,
        ),
        "unlink_finish": EventNode("unlink_finish"),
    }
    return SyscallGraph("unlink", nodes, initial="unlink_start", final="unlink_finish")


def _build_mkdir() -> SyscallGraph:
    def path_resolves(s, p):
        return _res(s, p).ok

    def target_absent(s, p):
        return _res(s, p).target is None

    def grantor_known(s, p):
        return primary_role(s, _owner(s, p)) is not None

    parent_write = _parent_write_conjuncts()

    def bind_write_parent(s, p):
        return {"subject": p["caller"], "entity": _res(s, p).parent}

    def bind_create(s, p):
        res = _res(s, p)
        new = p["new_entity"] if p["new_entity"] is not None else fresh_entity_id(s)
        return {
            "entity": new,
            "parent": res.parent,
            "name": res.leaf,
            "int_level": s.subject_int.get(p["caller"], 0),
            "sec": _sec_of_subject(s, p["caller"]),
        }

    def bind_grant(s, p):
        return {
            "role": primary_role(s, _owner(s, p)),
            "entity": _res(s, p).target,
            "kind": AccessKind.WRITE,
        }

    always = lambda s, p: True
    nodes = {
        "mkdir_start": EventNode(
            "mkdir_start",
            guard=(("path-resolves", path_resolves),),
            arcs=(Arc("ok", always, "mkdir_check_fresh"),),
            deny_errno=ENOENT,
        ),
        "mkdir_check_fresh": EventNode(
            "mkdir_check_fresh",
            guard=(("target-absent", target_absent),),
            arcs=(Arc("ok", always, "mkdir_check_p"),),
            deny_errno=EINVAL,
        ),
        "mkdir_check_p": EventNode(
            "mkdir_check_p",
            guard=tuple(parent_write),
            arcs=(Arc("ok", always, "mkdir_write_p"),),
            deny_errno=EACCES,
        ),
        "mkdir_write_p": EventNode(
            "mkdir_write_p",
            guard=(("path-resolves", path_resolves),) + tuple(parent_write),
            effect=CatalogEffect("access_write_entity", bind_write_parent),
            arcs=(Arc("ok", always, "mkdir_create"),),
            deny_errno=EACCES,
        ),
        "mkdir_create": EventNode(
            "mkdir_create",
            guard=(("path-resolves", path_resolves), ("target-absent", target_absent)),
            effect=CatalogEffect("create_container", bind_create),
            arcs=(Arc("ok", always, "mkdir_grant"),),
            deny_errno=EACCES,
        ),
        "mkdir_grant": EventNode(
            "mkdir_grant",
            guard=(("grantor-role-known", grantor_known),),
            effect=CatalogEffect("grant_rights", bind_grant),
            arcs=(Arc("ok", always, "mkdir_finish"),),
            deny_errno=EACCES,
        ),
        "mkdir_finish": EventNode("mkdir_finish"),
    }
    return SyscallGraph("mkdir", nodes, initial="mkdir_start", final="mkdir_finish")


def _build_setlabel() -> SyscallGraph:
    def path_resolves(s, p):
        return _res(s, p).ok

    def target_exists(s, p):
        return _res(s, p).target is not None

    def own_right(s, p):
        return s.grants(_owner(s, p), _res(s, p).target, AccessKind.OWN)

    def writers_dominate(s, p):
        target = _res(s, p).target
        return all(
            p["level"] <= s.subject_int.get(subj, 0)
            for subj in s.subjects
            if s.holds(subj, target, AccessKind.WRITE)
        )

    def bind_setint(s, p):
        return {"entity": _res(s, p).target, "level": p["level"]}

    always = lambda s, p: True
    nodes = {
        "setlabel_start": EventNode(
            "setlabel_start",
            guard=(("path-resolves", path_resolves), ("target-exists", target_exists)),
            arcs=(Arc("ok", always, "setlabel_check_own"),),
            deny_errno=ENOENT,
        ),
        "setlabel_check_own": EventNode(
            "setlabel_check_own",
            guard=(("target-own-right", own_right),),
            arcs=(Arc("ok", always, "setlabel_check_safe"),),
            deny_errno=EACCES,
        ),
        "setlabel_check_safe": EventNode(
            "setlabel_check_safe",
            guard=(("writers-dominate", writers_dominate),),
            arcs=(Arc("ok", always, "setlabel_apply"),),
            deny_errno=EPERM,
        ),
        "setlabel_apply": EventNode(
            "setlabel_apply",
            guard=(("target-exists", target_exists), ("writers-dominate", writers_dominate)),
            effect=CatalogEffect("set_entity_int", bind_setint),
            arcs=(Arc("ok", always, "setlabel_finish"),),
            deny_errno=EPERM,
        ),
        "setlabel_finish": EventNode("setlabel_finish"),
    }
    return SyscallGraph(
        "setlabel", nodes, initial="setlabel_start", final="setlabel_finish"
    )


def build_catalog() -> dict[str, SyscallGraph]:
    graphs = [
        _build_open(),
        _build_close(),
        _build_rw("read", AccessKind.READ),
        _build_rw("write", AccessKind.WRITE),
        _build_unlink(),
        _build_mkdir(),
        _build_setlabel(),
    ]
    return {g.name: g for g in graphs}


GRAPH_CATALOG = build_catalog()
