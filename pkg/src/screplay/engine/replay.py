"""Whole-trace replay and divergence triage.

Every call is replayed on the model and the two verdicts are crossed:

  (model Granted, kernel granted)  advance the model state, continue;
  (model Denied,  kernel denied)   continue, never journaled;
  (model Denied,  kernel granted)  CRIT, unrecoverable, replay stops;
  (model Granted, kernel denied)   triage the errno, roll the model state
                                   back to the pre-call value, continue.

The errno triage: ENOMEM is a resource denial the model does not track (no
entry); EINVAL points at an incomplete model (WARN); EACCES and EPERM mean
the kernel's security decision contradicts the model (CRIT); anything else
gets a WARN carrying the raw code. Rollback is just keeping the pre-call
state value, which immutability makes exact and free.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import errnos
from ..errnos import errno_name
from ..graphs.catalog import GRAPH_CATALOG
from ..graphs.interpreter import replay_syscall
from ..graphs.model import MalformedParams
from ..policy.invariants import run_invariant_checks
from ..policy.state import AccessKind
from ..tracefile.mapping import compare_states, map_snapshot
from ..tracefile.model import SyscallRecord, Trace
from .coverage import CoverageReport
from .journal import JournalEntry, JournalKind, Severity


class ReplayStatus:
    SUCCESS = "Success"
    FAILURE = "Failure"


@dataclass(frozen=True)
class ReplayResult:
    status: str
    journal: tuple[JournalEntry, ...]
    calls_processed: int
    coverage: CoverageReport

    @property
    def failed(self) -> bool:
        return self.status == ReplayStatus.FAILURE

    def max_severity(self) -> Severity | None:
        return max((e.severity for e in self.journal), default=None)


def check_err_code(record: SyscallRecord) -> JournalEntry | None:
    """Triage of a kernel denial the model would have granted."""
    code = record.result.code
    if code >= 0:
        raise ValueError(f"check_err_code needs a denied record, got code {code}")
    err = -code
    detail = {"name": record.name, "errno": errno_name(err), "code": code}
    if err == errnos.ENOMEM:
        return None
    if err == errnos.EINVAL:
        return JournalEntry(Severity.WARN, record.seq, JournalKind.GRANTED_BUT_DENIED, detail)
    if err in (errnos.EACCES, errnos.EPERM):
        return JournalEntry(Severity.CRIT, record.seq, JournalKind.GRANTED_BUT_DENIED, detail)
    return JournalEntry(Severity.WARN, record.seq, JournalKind.GRANTED_BUT_DENIED, detail)


_ACCESS_FROM_WIRE = {"read": AccessKind.READ, "write": AccessKind.WRITE}


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _aux_accesses(record: SyscallRecord) -> tuple:
    raw = record.aux.get("accesses", ())
    if not isinstance(raw, (list, tuple)) or any(
        not isinstance(a, str) or a not in _ACCESS_FROM_WIRE for a in raw
    ):
        raise MalformedParams(record.name, f"aux.accesses invalid: {raw!r}")
    return tuple(_ACCESS_FROM_WIRE[a] for a in raw)


def _params_from_record(record: SyscallRecord, idmap):
    """Translate a trace record into model-level syscall parameters."""
    caller = idmap.subject(record.pid)
    name = record.name
    args = record.args
    aux = record.aux
    aux_inode = aux.get("inode")
    if aux_inode is not None and not _is_int(aux_inode):
        raise MalformedParams(name, f"aux.inode must be an integer, got {aux_inode!r}")

    if name == "open":
        new_entity = None
        if aux_inode is not None and not idmap.has_entity(aux_inode):
            # An inode first seen here: the kernel created it during this call.
            new_entity = aux_inode
        return {
            "caller": caller,
            "pathname": args.get("pathname"),
            "flags": args.get("flags", ()),
            "new_entity": new_entity,
        }
    if name in ("read", "write"):
        entity = idmap.entity(aux_inode) if aux_inode is not None and idmap.has_entity(aux_inode) else None
        return {"caller": caller, "entity": entity}
    if name == "close":
        entity = idmap.entity(aux_inode) if aux_inode is not None and idmap.has_entity(aux_inode) else None
        return {"caller": caller, "entity": entity, "kinds": _aux_accesses(record)}
    if name == "unlink":
        return {"caller": caller, "pathname": args.get("pathname")}
    if name == "mkdir":
        new_entity = None
        if aux_inode is not None and not idmap.has_entity(aux_inode):
            new_entity = aux_inode
        return {"caller": caller, "pathname": args.get("pathname"), "new_entity": new_entity}
    if name == "setlabel":
        return {"caller": caller, "pathname": args.get("pathname"), "level": args.get("level")}
    raise AssertionError(f"unmapped syscall {name}")  # guarded by catalog check


def replay_trace(trace: Trace, graphs=None, on_call=None) -> ReplayResult:
    """Replay a parsed trace; see the module docstring for the verdict
    matrix. ``on_call(record, outcome, state_before, state_after)`` is
    invoked for every replayed call (test instrumentation)."""
    if graphs is None:
        graphs = GRAPH_CATALOG
    state, idmap = map_snapshot(trace.snapshot)
    coverage = CoverageReport.for_catalog(graphs)
    coverage.record_invariant_checks(run_invariant_checks(state))

    journal: list[JournalEntry] = []
    calls_processed = 0

    for record in trace.calls:
        calls_processed = record.seq
        if record.name not in graphs:
            journal.append(
                JournalEntry(
                    Severity.WARN,
                    record.seq,
                    JournalKind.UNMODELED_SYSCALL,
                    {"name": record.name},
                )
            )
            continue

        params = _params_from_record(record, idmap)
        before = state
        outcome = replay_syscall(state, graphs, record.name, params, hook=coverage)
        real_granted = record.granted

        if outcome.granted and real_granted:
            state = outcome.final_state
            aux_inode = record.aux.get("inode")
            if aux_inode is not None:
                idmap.add_entity(aux_inode)
        elif not outcome.granted and not real_granted:
            pass  # agreement on denial is never journaled, whatever the errno
        elif not outcome.granted and real_granted:
            journal.append(
                JournalEntry(
                    Severity.CRIT,
                    record.seq,
                    JournalKind.DENIED_BUT_GRANTED,
                    {
                        "name": record.name,
                        "denial_site": outcome.denial_site,
                        "model_errno": errno_name(-outcome.return_value),
                        "path": list(outcome.path),
                    },
                )
            )
            if on_call is not None:
                on_call(record, outcome, before, state)
            return ReplayResult(
                ReplayStatus.FAILURE, tuple(journal), record.seq, coverage
            )
        else:  # model grants, kernel denied: triage errno and roll back
            entry = check_err_code(record)
            if entry is not None:
                journal.append(entry)
            state = before

        if on_call is not None:
            on_call(record, outcome, before, state)

    if trace.final_snapshot is not None:
        mapped_final, _ = map_snapshot(trace.final_snapshot)
        coverage.record_invariant_checks(run_invariant_checks(mapped_final))
        divergences = compare_states(mapped_final, state)
        if divergences:
            journal.append(
                JournalEntry(
                    Severity.WARN,
                    0,
                    JournalKind.FINAL_STATE_DIVERGENCE,
                    {"divergences": [d.to_json() for d in divergences]},
                )
            )
    else:
        journal.append(
            JournalEntry(
                Severity.INFO,
                0,
                JournalKind.SNAPSHOT_SKIPPED,
                {"reason": "trace has no final snapshot; final comparison skipped"},
            )
        )

    return ReplayResult(ReplayStatus.SUCCESS, tuple(journal), calls_processed, coverage)
