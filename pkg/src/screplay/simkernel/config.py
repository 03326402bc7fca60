"""Simulation configuration and fault specifications."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from ..errnos import EACCES, EINVAL, ENOMEM, EPERM, NAME_TO_ERRNO

WRONG_GRANT = "WrongGrant"
WRONG_DENY = "WrongDeny"
RESOURCE_EXHAUSTION = "ResourceExhaustion"
MISSING_HOOK = "MissingHook"

FAULT_KINDS = (WRONG_GRANT, WRONG_DENY, RESOURCE_EXHAUSTION, MISSING_HOOK)
_WRONG_DENY_ERRNOS = (EACCES, EPERM, EINVAL, ENOMEM)


class SimError(Exception):
    pass


class InvalidConfig(SimError):
    pass


class FaultNeverTriggers(SimError):
    def __init__(self, fault):
        super().__init__(f"fault {fault} never takes effect for this configuration")
        self.fault = fault


@dataclass(frozen=True)
class FaultSpec:
    """An injected kernel defect.

    Triggering: with a seq, the fault fires at exactly that call; with a
    syscall name, it fires at the nth occurrence (1-based, default first)
    of that syscall where the fault can take effect (WrongGrant needs a
    security denial to flip, WrongDeny needs a granted call). A fault fires
    at most once.
    """

    kind: str
    errno: int | None = None  # WrongDeny only
    seq: int | None = None
    name: str | None = None
    nth: int = 1

    def __post_init__(self):
        if self.kind not in FAULT_KINDS:
            raise InvalidConfig(f"unknown fault kind {self.kind!r}")
        if self.kind == WRONG_DENY:
            if self.errno not in _WRONG_DENY_ERRNOS:
                raise InvalidConfig("WrongDeny errno must be EACCES, EPERM, EINVAL or ENOMEM")
        elif self.errno is not None:
            raise InvalidConfig(f"{self.kind} takes no errno")
        if self.seq is None and self.name is None:
            raise InvalidConfig("fault trigger needs a seq or a syscall name")

    def applicable(self, name: str, natural_code: int) -> bool:
        """Could the fault change a call with this natural result? WrongGrant
        can only flip security-module denials; read/write/close denials come
        from descriptor bookkeeping, which the security skip cannot grant."""
        if self.kind == WRONG_GRANT:
            return natural_code in (-EACCES, -EPERM) and name in (
                "open",
                "unlink",
                "mkdir",
                "setlabel",
            )
        if self.kind == WRONG_DENY:
            return natural_code >= 0
        return True

    def to_json(self) -> dict:
        from ..errnos import errno_name

        out = {"kind": self.kind}
        if self.errno is not None:
            out["errno"] = errno_name(self.errno)
        if self.seq is not None:
            out["seq"] = self.seq
        if self.name is not None:
            out["name"] = self.name
            out["nth"] = self.nth
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "FaultSpec":
        errno = obj.get("errno")
        if isinstance(errno, str):
            if errno not in NAME_TO_ERRNO:
                raise InvalidConfig(f"unknown errno name {errno!r}")
            errno = NAME_TO_ERRNO[errno]
        return cls(
            kind=obj.get("kind"),
            errno=errno,
            seq=obj.get("seq"),
            name=obj.get("name"),
            nth=obj.get("nth", 1),
        )


DEFAULT_WORKLOAD = {
    "open": 30,
    "close": 16,
    "read": 14,
    "write": 14,
    "unlink": 9,
    "mkdir": 9,
    "setlabel": 8,
}


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    n_calls: int = 100
    users: int = 2
    files: int = 8
    levels: int = 2
    categories: int = 1
    faults: tuple[FaultSpec, ...] = ()
    workload: dict = field(default_factory=lambda: dict(DEFAULT_WORKLOAD))

    def __post_init__(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise InvalidConfig("seed must be an integer")
        if self.n_calls < 0:
            raise InvalidConfig("n_calls must be non-negative")
        if self.users < 1 or self.files < 1:
            raise InvalidConfig("need at least one user and one file")
        if self.levels < 1 or self.categories < 0:
            raise InvalidConfig("levels must be >= 1 and categories >= 0")
        unknown = set(self.workload) - set(DEFAULT_WORKLOAD)
        if unknown:
            raise InvalidConfig(f"workload names unknown syscalls: {sorted(unknown)}")
        weights = list(self.workload.values())
        if any(not isinstance(w, (int, float)) or w < 0 for w in weights):
            raise InvalidConfig("workload weights must be non-negative numbers")
        if not any(weights):
            raise InvalidConfig("workload weights must not all be zero")

    def with_fault(self, fault: FaultSpec) -> "SimConfig":
        return replace(self, faults=self.faults + (fault,))

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "n_calls": self.n_calls,
            "universe": {
                "users": self.users,
                "files": self.files,
                "levels": self.levels,
                "categories": self.categories,
            },
            "faults": [f.to_json() for f in self.faults],
            "workload": dict(self.workload),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SimConfig":
        if not isinstance(obj, dict):
            raise InvalidConfig("config must be a JSON object")
        universe = obj.get("universe", {})
        try:
            return cls(
                seed=obj.get("seed", 0),
                n_calls=obj.get("n_calls", 100),
                users=universe.get("users", 2),
                files=universe.get("files", 8),
                levels=universe.get("levels", 2),
                categories=universe.get("categories", 1),
                faults=tuple(FaultSpec.from_json(f) for f in obj.get("faults", [])),
                workload=obj.get("workload", dict(DEFAULT_WORKLOAD)),
            )
        except (TypeError, AttributeError) as exc:
            raise InvalidConfig(f"bad config structure: {exc}") from None


def load_config(text: str) -> SimConfig:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config is not valid JSON: {exc.msg}") from None
    return SimConfig.from_json(obj)


def dump_config(config: SimConfig) -> str:
    return json.dumps(config.to_json(), indent=2) + "\n"
