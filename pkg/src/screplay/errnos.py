"""Errno constants used in trace result codes.

Syscall records carry negative errnos in ``result.code``; these are the
standard numeric values. Only this closed set appears in generated traces.
"""

EPERM = 1
ENOENT = 2
ENOMEM = 12
EACCES = 13
EINVAL = 22

ERRNO_NAMES = {
    EPERM: "EPERM",
    ENOENT: "ENOENT",
    ENOMEM: "ENOMEM",
    EACCES: "EACCES",
    EINVAL: "EINVAL",
}

NAME_TO_ERRNO = {name: num for num, name in ERRNO_NAMES.items()}


def errno_name(code: int) -> str:
    """Symbolic name for a positive errno value, or ``E<num>`` if unknown."""
    return ERRNO_NAMES.get(code, f"E{code}")
