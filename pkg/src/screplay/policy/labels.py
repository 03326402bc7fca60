"""Integrity and confidentiality labels.

Integrity is a plain non-negative integer (a chain: higher means more
trusted). Confidentiality is a (level, category-set) pair ordered
componentwise, which makes it a genuine lattice with incomparable elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class SecurityLabel:
    """A confidentiality label: clearance level plus a set of categories."""

    level: int
    categories: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"security level must be non-negative, got {self.level}")
        if not isinstance(self.categories, frozenset):
            object.__setattr__(self, "categories", frozenset(self.categories))

    def __le__(self, other: "SecurityLabel") -> bool:
        return self.level <= other.level and self.categories <= other.categories

    def __ge__(self, other: "SecurityLabel") -> bool:
        return other.__le__(self)

    def join(self, other: "SecurityLabel") -> "SecurityLabel":
        return SecurityLabel(max(self.level, other.level), self.categories | other.categories)

    def meet(self, other: "SecurityLabel") -> "SecurityLabel":
        return SecurityLabel(min(self.level, other.level), self.categories & other.categories)


BOTTOM_LABEL = SecurityLabel(0, frozenset())
