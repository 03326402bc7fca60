"""Replay coverage: visited graph nodes, guard conjunct outcomes, and
exercised invariants.

A guard conjunct counts as covered once it has been observed both true and
false. An invariant counts as exercised once some invariant check evaluated
it over a non-empty domain. Reports merge commutatively so coverage can be
accumulated across traces.
"""

from __future__ import annotations

import json

from ..policy.invariants import invariant_names


class CoverageMismatch(ValueError):
    """Reports over different catalogs cannot be merged."""


class CoverageReport:
    def __init__(self, node_universe, conjunct_universe, invariant_universe):
        # universe: graph -> tuple of node names / conjunct names
        self.node_universe = {g: tuple(ns) for g, ns in node_universe.items()}
        self.conjunct_universe = {g: tuple(cs) for g, cs in conjunct_universe.items()}
        self.invariant_universe = tuple(invariant_universe)
        self.nodes_visited: dict[str, set[str]] = {g: set() for g in self.node_universe}
        self.conjunct_counts: dict[tuple[str, str], list[int]] = {
            (g, c): [0, 0] for g, cs in self.conjunct_universe.items() for c in cs
        }
        self.invariants_exercised: set[str] = set()

    @classmethod
    def for_catalog(cls, graphs) -> "CoverageReport":
        return cls(
            node_universe={name: sorted(g.nodes) for name, g in graphs.items()},
            conjunct_universe={name: g.conjunct_names() for name, g in graphs.items()},
            invariant_universe=[f"{group}/{name}" for group, name in invariant_names()],
        )

    # -- observation hooks (CoverageHook protocol) --

    def node_visited(self, graph: str, node: str) -> None:
        self.nodes_visited.setdefault(graph, set()).add(node)

    def conjunct_observed(self, graph: str, conjunct: str, value: bool) -> None:
        counts = self.conjunct_counts.get((graph, conjunct))
        if counts is None:
            counts = self.conjunct_counts.setdefault((graph, conjunct), [0, 0])
        counts[0 if value else 1] += 1

    def record_invariant_checks(self, results) -> None:
        """Feed the output of run_invariant_checks."""
        for group, name, _witnesses, domain in results:
            if domain > 0:
                self.invariants_exercised.add(f"{group}/{name}")

    # -- fractions --

    def graph_fractions(self) -> dict[str, float]:
        out = {}
        for g, nodes in self.node_universe.items():
            visited = len(self.nodes_visited.get(g, ()) )
            out[g] = visited / len(nodes) if nodes else 1.0
        return out

    def conjuncts_covered(self) -> tuple[int, int]:
        total = len(self.conjunct_counts)
        both = sum(1 for t, f in self.conjunct_counts.values() if t > 0 and f > 0)
        return both, total

    def conjunct_fraction(self) -> float:
        both, total = self.conjuncts_covered()
        return both / total if total else 1.0

    def invariant_fraction(self) -> float:
        if not self.invariant_universe:
            return 1.0
        return len(self.invariants_exercised & set(self.invariant_universe)) / len(
            self.invariant_universe
        )

    # -- merge / serialization --

    def merge(self, other: "CoverageReport") -> None:
        if (
            self.node_universe != other.node_universe
            or self.conjunct_universe != other.conjunct_universe
            or self.invariant_universe != other.invariant_universe
        ):
            raise CoverageMismatch("coverage universes differ; same catalog required")
        for g, visited in other.nodes_visited.items():
            self.nodes_visited.setdefault(g, set()).update(visited)
        for key, (t, f) in other.conjunct_counts.items():
            mine = self.conjunct_counts.setdefault(key, [0, 0])
            mine[0] += t
            mine[1] += f
        self.invariants_exercised |= other.invariants_exercised

    def to_json(self) -> dict:
        graphs = {}
        for g, nodes in sorted(self.node_universe.items()):
            visited = sorted(self.nodes_visited.get(g, ()))
            graphs[g] = {
                "nodes": list(nodes),
                "visited": visited,
                "fraction": round(self.graph_fractions()[g], 6),
            }
        observed = {
            f"{g}.{c}": {"true": t, "false": f}
            for (g, c), (t, f) in sorted(self.conjunct_counts.items())
        }
        both, total = self.conjuncts_covered()
        return {
            "graphs": graphs,
            "guard_conjuncts": {
                "universe": {g: list(cs) for g, cs in sorted(self.conjunct_universe.items())},
                "observed": observed,
                "covered": both,
                "total": total,
                "fraction": round(self.conjunct_fraction(), 6),
            },
            "invariants": {
                "universe": list(self.invariant_universe),
                "exercised": sorted(self.invariants_exercised),
                "fraction": round(self.invariant_fraction(), 6),
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CoverageReport":
        conjuncts = obj["guard_conjuncts"]
        report = cls(
            node_universe={g: info["nodes"] for g, info in obj["graphs"].items()},
            conjunct_universe={g: cs for g, cs in conjuncts["universe"].items()},
            invariant_universe=obj["invariants"]["universe"],
        )
        report.nodes_visited = {g: set(info["visited"]) for g, info in obj["graphs"].items()}
        for key, counts in conjuncts["observed"].items():
            g, c = key.split(".", 1)
            report.conjunct_counts[(g, c)] = [counts["true"], counts["false"]]
        report.invariants_exercised = set(obj["invariants"]["exercised"])
        return report

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"
