"""Figure rendering for replay reports.

Renders coverage and journal summaries as PNG files next to the delimited
outputs. All rendering uses the Agg backend so it works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .engine.coverage import CoverageReport
from .engine.journal import Severity

_SEVERITY_COLORS = {"CRIT": "#c0392b", "WARN": "#e67e22", "INFO": "#2980b9"}


def render_coverage_figure(cov: CoverageReport, path: str, threshold: float = 0.8) -> str:
    """Two-panel bar chart: per-graph node coverage and per-graph guard
    conjunct coverage, with the overall conjunct fraction and threshold."""
    graphs = sorted(cov.node_universe)
    node_fractions = [cov.graph_fractions()[g] for g in graphs]

    conjunct_fractions = []
    for g in graphs:
        keys = [(g, c) for c in cov.conjunct_universe.get(g, ())]
        if not keys:
            conjunct_fractions.append(1.0)
            continue
        both = sum(
            1 for k in keys if cov.conjunct_counts[k][0] > 0 and cov.conjunct_counts[k][1] > 0
        )
        conjunct_fractions.append(both / len(keys))

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    ax1.bar(graphs, node_fractions, color="#2c3e50")
    ax1.set_title("visited nodes per graph")
    ax1.set_ylim(0, 1.05)
    ax1.tick_params(axis="x", rotation=45)

    ax2.bar(graphs, conjunct_fractions, color="#16a085")
    ax2.axhline(threshold, color="#c0392b", linestyle="--", linewidth=1, label=f"threshold {threshold}")
    ax2.axhline(
        cov.conjunct_fraction(),
        color="#2980b9",
        linestyle=":",
        linewidth=1,
        label=f"overall {cov.conjunct_fraction():.2f}",
    )
    ax2.set_title("guard conjuncts observed both ways")
    ax2.tick_params(axis="x", rotation=45)
    ax2.legend(loc="lower right", fontsize=8)

    for ax in (ax1, ax2):
        ax.set_ylabel("fraction")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_journal_figure(entries, path: str) -> str:
    """Histogram of journal entries by severity and by kind."""
    severities = [s.value for s in Severity]
    sev_counts = {s: 0 for s in severities}
    kind_counts: dict[str, int] = {}
    for e in entries:
        sev_counts[e.severity.value] += 1
        kind_counts[e.kind] = kind_counts.get(e.kind, 0) + 1

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.bar(
        severities,
        [sev_counts[s] for s in severities],
        color=[_SEVERITY_COLORS[s] for s in severities],
    )
    ax1.set_title("journal entries by severity")

    kinds = sorted(kind_counts)
    ax2.bar(kinds, [kind_counts[k] for k in kinds], color="#7f8c8d")
    ax2.set_title("journal entries by kind")
    ax2.tick_params(axis="x", rotation=30)

    for ax in (ax1, ax2):
        ax.set_ylabel("count")
        ax.yaxis.get_major_locator().set_params(integer=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
