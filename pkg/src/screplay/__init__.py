"""screplay: replay OS syscall traces against an executable access-control model.

The pipeline: a mock kernel generates traces (optionally with injected
faults), the trace layer parses and maps them onto the policy model, and
the replay engine walks each call through its event graph, journaling every
divergence between what the kernel did and what the model allows.
"""

__version__ = "0.1.0"
