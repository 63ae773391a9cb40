"""Solver and training counters in the Prometheus exposition format.

The registry is private to the process; there is no HTTP endpoint. When a run
configures ``metrics_file`` the CLI dumps the registry there at exit.
"""

import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Union

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

REGISTRY = CollectorRegistry()

FORWARD_SOLVES = Counter(
    "dot_forward_solves_total",
    "Linear solves of the diffusion system",
    ["solver"],
    registry=REGISTRY,
)
FACTORIZATION_LATENCY = Histogram(
    "dot_factorization_seconds",
    "Assembly plus factorization time of one diffusion system",
    registry=REGISTRY,
)
JACOBIAN_LATENCY = Histogram(
    "dot_jacobian_assembly_seconds",
    "Sensitivity matrix assembly time",
    registry=REGISTRY,
)
SOLVER_ITERATIONS = Counter(
    "dot_variational_iterations_total",
    "Iterations spent by the variational reconstruction solvers",
    ["method"],
    registry=REGISTRY,
)
TRAINING_EPOCHS = Counter(
    "dot_training_epochs_total",
    "Completed training epochs",
    ["phase"],
    registry=REGISTRY,
)
TRAINING_LOSS = Gauge(
    "dot_training_loss",
    "Most recent epoch training loss",
    ["phase"],
    registry=REGISTRY,
)
COMMAND_COUNTER = Counter(
    "dot_commands_total",
    "Command-line invocations by outcome",
    ["command", "result"],
    registry=REGISTRY,
)
COMMAND_LATENCY = Histogram(
    "dot_command_seconds",
    "Wall time of a command-line invocation",
    ["command"],
    registry=REGISTRY,
)


@contextmanager
def timed(histogram: Histogram) -> Iterator[None]:
    """Observe the wall time of a block"""
    start_time = time.perf_counter()
    try:
        yield
    finally:
        histogram.observe(time.perf_counter() - start_time)


def write_metrics(path: Union[str, Path]) -> None:
    """Dump the registry in the Prometheus text format"""
    write_to_textfile(str(path), REGISTRY)
