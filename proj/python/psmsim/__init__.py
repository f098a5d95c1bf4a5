"""Cluster power-state management: simulation and workload tooling."""

from ._core import (
    JobSpec,
    WorkloadTrace,
    __version__,
    generate_sampled,
    generate_synthetic,
    make_reference_trace,
    mean_interarrival,
    parse_swf,
    simulate,
    split_trace,
    validate_exponential,
    write_swf,
)


def load_swf(path):
    """Parse an SWF file; returns (trace, dropped_record_count)."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_swf(fh.read())


def save_swf(path, trace):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_swf(trace))


__all__ = [
    "JobSpec",
    "WorkloadTrace",
    "__version__",
    "generate_sampled",
    "generate_synthetic",
    "load_swf",
    "make_reference_trace",
    "mean_interarrival",
    "parse_swf",
    "save_swf",
    "simulate",
    "split_trace",
    "validate_exponential",
    "write_swf",
]
