"""Per-process energy and carbon accounting for compute workloads."""

__version__ = "0.1.0"

SCHEMA_VERSION = "1.0.0"
