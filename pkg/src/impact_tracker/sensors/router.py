"""Default sensor catalogue for the metric router."""

from .base import SensorDescriptor, SystemInfo
from . import gpu, procs, rapl


def build_default_router() -> list:
    """All known sensors; the caller filters them with list_compatible_sensors."""
    return [
        SensorDescriptor(
            name="cpu_dram_energy",
            description="CPU/DRAM energy counters via the powercap interface",
            compatibility_check=lambda s: (
                s.backend == "system"
                and s.platform.startswith("linux")
                and rapl.powercap_available(s.powercap_root)
            ),
            gather=lambda s: rapl.RaplReader(s.powercap_root),
        ),
        SensorDescriptor(
            name="gpu",
            description="GPU power, utilization and per-process SM share via SMI",
            compatibility_check=lambda s: (
                s.backend == "system" and gpu.smi_available(s.smi_executable)
            ),
            gather=lambda s: None,
        ),
        SensorDescriptor(
            name="process_tree",
            description="Per-process CPU time and RSS from procfs",
            compatibility_check=lambda s: (
                s.backend == "system" and procs.procfs_available(s.proc_root)
            ),
            gather=lambda s: None,
        ),
        SensorDescriptor(
            name="replay",
            description="Deterministic scripted telemetry",
            compatibility_check=lambda s: s.backend == "replay",
            gather=lambda s: None,
        ),
    ]
