"""Telemetry types and the sensor router.

Each sensor is described by a descriptor carrying a compatibility predicate
and a gather function; the router filters descriptors down to what the
current system actually supports, and the run proceeds with whatever is
available.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from ..errors import ClockSkew


@dataclass
class SystemInfo:
    platform: str
    powercap_root: str = "/sys/class/powercap"
    proc_root: str = "/proc"
    smi_executable: str = "nvidia-smi"
    backend: str = "system"  # or "replay"


@dataclass
class SensorDescriptor:
    name: str
    description: str
    compatibility_check: Callable[[SystemInfo], bool]
    gather: Callable


def list_compatible_sensors(
    system: SystemInfo, router: List[SensorDescriptor]
) -> List[SensorDescriptor]:
    """Filter the router down to sensors whose compatibility check passes."""
    seen = set()
    for d in router:
        if d.name in seen:
            raise ValueError("duplicate sensor name: %r" % (d.name,))
        seen.add(d.name)
    return [d for d in router if d.compatibility_check(system)]


@dataclass
class PowerSample:
    timestamp: float
    cpu_energy_j: float = 0.0  # energy consumed since the previous sample
    dram_energy_j: float = 0.0
    gpu_power_w: List[float] = field(default_factory=list)
    gpu_util_pct: List[float] = field(default_factory=list)
    gpu_mem_pct: List[float] = field(default_factory=list)
    gpu_pstate: List[str] = field(default_factory=list)
    cpu_freq_hz: Optional[float] = None
    disk_write_bps: Optional[float] = None

    def __post_init__(self):
        if self.cpu_energy_j < 0 or self.dram_energy_j < 0:
            raise ValueError("energy must be non-negative")
        for p in self.gpu_power_w:
            if p < 0:
                raise ValueError("power must be non-negative")
        for u in self.gpu_util_pct + self.gpu_mem_pct:
            if not 0 <= u <= 100:
                raise ValueError("utilization must lie in [0, 100]")

    def to_dict(self) -> dict:
        return {
            "cpu_energy_j": self.cpu_energy_j,
            "dram_energy_j": self.dram_energy_j,
            "gpu_power_w": self.gpu_power_w,
            "gpu_util_pct": self.gpu_util_pct,
            "gpu_mem_pct": self.gpu_mem_pct,
            "gpu_pstate": self.gpu_pstate,
            "cpu_freq_hz": self.cpu_freq_hz,
            "disk_write_bps": self.disk_write_bps,
        }


@dataclass
class ProcessTreeSnapshot:
    root_pid: int
    timestamp: float
    # pid -> (cumulative cpu seconds, rss bytes)
    members: Dict[int, tuple] = field(default_factory=dict)
    # (pid, device index) -> SM utilization percent
    gpu_proc_util: Dict[tuple, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.members and self.root_pid not in self.members:
            raise ValueError("root pid must be a member of its own tree")

    def total_cpu_time_s(self) -> float:
        return sum(cpu for cpu, _ in self.members.values())

    def total_rss_bytes(self) -> float:
        return sum(rss for _, rss in self.members.values())


@dataclass
class SystemUsage:
    """System-wide counterpart of a process-tree snapshot."""

    timestamp: float
    busy_cpu_time_s: float  # cumulative non-idle cpu seconds, all cores
    mem_used_bytes: float
    gpu_total_sm_util: Dict[int, float] = field(default_factory=dict)


@dataclass
class ResourceShares:
    p_cpu: float
    p_dram: float
    p_gpu: Dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        for v in [self.p_cpu, self.p_dram, *self.p_gpu.values()]:
            if not 0.0 <= v <= 1.0:
                raise ValueError("share out of [0, 1]: %r" % (v,))


def sample_utilization_shares(
    prev: ProcessTreeSnapshot,
    next: ProcessTreeSnapshot,
    system_prev: SystemUsage,
    system_next: SystemUsage,
) -> ResourceShares:
    """Fraction of each system resource used by the tracked tree over an interval.

    CPU uses the ratio of tree cpu-time delta to system busy-time delta;
    DRAM uses the tree RSS fraction of used memory at the end of the
    interval; GPU uses the tree's SM-utilization fraction per device.
    Any share with a zero denominator is defined as 0.
    """
    if next.timestamp <= prev.timestamp:
        raise ClockSkew("snapshot timestamps must be increasing")
    if system_next.timestamp <= system_prev.timestamp:
        raise ClockSkew("system usage timestamps must be increasing")

    tree_cpu_delta = 0.0
    for pid, (cpu, _) in next.members.items():
        prev_cpu = prev.members.get(pid, (0.0, 0.0))[0]
        tree_cpu_delta += max(0.0, cpu - prev_cpu)
    busy_delta = system_next.busy_cpu_time_s - system_prev.busy_cpu_time_s
    p_cpu = _share(tree_cpu_delta, busy_delta)

    p_dram = _share(next.total_rss_bytes(), system_next.mem_used_bytes)

    p_gpu: Dict[int, float] = {}
    for device, total in system_next.gpu_total_sm_util.items():
        tree_util = sum(
            u for (pid, dev), u in next.gpu_proc_util.items() if dev == device
        )
        p_gpu[device] = _share(tree_util, total)

    return ResourceShares(p_cpu=p_cpu, p_dram=p_dram, p_gpu=p_gpu)


def _share(numerator: float, denominator: float) -> float:
    if denominator <= 0:
        return 0.0
    return min(1.0, max(0.0, numerator / denominator))
