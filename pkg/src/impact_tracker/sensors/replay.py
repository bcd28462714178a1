"""Deterministic replay backend: scripted telemetry for tests and goldens.

A trace is a JSON document:

    {
      "start_time": 1.0,
      "steps": [
        {"dt": 1.0,
         "cpu_energy_j": 5.0, "dram_energy_j": 0.5,
         "gpu_power_w": [100.0], "gpu_util_pct": [80.0],
         "tree_cpu_time_s": 0.9, "sys_busy_cpu_time_s": 1.0,
         "tree_rss_bytes": 1000, "sys_mem_used_bytes": 4000,
         "tree_sm_util": [60.0], "total_sm_util": [80.0],
         "fault": "gpu"},
        ...
      ]
    }

The first step is the baseline sample; cumulative quantities
(tree_cpu_time_s, sys_busy_cpu_time_s) are absolute at each step, while
cpu_energy_j/dram_energy_j are the energy consumed since the previous step.
An optional "fault" names a sensor that fails on that tick, exercising the
fault-tolerance path.
"""

import json
from typing import NamedTuple, Optional

from ..errors import TraceExhausted
from .base import PowerSample, ProcessTreeSnapshot, SystemUsage


class ScriptedSensorFault(Exception):
    """Raised when a trace step scripts a sensor failure."""

    def __init__(self, sensor: str):
        super().__init__("scripted fault in sensor %r" % sensor)
        self.sensor = sensor


class ReplayTick(NamedTuple):
    sample: PowerSample
    tree: ProcessTreeSnapshot
    system: SystemUsage
    fault: Optional[str]


class ReplayTrace:
    def __init__(self, spec: dict, root_pid: int = 1000):
        self.start_time = float(spec.get("start_time", 1.0))
        self.steps = list(spec.get("steps", []))
        self.root_pid = root_pid
        self._index = 0
        self._clock = self.start_time

    @classmethod
    def from_file(cls, path, root_pid: int = 1000) -> "ReplayTrace":
        with open(path) as f:
            return cls(json.load(f), root_pid=root_pid)

    @property
    def exhausted(self) -> bool:
        return self._index >= len(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def next(self) -> ReplayTick:
        if self.exhausted:
            raise TraceExhausted("replay trace has no more steps")
        step = self.steps[self._index]
        if self._index > 0:
            self._clock += float(step.get("dt", 1.0))
        t = self._clock
        self._index += 1

        sample = PowerSample(
            timestamp=t,
            cpu_energy_j=float(step.get("cpu_energy_j", 0.0)),
            dram_energy_j=float(step.get("dram_energy_j", 0.0)),
            gpu_power_w=[float(p) for p in step.get("gpu_power_w", [])],
            gpu_util_pct=[float(u) for u in step.get("gpu_util_pct", [])],
            gpu_mem_pct=[float(u) for u in step.get("gpu_mem_pct", [])],
            gpu_pstate=[str(s) for s in step.get("gpu_pstate", [])],
            cpu_freq_hz=step.get("cpu_freq_hz"),
            disk_write_bps=step.get("disk_write_bps"),
        )
        tree = ProcessTreeSnapshot(
            root_pid=self.root_pid,
            timestamp=t,
            members={
                self.root_pid: (
                    float(step.get("tree_cpu_time_s", 0.0)),
                    float(step.get("tree_rss_bytes", 0.0)),
                )
            },
            gpu_proc_util={
                (self.root_pid, d): float(u)
                for d, u in enumerate(step.get("tree_sm_util", []))
            },
        )
        system = SystemUsage(
            timestamp=t,
            busy_cpu_time_s=float(step.get("sys_busy_cpu_time_s", 0.0)),
            mem_used_bytes=float(step.get("sys_mem_used_bytes", 0.0)),
            gpu_total_sm_util={
                d: float(u) for d, u in enumerate(step.get("total_sm_util", []))
            },
        )
        return ReplayTick(sample=sample, tree=tree, system=system,
                          fault=step.get("fault"))


def replay_next(trace: ReplayTrace) -> ReplayTick:
    return trace.next()


def constant_power_trace(
    n_steps: int,
    dt: float = 1.0,
    gpu_power_w: float = 0.0,
    cpu_energy_j_per_step: float = 0.0,
    dram_energy_j_per_step: float = 0.0,
    gpu_util_pct: float = 100.0,
    start_time: float = 1.0,
    faults: dict = None,
) -> dict:
    """Build a simple sole-process trace spec (shares all 1 where active)."""
    faults = faults or {}
    steps = []
    for i in range(n_steps + 1):  # baseline + n_steps intervals
        step = {
            "dt": dt,
            "cpu_energy_j": 0.0 if i == 0 else cpu_energy_j_per_step,
            "dram_energy_j": 0.0 if i == 0 else dram_energy_j_per_step,
            "gpu_power_w": [gpu_power_w],
            "gpu_util_pct": [gpu_util_pct],
            "tree_cpu_time_s": i * dt,
            "sys_busy_cpu_time_s": i * dt,
            "tree_rss_bytes": 1000.0,
            "sys_mem_used_bytes": 1000.0,
            "tree_sm_util": [gpu_util_pct],
            "total_sm_util": [gpu_util_pct],
        }
        if i in faults:
            step["fault"] = faults[i]
        steps.append(step)
    return {"start_time": start_time, "steps": steps}
