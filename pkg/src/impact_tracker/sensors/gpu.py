"""GPU telemetry via the vendor SMI executable.

Device-level power/utilization comes from a CSV query; per-process SM
utilization comes from the pmon subcommand. Absence of the executable fails
the compatibility check, never the run.
"""

import shutil
import subprocess
from dataclasses import dataclass, field
from typing import Dict, List


@dataclass
class GpuDeviceReading:
    index: int
    power_w: float
    util_pct: float
    mem_pct: float
    pstate: str


@dataclass
class GpuReadings:
    devices: List[GpuDeviceReading] = field(default_factory=list)
    # (pid, device index) -> SM utilization percent
    proc_sm_util: Dict[tuple, float] = field(default_factory=dict)


def smi_available(executable: str = "nvidia-smi") -> bool:
    return shutil.which(executable) is not None


def parse_device_csv(text: str) -> List[GpuDeviceReading]:
    """Parse `--query-gpu=... --format=csv,noheader,nounits` output."""
    devices = []
    for line in text.strip().splitlines():
        parts = [p.strip() for p in line.split(",")]
        if len(parts) < 5:
            continue
        devices.append(
            GpuDeviceReading(
                index=int(parts[0]),
                power_w=_num(parts[1]),
                util_pct=_num(parts[2]),
                mem_pct=_num(parts[3]),
                pstate=parts[4],
            )
        )
    return devices


def parse_pmon(text: str) -> Dict[tuple, float]:
    """Parse `pmon -c 1` output to (pid, device) -> SM utilization."""
    util: Dict[tuple, float] = {}
    for line in text.splitlines():
        if line.startswith("#") or not line.strip():
            continue
        parts = line.split()
        if len(parts) < 4:
            continue
        try:
            device = int(parts[0])
            pid = int(parts[1])
        except ValueError:
            continue
        util[(pid, device)] = _num(parts[3])
    return util


def _num(token: str) -> float:
    try:
        return float(token)
    except ValueError:
        return 0.0  # "-" or "[N/A]"


def query_devices(executable: str = "nvidia-smi", timeout: float = 10.0):
    out = subprocess.run(
        [
            executable,
            "--query-gpu=index,power.draw,utilization.gpu,utilization.memory,pstate",
            "--format=csv,noheader,nounits",
        ],
        capture_output=True, text=True, timeout=timeout, check=True,
    )
    return parse_device_csv(out.stdout)


def query_proc_util(executable: str = "nvidia-smi", timeout: float = 10.0):
    out = subprocess.run(
        [executable, "pmon", "-c", "1"],
        capture_output=True, text=True, timeout=timeout, check=True,
    )
    return parse_pmon(out.stdout)


def query_gpu_names(executable: str = "nvidia-smi", timeout: float = 10.0) -> List[str]:
    out = subprocess.run(
        [executable, "--query-gpu=name", "--format=csv,noheader"],
        capture_output=True, text=True, timeout=timeout, check=True,
    )
    return [line.strip() for line in out.stdout.splitlines() if line.strip()]
