"""Process-tree and system CPU/memory sampling from procfs."""

import os
import re
import time
from typing import Dict, Tuple

from ..errors import ProcessGone
from .base import ProcessTreeSnapshot, SystemUsage

_STAT_RE = re.compile(r"^(\d+) \((.*)\) (\S) (-?\d+) (?:(-?\d+) ){9}(\d+) (\d+)")


def _clock_ticks() -> float:
    return float(os.sysconf("SC_CLK_TCK"))


def _page_size() -> int:
    return os.sysconf("SC_PAGE_SIZE")


def _read_pid_stat(proc_root: str, pid: int) -> Tuple[int, float]:
    """Returns (ppid, cumulative cpu seconds) for one pid."""
    with open(os.path.join(proc_root, str(pid), "stat"), "rb") as f:
        data = f.read().decode("utf-8", errors="replace")
    # comm can contain spaces/parens; split around the last ')'
    rparen = data.rindex(")")
    fields = data[rparen + 2 :].split()
    ppid = int(fields[1])  # field 4 overall
    utime = int(fields[11])  # field 14
    stime = int(fields[12])  # field 15
    return ppid, (utime + stime) / _clock_ticks()


def _read_pid_rss(proc_root: str, pid: int) -> int:
    with open(os.path.join(proc_root, str(pid), "statm")) as f:
        parts = f.read().split()
    return int(parts[1]) * _page_size()


def snapshot_process_tree(
    root_pid: int, proc_root: str = "/proc", timestamp: float = None
) -> ProcessTreeSnapshot:
    """Capture the root process and all live transitive children.

    Raises ProcessGone when the root itself has exited; children that exited
    between snapshots simply drop out of the member set.
    """
    if timestamp is None:
        timestamp = time.time()
    if not os.path.isdir(os.path.join(proc_root, str(root_pid))):
        raise ProcessGone("root pid %d has exited" % root_pid)

    children: Dict[int, list] = {}
    stats: Dict[int, float] = {}
    for entry in os.listdir(proc_root):
        if not entry.isdigit():
            continue
        pid = int(entry)
        try:
            ppid, cpu_s = _read_pid_stat(proc_root, pid)
        except (OSError, ValueError, IndexError):
            continue  # raced with process exit
        stats[pid] = cpu_s
        children.setdefault(ppid, []).append(pid)

    if root_pid not in stats:
        raise ProcessGone("root pid %d has exited" % root_pid)

    members: Dict[int, tuple] = {}
    stack = [root_pid]
    while stack:
        pid = stack.pop()
        if pid in members:
            continue
        try:
            rss = _read_pid_rss(proc_root, pid)
        except (OSError, ValueError, IndexError):
            rss = 0
        members[pid] = (stats[pid], rss)
        stack.extend(children.get(pid, []))

    return ProcessTreeSnapshot(root_pid=root_pid, timestamp=timestamp, members=members)


def system_busy_cpu_time(proc_root: str = "/proc") -> float:
    """Cumulative non-idle cpu seconds summed over all cores."""
    with open(os.path.join(proc_root, "stat")) as f:
        first = f.readline().split()
    values = [int(v) for v in first[1:]]
    idle = values[3] + (values[4] if len(values) > 4 else 0)  # idle + iowait
    return (sum(values) - idle) / _clock_ticks()


def system_mem_used(proc_root: str = "/proc") -> float:
    total = None
    available = None
    with open(os.path.join(proc_root, "meminfo")) as f:
        for line in f:
            if line.startswith("MemTotal:"):
                total = int(line.split()[1]) * 1024
            elif line.startswith("MemAvailable:"):
                available = int(line.split()[1]) * 1024
            if total is not None and available is not None:
                break
    if total is None or available is None:
        return 0.0
    return float(total - available)


def snapshot_system_usage(
    proc_root: str = "/proc", timestamp: float = None,
    gpu_total_sm_util: Dict[int, float] = None,
) -> SystemUsage:
    if timestamp is None:
        timestamp = time.time()
    return SystemUsage(
        timestamp=timestamp,
        busy_cpu_time_s=system_busy_cpu_time(proc_root),
        mem_used_bytes=system_mem_used(proc_root),
        gpu_total_sm_util=dict(gpu_total_sm_util or {}),
    )


def procfs_available(proc_root: str = "/proc") -> bool:
    return os.path.exists(os.path.join(proc_root, "stat"))


def cpu_freq_hz(proc_root: str = "/proc") -> float:
    """Mean current core frequency from /proc/cpuinfo, in Hz (0 if unknown)."""
    freqs = []
    try:
        with open(os.path.join(proc_root, "cpuinfo")) as f:
            for line in f:
                if line.lower().startswith("cpu mhz"):
                    freqs.append(float(line.split(":")[1]) * 1e6)
    except (OSError, ValueError, IndexError):
        return 0.0
    return sum(freqs) / len(freqs) if freqs else 0.0
