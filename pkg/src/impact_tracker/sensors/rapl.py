"""CPU/DRAM energy via the powercap filesystem interface.

Reads the `intel-rapl` class tree: each domain directory carries `name`,
`energy_uj`, and `max_energy_range_uj` files with decimal integer contents.
No administrator access is required, which is why this interface is the one
we support.
"""

import glob
import os
from typing import Dict, Tuple

from .counters import EnergyCounterState, advance_energy_counter


def _read_int(path: str) -> int:
    with open(path) as f:
        return int(f.read().strip())


def _read_str(path: str) -> str:
    with open(path) as f:
        return f.read().strip()


def discover_domains(powercap_root: str) -> Dict[str, str]:
    """Map domain name ('package-0', 'dram', ...) to its directory."""
    domains = {}
    pattern = os.path.join(powercap_root, "intel-rapl", "intel-rapl:*")
    for d in sorted(glob.glob(pattern)) + sorted(glob.glob(pattern + ":*")):
        name_file = os.path.join(d, "name")
        energy_file = os.path.join(d, "energy_uj")
        if os.path.exists(name_file) and os.path.exists(energy_file):
            domains[_read_str(name_file)] = d
    return domains


def powercap_available(powercap_root: str) -> bool:
    try:
        return bool(discover_domains(powercap_root))
    except OSError:
        return False


class RaplReader:
    """Tracks accumulated Joules per powercap domain across polls."""

    def __init__(self, powercap_root: str):
        self._dirs = discover_domains(powercap_root)
        self._states: Dict[str, EnergyCounterState] = {}
        for name, d in self._dirs.items():
            max_range = _read_int(os.path.join(d, "max_energy_range_uj"))
            raw = _read_int(os.path.join(d, "energy_uj"))
            self._states[name] = EnergyCounterState(
                domain=name, last_raw_uj=raw, max_range_uj=max_range
            )

    def poll(self) -> Tuple[float, float]:
        """Returns (cpu_joules, dram_joules) consumed since the last poll."""
        cpu_j = 0.0
        dram_j = 0.0
        for name, d in self._dirs.items():
            raw = _read_int(os.path.join(d, "energy_uj"))
            before = self._states[name].accumulated_j
            self._states[name] = advance_energy_counter(self._states[name], raw)
            delta = self._states[name].accumulated_j - before
            if "dram" in name:
                dram_j += delta
            else:
                cpu_j += delta
        return cpu_j, dram_j
