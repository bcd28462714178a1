from .base import (
    PowerSample,
    ProcessTreeSnapshot,
    ResourceShares,
    SensorDescriptor,
    SystemInfo,
    SystemUsage,
    list_compatible_sensors,
    sample_utilization_shares,
)
from .counters import EnergyCounterState, advance_energy_counter
from .replay import ReplayTick, ReplayTrace, ScriptedSensorFault, replay_next

__all__ = [
    "PowerSample",
    "ProcessTreeSnapshot",
    "ResourceShares",
    "SensorDescriptor",
    "SystemInfo",
    "SystemUsage",
    "list_compatible_sensors",
    "sample_utilization_shares",
    "EnergyCounterState",
    "advance_energy_counter",
    "ReplayTick",
    "ReplayTrace",
    "ScriptedSensorFault",
    "replay_next",
]
