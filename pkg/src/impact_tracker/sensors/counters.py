"""Cumulative energy counter bookkeeping with single-wrap handling."""

from dataclasses import dataclass, replace

from ..errors import RangeViolation


@dataclass(frozen=True)
class EnergyCounterState:
    domain: str
    last_raw_uj: float
    max_range_uj: float
    accumulated_j: float = 0.0


def advance_energy_counter(
    state: EnergyCounterState, new_raw_uj: float
) -> EnergyCounterState:
    """Fold a new raw reading into the accumulated energy.

    A reading below the previous one is treated as exactly one counter wrap;
    polling intervals are far shorter than the wrap period, so multiple wraps
    between readings are unobservable in practice.
    """
    if new_raw_uj < 0 or new_raw_uj > state.max_range_uj:
        raise RangeViolation(
            "raw reading %r outside [0, %r] for domain %s"
            % (new_raw_uj, state.max_range_uj, state.domain)
        )
    if new_raw_uj >= state.last_raw_uj:
        delta_uj = new_raw_uj - state.last_raw_uj
    else:
        delta_uj = (state.max_range_uj - state.last_raw_uj) + new_raw_uj
    return replace(
        state,
        last_raw_uj=new_raw_uj,
        accumulated_j=state.accumulated_j + delta_uj * 1e-6,
    )
