import pytest

from impact_tracker.monitor import Monitor, MonitorConfig
from impact_tracker.sensors.replay import constant_power_trace


@pytest.fixture
def run_replay(tmp_path):
    """Run a full monitor lifecycle over a trace spec; returns (monitor, summary)."""

    def _run(trace_spec, subdir="run", **config_kwargs):
        log_dir = tmp_path / subdir
        config = MonitorConfig(
            log_dir=str(log_dir),
            sensor_backend="replay",
            replay_trace=trace_spec,
            pue=config_kwargs.pop("pue", 1.0),
            **config_kwargs,
        )
        monitor = Monitor(config, root_pid=1000).launch()
        monitor._thread.join()
        summary = monitor.shutdown()
        return monitor, summary

    return _run


def gpu_only_trace(n_steps, power_w, dt=1.0, **kwargs):
    return constant_power_trace(n_steps, dt=dt, gpu_power_w=power_w, **kwargs)
