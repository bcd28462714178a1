"""Run lifecycle: launch a sampler next to the workload, poll sensors,
attribute energy per interval, and finalize at exit.

The sampler owns all log writes and never lets a sensor failure escape into
the tracked workload; failures become exception records and the run
continues with whatever telemetry is still available.
"""

import os
import platform
import queue
import sys
import threading
import time
from dataclasses import dataclass
from importlib import metadata
from typing import List, Optional

from . import SCHEMA_VERSION, __version__
from .attribution import (
    CarbonResult,
    EnergyLedger,
    IntervalEnergy,
    accumulate,
    attribute_interval,
    summarize,
)
from .carbon import (
    REGION_OVERRIDE_ENV,
    RegionDatabase,
    SccDatabase,
    geolocate,
)
from .errors import (
    GeolocationUnavailable,
    LaunchFailure,
    NoRegion,
    ProcessGone,
    ProviderUnavailable,
    UnknownCountry,
)
from .realtime import (
    DEFAULT_POLL_INTERVAL_S,
    IntensitySeries,
    integrate_time_varying_emissions,
    poll_realtime_intensity,
)
from .runlog import LogHeader, LogRecord, append_record, finalize
from .sensors import gpu as gpu_sensor
from .sensors import procs, rapl
from .sensors.base import (
    PowerSample,
    ProcessTreeSnapshot,
    SystemInfo,
    SystemUsage,
    list_compatible_sensors,
    sample_utilization_shares,
)
from .sensors.replay import ReplayTrace
from .sensors.router import build_default_router
from .summary import ImpactSummary

LOG_FILENAME = "impact_log.jsonl"

_ENV_PROBE_PACKAGES = ("click", "matplotlib", "requests")


@dataclass
class MonitorConfig:
    log_dir: str
    poll_interval_s: float = 1.0
    pue: float = 1.58  # industry-average data-center overhead; configurable
    region_override: Optional[str] = None
    realtime_poll_interval_s: float = DEFAULT_POLL_INTERVAL_S
    sensor_backend: str = "system"  # "system" or "replay"
    replay_trace: Optional[dict] = None
    replay_trace_path: Optional[str] = None
    intensity_provider: object = None
    geolocation_provider: object = None
    offline: bool = True
    region_db: Optional[RegionDatabase] = None
    scc_db: Optional[SccDatabase] = None
    run_id: Optional[str] = None

    def __post_init__(self):
        if self.poll_interval_s <= 0 or self.realtime_poll_interval_s <= 0:
            raise ValueError("poll intervals must be positive")
        if self.pue < 1.0:
            raise ValueError("pue must be >= 1.0")


class Monitor:
    """Handle over one sampler; exposes the exception queue and shutdown."""

    def __init__(self, config: MonitorConfig, root_pid: int):
        self.config = config
        self.root_pid = root_pid
        self.exceptions: "queue.Queue" = queue.Queue()
        self.ledger = EnergyLedger(pue=config.pue)
        self.intervals: List[IntervalEnergy] = []
        self.series: Optional[IntensitySeries] = None
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None
        self._summary: Optional[ImpactSummary] = None
        self._lock = threading.Lock()
        self._last_t: float = 0.0
        self._last_intensity_poll: Optional[float] = None
        self._prev_sample: Optional[PowerSample] = None
        self._prev_tree: Optional[ProcessTreeSnapshot] = None
        self._prev_sys: Optional[SystemUsage] = None
        self._trace: Optional[ReplayTrace] = None
        self._rapl_reader = None
        self._sensor_names: List[str] = []

        self.region_db = config.region_db or RegionDatabase.load_bundled()
        self.scc_db = config.scc_db or SccDatabase.load_bundled()
        self.region_id = config.region_override or os.environ.get(
            REGION_OVERRIDE_ENV
        )
        self.run_id = config.run_id or os.path.basename(
            os.path.abspath(config.log_dir)
        )
        self.log_path = os.path.join(config.log_dir, LOG_FILENAME)

    # -- lifecycle -------------------------------------------------------

    def launch(self) -> "Monitor":
        try:
            os.makedirs(self.config.log_dir, exist_ok=True)
            probe = os.path.join(self.config.log_dir, ".write_probe")
            with open(probe, "w") as f:
                f.write("")
            os.remove(probe)
        except OSError as e:
            raise LaunchFailure("log dir not writable: %s" % e) from e

        system = SystemInfo(
            platform=sys.platform, backend=self.config.sensor_backend
        )
        compatible = list_compatible_sensors(system, build_default_router())
        self._sensor_names = [d.name for d in compatible]

        if self.config.sensor_backend == "replay":
            spec = self.config.replay_trace
            if spec is not None:
                self._trace = ReplayTrace(spec, root_pid=self.root_pid)
            else:
                self._trace = ReplayTrace.from_file(
                    self.config.replay_trace_path, root_pid=self.root_pid
                )
            start_time = self._trace.start_time
        else:
            start_time = time.time()
            if "cpu_dram_energy" in self._sensor_names:
                self._rapl_reader = rapl.RaplReader(system.powercap_root)
        self._system = system
        self._last_t = start_time

        header = LogHeader(
            schema_version=SCHEMA_VERSION,
            tool_version=__version__,
            start_time=start_time,
            hardware_manifest=self._hardware_manifest(),
            environment_manifest=self._environment_manifest(),
            region_hint=self.region_id,
            pue=self.config.pue,
        )
        self.start_time = start_time
        append_record(
            self.log_path,
            LogRecord(kind="header", timestamp=start_time,
                      payload=header.to_payload()),
        )

        if self.region_id:
            try:
                region = self.region_db.get(self.region_id)
                self.series = IntensitySeries(region_id=region.id)
            except NoRegion:
                self.series = None

        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()
        return self

    def _hardware_manifest(self):
        manifest = [("sensor", n) for n in self._sensor_names]
        if self.config.sensor_backend == "system":
            model = _cpu_model()
            if model:
                manifest.append(("cpu", model))
            if "gpu" in self._sensor_names:
                try:
                    for name in gpu_sensor.query_gpu_names():
                        manifest.append(("gpu", name))
                except Exception:
                    pass
        return manifest

    def _environment_manifest(self):
        manifest = [("python", platform.python_version())]
        for pkg in _ENV_PROBE_PACKAGES:
            try:
                manifest.append((pkg, metadata.version(pkg)))
            except metadata.PackageNotFoundError:
                pass
        manifest.append(("impact-tracker", __version__))
        return manifest

    def is_alive(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    # -- sampling loop ---------------------------------------------------

    def _run(self):
        if self.config.sensor_backend == "replay":
            # a trace is finite and replays without sleeping; consuming it
            # fully keeps replay runs deterministic regardless of how fast
            # the tracked workload exits
            while not self._trace.exhausted:
                self.poll_once()
        else:
            while not self._stop.is_set():
                if self._stop.wait(self.config.poll_interval_s):
                    break
                try:
                    self.poll_once()
                except ProcessGone:
                    break

    def poll_once(self):
        """One sampler tick; all failures are logged, none escape."""
        try:
            self._poll_once_inner()
        except ProcessGone:
            raise
        except Exception as e:  # fault-tolerance contract
            self._log_exception("sampler", e)

    def _poll_once_inner(self):
        if self.config.sensor_backend == "replay":
            tick = self._trace.next()
            sample, tree, sysusage, fault = tick
            if fault:
                self._log_exception(
                    fault,
                    RuntimeError("scripted fault in sensor %r" % fault),
                    timestamp=sample.timestamp,
                )
                sample = _strip_sensor_fields(sample, fault)
        else:
            sample, tree, sysusage = self._gather_system()

        t = sample.timestamp
        self._last_t = t

        self._maybe_poll_intensity(t)

        if self._prev_sample is not None:
            try:
                shares = sample_utilization_shares(
                    self._prev_tree, tree, self._prev_sys, sysusage
                )
                interval = attribute_interval(self._prev_sample, sample, shares)
                with self._lock:
                    accumulate(self.ledger, interval)
                    self.intervals.append(interval)
            except Exception as e:
                self._log_exception("attribution", e, timestamp=t)

        payload = {
            "sys": sample.to_dict(),
            "proc": {
                str(pid): {"cpu_time_s": cpu, "rss_bytes": rss}
                for pid, (cpu, rss) in sorted(tree.members.items())
            },
        }
        append_record(
            self.log_path, LogRecord(kind="sample", timestamp=t, payload=payload)
        )

        self._prev_sample = sample
        self._prev_tree = tree
        self._prev_sys = sysusage

    def _gather_system(self):
        t = time.time()
        cpu_j = dram_j = 0.0
        if self._rapl_reader is not None:
            try:
                cpu_j, dram_j = self._rapl_reader.poll()
            except Exception as e:
                self._log_exception("cpu_dram_energy", e, timestamp=t)

        gpu_power, gpu_util, gpu_mem, gpu_pstate = [], [], [], []
        proc_util = {}
        total_sm = {}
        if "gpu" in self._sensor_names:
            try:
                devices = gpu_sensor.query_devices(self._system.smi_executable)
                gpu_power = [d.power_w for d in devices]
                gpu_util = [d.util_pct for d in devices]
                gpu_mem = [d.mem_pct for d in devices]
                gpu_pstate = [d.pstate for d in devices]
                proc_util = gpu_sensor.query_proc_util(self._system.smi_executable)
                for (_, dev), u in proc_util.items():
                    total_sm[dev] = total_sm.get(dev, 0.0) + u
            except Exception as e:
                self._log_exception("gpu", e, timestamp=t)

        tree = procs.snapshot_process_tree(
            self.root_pid, self._system.proc_root, timestamp=t
        )
        tree.gpu_proc_util = {
            k: v for k, v in proc_util.items() if k[0] in tree.members
        }
        sysusage = procs.snapshot_system_usage(
            self._system.proc_root, timestamp=t, gpu_total_sm_util=total_sm
        )
        sample = PowerSample(
            timestamp=t,
            cpu_energy_j=cpu_j,
            dram_energy_j=dram_j,
            gpu_power_w=gpu_power,
            gpu_util_pct=gpu_util,
            gpu_mem_pct=gpu_mem,
            gpu_pstate=gpu_pstate,
            cpu_freq_hz=procs.cpu_freq_hz(self._system.proc_root),
        )
        return sample, tree, sysusage

    def _maybe_poll_intensity(self, t: float):
        provider = self.config.intensity_provider
        if provider is None or self.series is None:
            return
        due = (
            self._last_intensity_poll is None
            or t - self._last_intensity_poll >= self.config.realtime_poll_interval_s
        )
        if not due:
            return
        self._last_intensity_poll = t
        try:
            record = poll_realtime_intensity(provider, self.series.region_id, t)
            self.series.add(record.timestamp, record.g_per_kwh)
            append_record(
                self.log_path,
                LogRecord(
                    kind="intensity",
                    timestamp=t,
                    payload={
                        "region_id": record.region_id,
                        "g_per_kwh": record.g_per_kwh,
                        "kind": record.kind,
                    },
                ),
            )
        except ProviderUnavailable as e:
            self._log_exception("realtime_intensity", e, timestamp=t)

    def _log_exception(self, source: str, exc: Exception, timestamp=None):
        t = timestamp if timestamp is not None else self._last_t
        report = {
            "source": source,
            "error": "%s: %s" % (type(exc).__name__, exc),
        }
        self.exceptions.put(report)
        try:
            append_record(
                self.log_path,
                LogRecord(kind="exception", timestamp=t, payload=report),
            )
        except Exception:
            pass  # never let logging trouble reach the workload

    # -- exit ------------------------------------------------------------

    def check_for_exceptions(self) -> Optional[dict]:
        try:
            return self.exceptions.get_nowait()
        except queue.Empty:
            return None

    def shutdown(self) -> ImpactSummary:
        """Stop sampling, compute emissions, finalize the log. Idempotent."""
        if self._summary is not None:
            return self._summary
        self._stop.set()
        if self._thread is not None:
            self._thread.join()

        end_time = (
            self._last_t
            if self.config.sensor_backend == "replay"
            else time.time()
        )
        carbon = self._compute_carbon()
        self._summary = summarize(
            self.ledger, carbon, end_time - self.start_time, self.run_id
        )
        try:
            finalize(self.log_path, end_time, self._summary)
        except Exception as e:
            self._log_exception("finalize", e, timestamp=end_time)
        return self._summary

    def _compute_carbon(self) -> CarbonResult:
        region_id = self.region_id
        if region_id is None and not self.config.offline:
            try:
                located = geolocate(provider=self.config.geolocation_provider)
                if isinstance(located, str):
                    region_id = located
                else:
                    region_id = self.region_db.resolve(located).id
            except (GeolocationUnavailable, NoRegion):
                region_id = None
        if region_id is None:
            return CarbonResult(
                kg_co2eq=None, scc_usd=None, country=None, region_id=None
            )
        try:
            region = self.region_db.get(region_id)
        except NoRegion:
            return CarbonResult(
                kg_co2eq=None, scc_usd=None, country=None, region_id=region_id
            )
        kg = integrate_time_varying_emissions(
            self.intervals,
            self.series,
            region.avg_intensity_g_per_kwh,
            pue=self.config.pue,
        )
        scc = None
        try:
            from .carbon import social_cost

            scc = social_cost(kg, self.scc_db.get(region.country))
        except UnknownCountry:
            pass
        return CarbonResult(
            kg_co2eq=kg, scc_usd=scc, country=region.country, region_id=region.id
        )


def _strip_sensor_fields(sample: PowerSample, sensor: str) -> PowerSample:
    """Drop the fields owned by a failed sensor; the rest of the tick survives."""
    if sensor == "gpu":
        return PowerSample(
            timestamp=sample.timestamp,
            cpu_energy_j=sample.cpu_energy_j,
            dram_energy_j=sample.dram_energy_j,
            cpu_freq_hz=sample.cpu_freq_hz,
            disk_write_bps=sample.disk_write_bps,
        )
    if sensor in ("cpu", "cpu_dram_energy"):
        return PowerSample(
            timestamp=sample.timestamp,
            gpu_power_w=sample.gpu_power_w,
            gpu_util_pct=sample.gpu_util_pct,
            gpu_mem_pct=sample.gpu_mem_pct,
            gpu_pstate=sample.gpu_pstate,
            cpu_freq_hz=sample.cpu_freq_hz,
            disk_write_bps=sample.disk_write_bps,
        )
    return sample


def _cpu_model() -> Optional[str]:
    try:
        with open("/proc/cpuinfo") as f:
            for line in f:
                if line.lower().startswith("model name"):
                    return line.split(":", 1)[1].strip()
    except OSError:
        pass
    return None


def launch_monitor(config: MonitorConfig, root_pid: int) -> Monitor:
    return Monitor(config, root_pid).launch()


def check_for_exceptions(handle: Monitor) -> Optional[dict]:
    return handle.check_for_exceptions()


def shutdown(handle: Monitor) -> ImpactSummary:
    return handle.shutdown()
