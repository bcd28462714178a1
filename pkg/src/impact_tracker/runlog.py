"""Append-only line-delimited run log.

One JSON record per line. The first record is always a header; an optional
final record closes the run. Interior corruption is a hard error, but a
truncated trailing line (crash artifact) is tolerated so accounting can be
recreated from whatever was written before the crash.
"""

import json
import os
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

from .errors import IoFailure, MonotonicityViolation, NoHeader, ParseFailure
from .summary import ImpactSummary

RECORD_KINDS = ("header", "sample", "intensity", "exception", "final")


@dataclass
class LogHeader:
    schema_version: str
    tool_version: str
    start_time: float
    hardware_manifest: List[Tuple[str, str]] = field(default_factory=list)
    environment_manifest: List[Tuple[str, str]] = field(default_factory=list)
    region_hint: Optional[str] = None
    pue: float = 1.0

    def __post_init__(self):
        if not self.schema_version or not self.tool_version:
            raise ValueError("schema_version and tool_version must be non-empty")
        if self.start_time <= 0:
            raise ValueError("start_time must be positive")
        if self.pue < 1.0:
            raise ValueError("pue must be >= 1.0")

    def to_payload(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "start_time": self.start_time,
            "hardware": [list(h) for h in self.hardware_manifest],
            "environment": [list(e) for e in self.environment_manifest],
            "region_hint": self.region_hint,
            "pue": self.pue,
        }

    @classmethod
    def from_payload(cls, p: dict) -> "LogHeader":
        return cls(
            schema_version=p["schema_version"],
            tool_version=p["tool_version"],
            start_time=p["start_time"],
            hardware_manifest=[tuple(h) for h in p.get("hardware", [])],
            environment_manifest=[tuple(e) for e in p.get("environment", [])],
            region_hint=p.get("region_hint"),
            pue=p.get("pue", 1.0),
        )


@dataclass
class LogRecord:
    kind: str
    timestamp: float
    payload: dict

    def __post_init__(self):
        if self.kind not in RECORD_KINDS:
            raise ValueError("unknown record kind: %r" % (self.kind,))


class ReadResult(NamedTuple):
    records: List[LogRecord]
    warnings: int


def _encode(record: LogRecord) -> str:
    return json.dumps(
        {"kind": record.kind, "t": record.timestamp, "payload": record.payload},
        sort_keys=True,
    )


def _decode(line: str) -> LogRecord:
    obj = json.loads(line)
    return LogRecord(kind=obj["kind"], timestamp=obj["t"], payload=obj["payload"])


def _tail_record(log_path) -> Optional[LogRecord]:
    """Last complete record in the file, or None if the file is empty."""
    try:
        size = os.path.getsize(log_path)
    except OSError:
        return None
    if size == 0:
        return None
    with open(log_path, "rb") as f:
        f.seek(max(0, size - 65536))
        chunk = f.read().decode("utf-8", errors="replace")
    lines = [ln for ln in chunk.split("\n") if ln.strip()]
    for ln in reversed(lines):
        try:
            return _decode(ln)
        except (json.JSONDecodeError, KeyError):
            continue
    return None


def append_record(log_path, record: LogRecord) -> None:
    """Append one record as a single complete line.

    The line is written in one call so a reader never observes a partial
    record except after a crash mid-write, which read_records tolerates.
    """
    last = _tail_record(log_path)
    if last is None:
        if record.kind != "header":
            raise NoHeader("first record in a log must be a header")
    else:
        if record.kind == "header":
            raise ParseFailure("log already has a header")
        if last.kind == "final":
            raise IoFailure("log already finalized")
        if record.timestamp < last.timestamp:
            raise MonotonicityViolation(
                "record timestamp %r precedes last logged timestamp %r"
                % (record.timestamp, last.timestamp)
            )
    try:
        with open(log_path, "a", encoding="utf-8") as f:
            f.write(_encode(record) + "\n")
            f.flush()
    except OSError as e:
        raise IoFailure(str(e)) from e


def read_records(log_path) -> ReadResult:
    """Read every complete record; a truncated trailing line is skipped.

    Returns (records, warnings) where warnings counts skipped trailing lines.
    Malformed interior lines raise ParseFailure with the line number.
    """
    try:
        with open(log_path, "r", encoding="utf-8") as f:
            raw = f.read()
    except OSError as e:
        raise IoFailure(str(e)) from e
    lines = raw.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    records: List[LogRecord] = []
    warnings = 0
    for i, line in enumerate(lines):
        try:
            records.append(_decode(line))
        except (json.JSONDecodeError, KeyError, ValueError) as e:
            if i == len(lines) - 1:
                warnings += 1
            else:
                raise ParseFailure(
                    "malformed record at line %d: %s" % (i + 1, e), line_number=i + 1
                ) from e
    if not records or records[0].kind != "header":
        raise NoHeader("log does not begin with a header record")
    return ReadResult(records, warnings)


def read_header(log_path) -> LogHeader:
    records, _ = read_records(log_path)
    return LogHeader.from_payload(records[0].payload)


def finalize(log_path, end_time: float, summary: ImpactSummary) -> bool:
    """Append the closing record. Returns False (with no write) if already final."""
    last = _tail_record(log_path)
    if last is None:
        raise NoHeader("cannot finalize a log with no header")
    if last.kind == "final":
        return False
    record = LogRecord(
        kind="final",
        timestamp=end_time,
        payload={"end_time": end_time, "summary": summary.to_dict()},
    )
    append_record(log_path, record)
    return True
