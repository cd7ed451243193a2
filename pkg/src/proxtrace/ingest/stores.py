"""Append-only persistence for raw telemetry.

Contact uploads land verbatim in time-bucketed segment files with a
sidecar index framing each entry; everything else is JSON lines. Closed
segment bytes are never rewritten; corrections happen downstream during
edge extraction.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from ..errors import ValidationError
from .records import Alert, EdgeRow, GpsPoint, LivelinessReport


@dataclass(frozen=True)
class SegmentEntry:
    offset: int
    length: int
    device_id: str
    received_at: int


class SegmentLog:
    """Raw upload log rolled into fixed windows of ``segment_seconds``.

    ``segment-<start>.bin`` holds the concatenated upload bodies for
    receive times in ``[start, start + segment_seconds)``; the matching
    ``.idx`` sidecar frames them (offset, length, uploader, receive time),
    one JSON line per entry, appended in lockstep.
    """

    def __init__(self, directory: Path, segment_seconds: int = 7200):
        if segment_seconds <= 0:
            raise ValidationError("segment_seconds must be positive")
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.archive_dir = self.directory / "archive"
        self.segment_seconds = segment_seconds
        self._lock = threading.Lock()

    def segment_start(self, epoch: int) -> int:
        return epoch // self.segment_seconds * self.segment_seconds

    def _bin_path(self, start: int) -> Path:
        return self.directory / f"segment-{start:012d}.bin"

    def append(self, body: bytes, device_id: str, received_at: int) -> Path:
        start = self.segment_start(received_at)
        bin_path = self._bin_path(start)
        with self._lock:
            offset = bin_path.stat().st_size if bin_path.exists() else 0
            with bin_path.open("ab") as fh:
                fh.write(body)
            entry = {"offset": offset, "length": len(body),
                     "device_id": device_id, "received_at": received_at}
            with bin_path.with_suffix(".idx").open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry) + "\n")
        return bin_path

    def segments(self, now: int | None = None,
                 closed_only: bool = False) -> list[Path]:
        paths = sorted(self.directory.glob("segment-*.bin"))
        if closed_only and now is not None:
            horizon = self.segment_start(now)
            paths = [p for p in paths
                     if self.window_of(p)[0] < horizon]
        return paths

    def window_of(self, bin_path: Path) -> tuple[int, int]:
        start = int(bin_path.stem.split("-")[1])
        return start, start + self.segment_seconds

    def entries(self, bin_path: Path) -> Iterator[tuple[SegmentEntry, bytes]]:
        idx_path = bin_path.with_suffix(".idx")
        if not idx_path.exists():
            raise ValidationError(f"missing index sidecar for {bin_path.name}")
        data = bin_path.read_bytes()
        for line in idx_path.read_text(encoding="utf-8").splitlines():
            row = json.loads(line)
            entry = SegmentEntry(**row)
            yield entry, data[entry.offset:entry.offset + entry.length]

    def archive(self, bin_path: Path) -> None:
        self.archive_dir.mkdir(exist_ok=True)
        for path in (bin_path, bin_path.with_suffix(".idx")):
            if path.exists():
                path.rename(self.archive_dir / path.name)

    def is_archived(self, bin_path: Path) -> bool:
        return (self.archive_dir / bin_path.name).exists()


class EdgeStore:
    """Extracted sighting rows as CSV, one file per processed window."""

    HEADER = "ts,src,sink,rssi"

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def csv_path(self, t_start: int, t_end: int) -> Path:
        return self.directory / f"edges-{t_start:012d}-{t_end:012d}.csv"

    def write_window(self, rows: list[EdgeRow], t_start: int,
                     t_end: int) -> Path:
        path = self.csv_path(t_start, t_end)
        tmp = path.with_suffix(".tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            fh.write(self.HEADER + "\n")
            for row in rows:
                fh.write(f"{row.ts},{row.src},{row.sink},{row.rssi}\n")
        tmp.replace(path)
        return path

    def files(self) -> list[Path]:
        return sorted(self.directory.glob("edges-*.csv"))

    def rows_in(self, t_start: int, t_end: int) -> list[EdgeRow]:
        rows: list[EdgeRow] = []
        for path in self.files():
            file_start, file_end = self._window_of(path)
            if file_end <= t_start or file_start >= t_end:
                continue
            rows.extend(r for r in read_edge_csv(path)
                        if t_start <= r.ts < t_end)
        rows.sort()
        return rows

    @staticmethod
    def _window_of(path: Path) -> tuple[int, int]:
        _, start, end = path.stem.split("-")
        return int(start), int(end)


def read_edge_csv(path: Path) -> Iterator[EdgeRow]:
    with Path(path).open(encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != EdgeStore.HEADER:
            raise ValidationError(f"unexpected edge CSV header in {path}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            ts, src, sink, rssi = line.split(",")
            yield EdgeRow(ts=int(ts), src=src, sink=sink, rssi=int(rssi))


class _JsonlStore:
    """Shared append-and-replay base for the small JSONL stores."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                self._replay(json.loads(line))

    def _replay(self, row: dict) -> None:
        raise NotImplementedError

    def _append(self, row: dict) -> None:
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


class GpsStore(_JsonlStore):
    def __init__(self, path: Path):
        self.points: list[GpsPoint] = []
        super().__init__(path)

    def _replay(self, row: dict) -> None:
        self.points.append(GpsPoint(**row))

    def add(self, point: GpsPoint) -> None:
        with self._lock:
            self.points.append(point)
            self._append(point.__dict__)

    def points_in(self, t_start: int, t_end: int) -> list[GpsPoint]:
        return [p for p in self.points if t_start <= p.ts < t_end]

    def last_for(self, device_id: str) -> GpsPoint | None:
        latest = None
        for point in self.points:
            if point.device_id == device_id:
                if latest is None or point.ts >= latest.ts:
                    latest = point
        return latest


class LivelinessStore(_JsonlStore):
    """Hourly device health reports; one live row per (device, hour)."""

    def __init__(self, path: Path):
        self.reports: dict[tuple[str, int], LivelinessReport] = {}
        super().__init__(path)

    def _replay(self, row: dict) -> None:
        report = LivelinessReport(**row)
        self.reports[(report.device_id, report.hour_start)] = report

    def upsert(self, report: LivelinessReport) -> None:
        if report.hour_start % 3600 != 0:
            raise ValidationError("hour_start must be hour-aligned")
        with self._lock:
            self.reports[(report.device_id, report.hour_start)] = report
            self._append(report.__dict__)

    def get(self, device_id: str, hour_start: int) -> LivelinessReport | None:
        return self.reports.get((device_id, hour_start))

    def hourly_summary(self, hours: int, now: int) -> list[dict]:
        """Fleet-wide sums for the trailing ``hours`` hour buckets."""
        last_hour = now // 3600 * 3600
        out = []
        for i in range(hours - 1, -1, -1):
            hour = last_hour - i * 3600
            bucket = {"hour_start": hour, "devices_reporting": 0,
                      "scans_performed": 0, "scans_failed": 0,
                      "gps_scans": 0}
            for (_, h), report in self.reports.items():
                if h != hour:
                    continue
                bucket["devices_reporting"] += 1
                stats = report.stats
                bucket["scans_performed"] += int(stats.get("scans_performed", 0))
                bucket["scans_failed"] += int(stats.get("scans_failed", 0))
                bucket["gps_scans"] += int(stats.get("gps_scans", 0))
            out.append(bucket)
        return out

    def scans_for_day(self, device_id: str, day_start: int) -> int:
        total = 0
        for hour in range(day_start, day_start + 86400, 3600):
            report = self.reports.get((device_id, hour))
            if report is not None:
                total += int(report.stats.get("scans_performed", 0))
        return total


class AlertQueue(_JsonlStore):
    """Pending notifications, each delivered at most once.

    The journal holds enqueue events and delivery marks; replaying both
    restores the queue after a restart.
    """

    def __init__(self, path: Path):
        self.alerts: dict[str, Alert] = {}
        self.delivered: set[str] = set()
        super().__init__(path)

    def _replay(self, row: dict) -> None:
        if row.get("event") == "delivered":
            self.delivered.add(row["alert_id"])
        else:
            alert = Alert(**{k: v for k, v in row.items() if k != "event"})
            self.alerts[alert.alert_id] = alert

    def enqueue(self, alert: Alert) -> str:
        with self._lock:
            self.alerts[alert.alert_id] = alert
            self._append({"event": "enqueued", **alert.to_dict()})
        return alert.alert_id

    def deliver_pending(self, device_id: str, now: int) -> list[Alert]:
        """Returns undelivered alerts whose validity window contains now,
        marking them delivered."""
        out = []
        with self._lock:
            for alert in self.alerts.values():
                if (alert.device_id == device_id
                        and alert.alert_id not in self.delivered
                        and alert.valid_from <= now < alert.valid_to):
                    self.delivered.add(alert.alert_id)
                    self._append({"event": "delivered",
                                  "alert_id": alert.alert_id})
                    out.append(alert)
        out.sort(key=lambda a: (a.valid_from, a.alert_id))
        return out

    def pending_count(self, device_id: str, now: int) -> int:
        return sum(1 for a in self.alerts.values()
                   if a.device_id == device_id
                   and a.alert_id not in self.delivered
                   and a.valid_from <= now < a.valid_to)
