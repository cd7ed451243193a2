"""Composition root: one data directory, all services wired together."""

from __future__ import annotations

import logging
import random
from pathlib import Path

from . import analytics
from .clock import Clock, SystemClock
from .config import PlatformConfig, load_config
from .identity import IdentityService
from .ingest import geohash
from .ingest.preprocess import ExtractionReport, extract_edges
from .ingest.records import Alert
from .ingest.service import IngestService
from .ingest.stores import (AlertQueue, EdgeStore, GpsStore, LivelinessStore,
                            SegmentLog)
from .tempgraph import IntervalGraph, build_interval_graph
from .tracing import TracingService

logger = logging.getLogger(__name__)

HOUR = 3600
DAY = 86400


class Platform:
    def __init__(self, config: PlatformConfig, clock: Clock | None = None,
                 id_rng: random.Random | None = None):
        self.config = config
        self.clock = clock if clock is not None else SystemClock()
        data_dir = Path(config.data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)
        self.identity = IdentityService(config, self.clock, rng=id_rng)
        self.segment_log = SegmentLog(data_dir / "segments",
                                      config.segment_seconds)
        self.edge_store = EdgeStore(data_dir / "edges")
        self.gps_store = GpsStore(data_dir / "gps.jsonl")
        self.liveliness_store = LivelinessStore(data_dir / "liveliness.jsonl")
        self.alert_queue = AlertQueue(data_dir / "alerts.jsonl")
        self.ingest = IngestService(
            config, self.clock, self.identity, self.segment_log,
            self.gps_store, self.liveliness_store, self.alert_queue)
        self.tracing = TracingService(
            config, self.clock, self.identity, self.build_graph)
        self.demo_summary: dict | None = None

    @classmethod
    def from_config_file(cls, path: str | Path,
                         clock: Clock | None = None) -> "Platform":
        return cls(load_config(path), clock=clock)

    # -- pipeline ----------------------------------------------------------

    def run_preprocessing(self, include_open: bool = False
                          ) -> list[ExtractionReport]:
        """Extracts edges from raw segments, one CSV per segment window.

        Closed segments are archived after extraction. Open segments are
        only touched when ``include_open`` is set and stay in place; a
        later pass rewrites their window's CSV with the fuller content,
        which is safe because extraction is deterministic over segment
        bytes.
        """
        now = self.clock.now()
        reports = []
        for bin_path in self.segment_log.segments(now=now, closed_only=True):
            reports.append(self._extract_segment(bin_path, archive=True))
        if include_open:
            # whatever was not archived above is still open
            for bin_path in self.segment_log.segments():
                reports.append(self._extract_segment(bin_path, archive=False))
        return reports

    def _extract_segment(self, bin_path: Path,
                         archive: bool) -> ExtractionReport:
        t_start, t_end = self.segment_log.window_of(bin_path)
        report = extract_edges(self.segment_log, [bin_path],
                               t_start, t_end, self.edge_store)
        if archive:
            self.segment_log.archive(bin_path)
        logger.info("extracted %s rows from %s (%s entries skipped)",
                    report.rows_written, bin_path.name, report.entries_skipped)
        return report

    def build_graph(self, t_start: int, t_end: int) -> IntervalGraph:
        rows = self.edge_store.rows_in(t_start, t_end)
        return build_interval_graph(rows, t_start, t_end)

    # -- scheduled jobs ------------------------------------------------------

    def run_daily_jobs(self, day_end: int | None = None) -> dict:
        """Computes per-device distancing scores and scan-coverage nudges
        for the trailing day and queues them as notifications."""
        now = self.clock.now() if day_end is None else day_end
        t_end = now // HOUR * HOUR
        t_start = t_end - DAY
        graph = self.build_graph(t_start, t_end)
        params = analytics.ScoreParams(
            delta=self.config.rssi_threshold,
            min_minutes=self.config.min_contact_minutes,
            background_minutes=self.config.background_minutes)
        summary = {"window": [t_start, t_end], "scores": {}, "alerts": 0}
        for identity in self.identity.all_identities():
            device_id = identity.current_device.device_id
            result = analytics.social_distancing_score(graph, device_id, params)
            summary["scores"][device_id] = result.score
            self.alert_queue.enqueue(Alert(
                device_id=device_id,
                title="Your distancing score",
                content=(f"Score {result.score} of 10 for the last day; "
                         "higher is better."),
                alert_type="distancing-score",
                valid_from=now, valid_to=now + DAY,
                payload={"score": result.score,
                         "proximate_count": result.proximate_count,
                         "window": [t_start, t_end]}))
            summary["alerts"] += 1
            scans = self.liveliness_store.scans_for_day(device_id, t_start)
            progress = analytics.scan_progress(
                scans, target=self.config.scan_target_per_day)
            if not progress["target_reached"]:
                self.alert_queue.enqueue(Alert(
                    device_id=device_id,
                    title="Keep scans running",
                    content=(f"{progress['scans_today']} scans recorded "
                             f"toward a target of {progress['target']}."),
                    alert_type="scan-progress",
                    valid_from=now, valid_to=now + DAY,
                    payload=progress))
                summary["alerts"] += 1
        return summary

    # -- analytics views -----------------------------------------------------

    def _day_graph(self) -> IntervalGraph:
        t_end = self.clock.now() // HOUR * HOUR + HOUR
        return self.build_graph(t_end - 2 * DAY, t_end)

    def contact_buckets_for(self, device_id: str) -> list[dict]:
        graph = self._day_graph()
        rows = analytics.hourly_contact_buckets(graph, device_id,
                                                self.clock.now())
        return [row.__dict__ for row in rows]

    def neighbourhood_tree_for(self, device_id: str) -> dict:
        return analytics.neighbourhood_tree(self._day_graph(),
                                            device_id).to_dict()

    def heatmap_for(self, device_id: str) -> dict:
        now = self.clock.now()
        window = (now - DAY, now + 1)
        last = self.gps_store.last_for(device_id)
        if last is None:
            return {"tiles": [], "center": None}
        center_lat, center_lon = geohash.cell_center(last.geohash)
        tiles = analytics.density_heatmap(
            self.gps_store.points_in(*window), center_lat, center_lon,
            area_m=self.config.heatmap_area_m)
        return {"tiles": [t.__dict__ for t in tiles],
                "center": last.geohash}
