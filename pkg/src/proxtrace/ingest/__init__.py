"""Telemetry ingestion: authenticated endpoints over append-only stores."""

from .records import Alert, EdgeRow, GpsPoint, LivelinessReport
from .service import IngestService

__all__ = ["Alert", "EdgeRow", "GpsPoint", "LivelinessReport", "IngestService"]
