"""Plain record types shared by the stores, analytics, and the graph."""

from __future__ import annotations

import uuid
from dataclasses import asdict, dataclass, field


@dataclass(frozen=True, order=True)
class EdgeRow:
    """One sighting: at minute-resolution timestamp ``ts``, device ``src``
    observed ``sink`` at signal strength ``rssi`` dBm."""

    ts: int
    src: str
    sink: str
    rssi: int


@dataclass(frozen=True)
class GpsPoint:
    device_id: str
    ts: int
    geohash: str
    encrypted_coords: str  # base64 RSA-OAEP of the exact [lat, lon]


@dataclass(frozen=True)
class LivelinessReport:
    device_id: str
    hour_start: int
    stats: dict
    received_at: int


@dataclass
class Alert:
    device_id: str
    title: str
    content: str
    alert_type: str
    valid_from: int
    valid_to: int
    payload: dict = field(default_factory=dict)
    alert_id: str = field(default_factory=lambda: uuid.uuid4().hex)

    def to_dict(self) -> dict:
        return asdict(self)
