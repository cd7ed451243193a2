"""Device-facing ingestion operations.

Every operation except registration authenticates the caller with the
stateless signature scheme from ``wire`` before touching any store.
Incoming scan records are also evaluated against the crowding-alert rule
so a device learns about dense minutes on its next notification poll.
"""

from __future__ import annotations

import json
import logging

from .. import crypto, wire
from ..clock import Clock
from ..config import PlatformConfig
from ..errors import AuthError, ValidationError
from ..identity import IdentityService, Registration
from . import geohash
from .records import Alert, GpsPoint, LivelinessReport
from .stores import AlertQueue, GpsStore, LivelinessStore, SegmentLog

logger = logging.getLogger(__name__)


class IngestService:
    def __init__(self, config: PlatformConfig, clock: Clock,
                 identity: IdentityService, segment_log: SegmentLog,
                 gps_store: GpsStore, liveliness_store: LivelinessStore,
                 alert_queue: AlertQueue):
        self.config = config
        self.clock = clock
        self.identity = identity
        self.segment_log = segment_log
        self.gps_store = gps_store
        self.liveliness_store = liveliness_store
        self.alert_queue = alert_queue
        # device_id -> scan epoch of the last crowding alert
        self._crowding_cooldown: dict[str, int] = {}

    # -- auth ------------------------------------------------------------

    def authenticate(self, request: wire.SignedRequest) -> None:
        wire.verify_request(request, self.clock.now(), self.config.auth_salt,
                            self.config.freshness_window_s)
        if not self.identity.is_registered_device(str(request.device_id)):
            raise AuthError("bad-signature")

    # -- operations --------------------------------------------------------

    def register(self, invite_code: str, phone: str | None = None,
                 make_model: str = "", source: str = "default") -> Registration:
        return self.identity.register_device(
            invite_code, phone=phone, make_model=make_model, source=source)

    def add_contacts(self, request: wire.SignedRequest, body: bytes) -> dict:
        self.authenticate(request)
        batch = wire.decode_contact_batch(body)  # reject malformed uploads
        if batch.source_device_id != request.device_id:
            raise ValidationError(
                "batch source device id does not match authenticated device")
        received_at = self.clock.now()
        self.segment_log.append(body, str(request.device_id), received_at)
        for record in batch.records:
            self._check_crowding(str(request.device_id), record, received_at)
        return {"accepted": True, "bytes": len(body),
                "records": len(batch.records)}

    def add_gps(self, request: wire.SignedRequest, lat: float, lon: float,
                ts: int | None = None) -> dict:
        self.authenticate(request)
        if not self.config.public_key_pem:
            raise ValidationError(
                "no public key configured; GPS ingestion disabled")
        cell = geohash.encode(lat, lon)  # validates ranges
        encrypted = crypto.encrypt_field(
            self.config.public_key_pem,
            json.dumps([lat, lon]).encode("utf-8"))
        point = GpsPoint(
            device_id=str(request.device_id),
            ts=int(ts) if ts is not None else self.clock.now(),
            geohash=cell, encrypted_coords=encrypted)
        self.gps_store.add(point)
        return {"accepted": True, "geohash": cell}

    def add_liveliness(self, request: wire.SignedRequest, stats: dict,
                       ts: int | None = None) -> dict:
        self.authenticate(request)
        if not isinstance(stats, dict):
            raise ValidationError("stats must be an object")
        ts = int(ts) if ts is not None else self.clock.now()
        hour_start = ts // 3600 * 3600
        self.liveliness_store.upsert(LivelinessReport(
            device_id=str(request.device_id), hour_start=hour_start,
            stats=stats, received_at=self.clock.now()))
        return {"accepted": True, "hour_start": hour_start}

    def poll_notifications(self, request: wire.SignedRequest) -> list[dict]:
        self.authenticate(request)
        alerts = self.alert_queue.deliver_pending(
            str(request.device_id), self.clock.now())
        return [a.to_dict() for a in alerts]

    def analytics_manifest(self, request: wire.SignedRequest) -> dict:
        self.authenticate(request)
        return {"endpoints": list(self.config.analytics_endpoints)}

    # -- crowding alerts ---------------------------------------------------

    def _check_crowding(self, device_id: str, record: wire.ScanRecord,
                        received_at: int) -> None:
        from ..analytics import proximity_alert  # local import: avoid cycle

        alert = proximity_alert(
            device_id=device_id,
            scan_contacts=[(str(c.device_id), c.rssi) for c in record.contacts],
            scan_epoch=record.epoch,
            delta=self.config.rssi_threshold,
            trigger_count=self.config.proximity_trigger_count,
            privacy_floor=self.config.proximity_privacy_floor,
            cooldown_s=self.config.proximity_cooldown_s,
            cooldown_state=self._crowding_cooldown,
            now=received_at)
        if alert is not None:
            self.alert_queue.enqueue(alert)
