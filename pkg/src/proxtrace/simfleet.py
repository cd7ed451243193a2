"""Agent-based simulation of a device fleet feeding the platform.

Devices move along piecewise-constant trajectories on a flat metre grid,
scan for each other once per simulated minute, and talk to the backend
with the production client behavior: 15-minute signed contact uploads,
5-minute GPS samples, hourly liveliness reports, and buffered retries
when the simulated network drops an attempt. Stationary beacons
advertise template device ids and never upload anything.

Signal strength follows a log-distance path-loss model:

    rssi = round(a1m - 10 * path_loss_exp * log10(distance_m) + noise)

with Gaussian noise. The default parameters are fitted so that over
many samples roughly 23% of readings at 1 m, 54% at 2 m, and 84% at
4 m fall at or below -75 dBm, matching what a real mixed-phone campaign
produces at those distances.

Every random draw comes from one per-device generator seeded from
(scenario seed, device name), so a scenario replays byte-identically
when the backend assigns ids deterministically too (see the ``rng``
parameter of the identity service).
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import time
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Protocol

import httpx

from . import wire
from .clock import ManualClock
from .errors import ValidationError
from .ingest.service import IngestService

MINUTE = 60


class GatewayError(Exception):
    """Backend rejected an otherwise delivered request."""


@dataclass
class RssiModel:
    a1m: float = -66.8           # mean RSSI at one metre
    path_loss_exp: float = 2.88
    sigma: float = 10.0
    cutoff_m: float = 30.0       # beyond this nothing is heard

    def sample(self, distance_m: float, rng: random.Random) -> int | None:
        if distance_m <= 0:
            raise ValidationError("distance must be positive")
        if distance_m > self.cutoff_m:
            return None
        distance_m = max(distance_m, 0.1)
        mean = self.a1m - 10.0 * self.path_loss_exp * math.log10(distance_m)
        noise = rng.gauss(0.0, self.sigma) if self.sigma > 0 else 0.0
        value = round(mean + noise)
        return max(-128, min(127, value))


@dataclass
class DeviceSpec:
    name: str
    phone: str = ""
    make_model: str = "SimPhone A1"
    # (minute, x, y) waypoints; the device sits at a waypoint's position
    # until the next waypoint's minute
    trajectory: list[tuple[float, float, float]] = field(
        default_factory=lambda: [(0, 0.0, 0.0)])
    # half-open [start_minute, end_minute) windows; None means always on
    bluetooth_windows: list[tuple[int, int]] | None = None
    gps_enabled: bool = True
    reliability: float = 1.0     # per network attempt success probability
    ios_background: bool = False  # scans but never advertises
    rssi_bias: int = 0
    scan_fail_prob: float = 0.0

    def bluetooth_on(self, minute: int) -> bool:
        if self.bluetooth_windows is None:
            return True
        return any(start <= minute < end
                   for start, end in self.bluetooth_windows)

    def position(self, minute: int) -> tuple[float, float]:
        x, y = self.trajectory[0][1], self.trajectory[0][2]
        for wp_minute, wp_x, wp_y in self.trajectory:
            if wp_minute > minute:
                break
            x, y = wp_x, wp_y
        return x, y


@dataclass
class BeaconSpec:
    major: int
    minor: int
    x: float
    y: float

    @property
    def device_id(self) -> uuid.UUID:
        return wire.beacon_device_id(self.major, self.minor)


@dataclass
class ScenarioConfig:
    start_epoch: int
    duration_minutes: int
    seed: int = 0
    origin_lat: float = 13.0215
    origin_lon: float = 77.5670
    rssi_model: RssiModel = field(default_factory=RssiModel)
    devices: list[DeviceSpec] = field(default_factory=list)
    beacons: list[BeaconSpec] = field(default_factory=list)
    upload_every_min: int = 15
    gps_every_min: int = 5
    liveliness_every_min: int = 60
    source: str = "simfleet"
    max_flush_attempts: int = 200

    def __post_init__(self):
        if self.start_epoch % 3600:
            raise ValidationError("start_epoch must be hour-aligned")
        if self.duration_minutes < 1:
            raise ValidationError("duration_minutes must be positive")
        names = [d.name for d in self.devices]
        if len(names) != len(set(names)):
            raise ValidationError("device names must be unique")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, payload: dict) -> "ScenarioConfig":
        payload = dict(payload)
        payload["rssi_model"] = RssiModel(**payload.get("rssi_model", {}))
        payload["devices"] = [
            DeviceSpec(**{**d,
                          "trajectory": [tuple(w) for w in d["trajectory"]],
                          "bluetooth_windows": (
                              None if d.get("bluetooth_windows") is None
                              else [tuple(w) for w in d["bluetooth_windows"]])})
            for d in payload.get("devices", [])]
        payload["beacons"] = [BeaconSpec(**b) for b in payload.get("beacons", [])]
        return cls(**payload)

    @classmethod
    def load(cls, path: Path | str) -> "ScenarioConfig":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


class DeviceGateway(Protocol):
    """Transport between simulated devices and the backend."""

    def register(self, invite_code: str, phone: str, make_model: str,
                 source: str) -> dict: ...

    def add_contacts(self, device_id: str, timestamp: int, signature: str,
                     body: bytes) -> None: ...

    def add_gps(self, device_id: str, timestamp: int, signature: str,
                lat: float, lon: float, ts: int) -> None: ...

    def add_liveliness(self, device_id: str, timestamp: int, signature: str,
                       stats: dict, ts: int) -> None: ...

    def poll_notifications(self, device_id: str, timestamp: int,
                           signature: str) -> list[dict]: ...


class InProcessGateway:
    def __init__(self, service: IngestService):
        self.service = service

    @staticmethod
    def _request(device_id: str, timestamp: int,
                 signature: str) -> wire.SignedRequest:
        return wire.SignedRequest(device_id=uuid.UUID(device_id),
                                  timestamp=timestamp, signature=signature)

    def register(self, invite_code, phone, make_model, source):
        reg = self.service.register(invite_code, phone=phone or None,
                                    make_model=make_model, source=source)
        return {"device_id": reg.device_id, "device_key": reg.device_key,
                "unique_id": reg.unique_id, "pin": reg.pin,
                "invite_code": reg.invite_code}

    def add_contacts(self, device_id, timestamp, signature, body):
        self.service.add_contacts(
            self._request(device_id, timestamp, signature), body)

    def add_gps(self, device_id, timestamp, signature, lat, lon, ts):
        self.service.add_gps(
            self._request(device_id, timestamp, signature), lat, lon, ts=ts)

    def add_liveliness(self, device_id, timestamp, signature, stats, ts):
        self.service.add_liveliness(
            self._request(device_id, timestamp, signature), stats, ts=ts)

    def poll_notifications(self, device_id, timestamp, signature):
        return self.service.poll_notifications(
            self._request(device_id, timestamp, signature))


class HttpGateway:
    def __init__(self, base_url: str, client: httpx.Client | None = None):
        self.client = client or httpx.Client(base_url=base_url, timeout=30.0)

    @staticmethod
    def _headers(device_id: str, timestamp: int, signature: str) -> dict:
        return {"device-id": device_id, "timestamp": str(timestamp),
                "signature": signature}

    def _check(self, response: httpx.Response) -> httpx.Response:
        if response.status_code != 200:
            raise GatewayError(
                f"{response.request.url.path}: {response.status_code} "
                f"{response.text[:200]}")
        return response

    def register(self, invite_code, phone, make_model, source):
        response = self._check(self.client.post("/api/register", json={
            "invite_code": invite_code, "phone": phone or None,
            "make_model": make_model, "source": source}))
        return response.json()

    def add_contacts(self, device_id, timestamp, signature, body):
        self._check(self.client.post(
            "/api/add-contacts", content=body,
            headers={**self._headers(device_id, timestamp, signature),
                     "content-type": "application/octet-stream"}))

    def add_gps(self, device_id, timestamp, signature, lat, lon, ts):
        self._check(self.client.post(
            "/api/add-gps", json={"lat": lat, "lon": lon, "ts": ts},
            headers=self._headers(device_id, timestamp, signature)))

    def add_liveliness(self, device_id, timestamp, signature, stats, ts):
        self._check(self.client.post(
            "/api/add-liveliness", json={"stats": stats, "ts": ts},
            headers=self._headers(device_id, timestamp, signature)))

    def poll_notifications(self, device_id, timestamp, signature):
        response = self._check(self.client.get(
            "/api/notifications",
            headers=self._headers(device_id, timestamp, signature)))
        return response.json()


@dataclass
class DeviceReport:
    name: str
    device_id: str = ""
    unique_id: str = ""
    invite_code: str = ""
    scans_performed: int = 0
    scans_failed: int = 0
    records_created: int = 0
    contacts_observed: int = 0
    uploads_attempted: int = 0
    uploads_accepted: int = 0
    upload_digests: list[str] = field(default_factory=list)
    gps_created: int = 0
    gps_delivered: int = 0
    liveliness_created: int = 0
    liveliness_delivered: int = 0
    alerts_received: int = 0
    unsent_records: int = 0
    unsent_gps: int = 0
    unsent_liveliness: int = 0


@dataclass
class RunReport:
    start_epoch: int
    duration_minutes: int
    seed: int
    devices: dict[str, DeviceReport] = field(default_factory=dict)

    def totals(self) -> dict:
        fields_to_sum = ("scans_performed", "scans_failed", "records_created",
                         "contacts_observed", "uploads_accepted",
                         "gps_delivered", "liveliness_delivered",
                         "unsent_records")
        out = {name: 0 for name in fields_to_sum}
        for report in self.devices.values():
            for name in fields_to_sum:
                out[name] += getattr(report, name)
        return out


class _SimDevice:
    """Client-side state for one simulated handset."""

    def __init__(self, spec: DeviceSpec, index: int, scenario: ScenarioConfig):
        self.spec = spec
        self.rng = random.Random(f"{scenario.seed}:{spec.name}")
        self.phone = spec.phone or f"+1555010{index:04d}"
        self.device_id = ""
        self.device_uuid: uuid.UUID | None = None
        self.device_key = ""
        self.record_buffer: list[wire.ScanRecord] = []
        self.gps_buffer: list[tuple[float, float, int]] = []
        self.liveliness_buffer: list[tuple[dict, int]] = []
        self.report = DeviceReport(name=spec.name)
        self.hour_counters = {"scans_performed": 0, "scans_failed": 0,
                              "gps_scans": 0, "users_detected": 0,
                              "beacons_detected": 0}

    def reset_hour(self):
        for key in self.hour_counters:
            self.hour_counters[key] = 0

    def network_up(self) -> bool:
        if self.spec.reliability >= 1.0:
            return True
        return self.rng.random() < self.spec.reliability


def _grid_to_latlon(scenario: ScenarioConfig, x: float,
                    y: float) -> tuple[float, float]:
    lat = scenario.origin_lat + y / 111320.0
    lon = scenario.origin_lon + x / (
        111320.0 * math.cos(math.radians(scenario.origin_lat)))
    return lat, lon


def run_scenario(scenario: ScenarioConfig, gateway: DeviceGateway,
                 invite_codes: list[str],
                 clock: ManualClock | None = None) -> RunReport:
    """Drives the whole fleet through the scenario.

    ``invite_codes`` must provide one unused code per device. When the
    backend runs in the same process on a ManualClock, pass that clock:
    the simulation advances it along the scenario timeline so signatures
    verify and segment bucketing follows simulated time. Against a live
    HTTP backend leave it None; requests are then signed with real time
    while scan records keep their scenario epochs.
    """
    if len(invite_codes) < len(scenario.devices):
        raise ValidationError(
            f"need {len(scenario.devices)} invite codes, "
            f"got {len(invite_codes)}")
    report = RunReport(start_epoch=scenario.start_epoch,
                       duration_minutes=scenario.duration_minutes,
                       seed=scenario.seed)
    devices = [_SimDevice(spec, i, scenario)
               for i, spec in enumerate(scenario.devices)]

    def sign_now() -> int:
        return clock.now() if clock is not None else int(time.time())

    if clock is not None:
        clock.set(scenario.start_epoch)
    for device, code in zip(devices, invite_codes):
        registration = gateway.register(
            code, device.phone, device.spec.make_model, scenario.source)
        device.device_id = registration["device_id"]
        device.device_uuid = uuid.UUID(device.device_id)
        device.device_key = registration["device_key"]
        device.report.device_id = device.device_id
        device.report.unique_id = registration["unique_id"]
        device.report.invite_code = registration["invite_code"]
        report.devices[device.spec.name] = device.report

    def signed(device: _SimDevice) -> tuple[str, int, str]:
        ts = sign_now()
        return device.device_id, ts, wire.sign_request(
            device.device_uuid, ts, device.device_key)

    def try_send_contacts(device: _SimDevice) -> bool:
        device.report.uploads_attempted += 1
        body = wire.encode_contact_batch(wire.ContactBatch(
            source_device_id=device.device_uuid,
            records=tuple(device.record_buffer)))
        if not device.network_up():
            return False
        device_id, ts, signature = signed(device)
        try:
            gateway.add_contacts(device_id, ts, signature, body)
        except GatewayError:
            return False
        device.report.uploads_accepted += 1
        device.report.upload_digests.append(
            hashlib.sha256(body).hexdigest())
        device.record_buffer.clear()
        return True

    def try_send_gps(device: _SimDevice) -> bool:
        # one network availability draw covers the whole buffered batch
        if not device.gps_buffer:
            return True
        if not device.network_up():
            return False
        while device.gps_buffer:
            lat, lon, ts = device.gps_buffer[0]
            device_id, sig_ts, signature = signed(device)
            try:
                gateway.add_gps(device_id, sig_ts, signature, lat, lon, ts)
            except GatewayError:
                return False
            device.report.gps_delivered += 1
            device.gps_buffer.pop(0)
        return True

    def try_send_liveliness(device: _SimDevice) -> bool:
        if not device.liveliness_buffer:
            return True
        if not device.network_up():
            return False
        while device.liveliness_buffer:
            stats, ts = device.liveliness_buffer[0]
            device_id, sig_ts, signature = signed(device)
            try:
                gateway.add_liveliness(device_id, sig_ts, signature, stats, ts)
            except GatewayError:
                return False
            device.report.liveliness_delivered += 1
            device.liveliness_buffer.pop(0)
        return True

    for minute in range(scenario.duration_minutes):
        sim_time = scenario.start_epoch + minute * MINUTE
        if clock is not None:
            clock.set(sim_time)
        positions = {d.spec.name: d.spec.position(minute) for d in devices}
        advertising = [
            d for d in devices
            if d.spec.bluetooth_on(minute) and not d.spec.ios_background]
        for device in devices:
            if not device.spec.bluetooth_on(minute):
                continue
            if (device.spec.scan_fail_prob > 0
                    and device.rng.random() < device.spec.scan_fail_prob):
                device.report.scans_failed += 1
                device.hour_counters["scans_failed"] += 1
                continue
            own_x, own_y = positions[device.spec.name]
            contacts: list[wire.Contact] = []
            for other in advertising:
                if other is device:
                    continue
                other_x, other_y = positions[other.spec.name]
                distance = math.hypot(own_x - other_x, own_y - other_y)
                value = scenario.rssi_model.sample(
                    max(distance, 0.1), device.rng)
                if value is None:
                    continue
                value = max(-128, min(127, value + device.spec.rssi_bias
                                      + other.spec.rssi_bias))
                contacts.append(wire.Contact(
                    device_id=other.device_uuid, rssi=value))
                device.hour_counters["users_detected"] += 1
            for beacon in scenario.beacons:
                distance = math.hypot(own_x - beacon.x, own_y - beacon.y)
                value = scenario.rssi_model.sample(
                    max(distance, 0.1), device.rng)
                if value is None:
                    continue
                value = max(-128, min(127, value + device.spec.rssi_bias))
                contacts.append(wire.Contact(
                    device_id=beacon.device_id, rssi=value))
                device.hour_counters["beacons_detected"] += 1
            # scans always produce a record, crowded or alone
            for chunk_start in range(0, max(len(contacts), 1),
                                     wire.MAX_CONTACTS_PER_RECORD):
                chunk = contacts[chunk_start:chunk_start
                                 + wire.MAX_CONTACTS_PER_RECORD]
                device.record_buffer.append(wire.ScanRecord(
                    epoch=sim_time, contacts=tuple(chunk)))
                device.report.records_created += 1
            device.report.scans_performed += 1
            device.report.contacts_observed += len(contacts)
            device.hour_counters["scans_performed"] += 1

        tick = minute + 1
        for device in devices:
            if tick % scenario.gps_every_min == 0 and device.spec.gps_enabled:
                x, y = positions[device.spec.name]
                lat, lon = _grid_to_latlon(scenario, x, y)
                device.gps_buffer.append((lat, lon, sim_time))
                device.report.gps_created += 1
                device.hour_counters["gps_scans"] += 1
                try_send_gps(device)
            if tick % scenario.upload_every_min == 0:
                try_send_contacts(device)
                if device.liveliness_buffer:
                    try_send_liveliness(device)  # buffered retry
            if tick % scenario.liveliness_every_min == 0:
                stats = dict(device.hour_counters)
                stats.update({
                    "buffer_records": len(device.record_buffer),
                    "bluetooth_enabled": device.spec.bluetooth_on(minute),
                    "gps_enabled": device.spec.gps_enabled,
                    "battery_level": max(20, 100 - minute // 10),
                    "app_version": "1.0.0",
                })
                hour_ts = (scenario.start_epoch
                           + (tick - scenario.liveliness_every_min) * MINUTE)
                device.liveliness_buffer.append((stats, hour_ts))
                device.report.liveliness_created += 1
                device.reset_hour()
                try_send_liveliness(device)
                device_id, ts, signature = signed(device)
                try:
                    alerts = gateway.poll_notifications(device_id, ts, signature)
                    device.report.alerts_received += len(alerts)
                except GatewayError:
                    pass

    # final flush: deliver whatever is still buffered
    end_time = scenario.start_epoch + scenario.duration_minutes * MINUTE
    if clock is not None:
        clock.set(end_time)
    for device in devices:
        partial_minutes = scenario.duration_minutes % scenario.liveliness_every_min
        if partial_minutes:
            hour_ts = scenario.start_epoch + (
                scenario.duration_minutes - partial_minutes) * MINUTE
            stats = dict(device.hour_counters)
            stats.update({
                "buffer_records": len(device.record_buffer),
                "bluetooth_enabled": device.spec.bluetooth_on(
                    scenario.duration_minutes - 1),
                "gps_enabled": device.spec.gps_enabled,
                "battery_level": max(20, 100 - scenario.duration_minutes // 10),
                "app_version": "1.0.0",
            })
            device.liveliness_buffer.append((stats, hour_ts))
            device.report.liveliness_created += 1
        for attempt_fn, buffer in (
                (try_send_contacts, device.record_buffer),
                (try_send_gps, device.gps_buffer),
                (try_send_liveliness, device.liveliness_buffer)):
            attempts = 0
            while buffer and attempts < scenario.max_flush_attempts:
                attempts += 1
                if attempt_fn(device):
                    break
        device.report.unsent_records = len(device.record_buffer)
        device.report.unsent_gps = len(device.gps_buffer)
        device.report.unsent_liveliness = len(device.liveliness_buffer)
    return report
