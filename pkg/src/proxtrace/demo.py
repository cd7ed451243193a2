"""Deterministic demo deployment used by ``proxtrace serve --seed-demo``.

Seeds three days of registrations and liveliness history plus a fresh
two-hour proximity scenario in which one subject spent exactly thirty
minutes next to one contact. Everything runs on a manual clock pinned to
the real present, so a server started right afterwards serves this data
as recent history. The returned summary carries what an operator demo
or portal integration test needs: subject credentials, the suggested
trace window, and the expected hop-1 entry.
"""

from __future__ import annotations

import time

from .clock import ManualClock
from .config import PlatformConfig
from .ingest.records import LivelinessReport
from .platform import Platform
from .simfleet import (DeviceSpec, InProcessGateway, RssiModel,
                       ScenarioConfig, run_scenario)

HOUR = 3600
DAY = 86400

DEMO_MAKE_MODELS = ["Nokia 6.1 Plus", "Pixel 3a", "Galaxy M21", "iPhone SE"]


def seed_demo(config: PlatformConfig, now: int | None = None) -> dict:
    """Populates ``config.data_dir`` and returns the demo summary."""
    now = int(time.time()) if now is None else int(now)
    clock = ManualClock(now)
    platform = Platform(config, clock=clock)

    # three days of registrations for the ops charts
    backdated = []
    for day_offset, count in ((2, 2), (1, 1)):
        clock.set(now - day_offset * DAY)
        codes = platform.identity.issue_codes(count)
        for i, code in enumerate(codes):
            registration = platform.identity.register_device(
                code,
                phone=f"+15550200{day_offset}{i:02d}",
                make_model=DEMO_MAKE_MODELS[(day_offset + i)
                                            % len(DEMO_MAKE_MODELS)],
                source="demo-seed")
            backdated.append(registration)

    # 72 hours of liveliness history for the backdated devices
    last_hour = now // HOUR * HOUR
    for index, registration in enumerate(backdated):
        for hour_back in range(72, 0, -1):
            hour_start = last_hour - hour_back * HOUR
            platform.liveliness_store.upsert(LivelinessReport(
                device_id=registration.device_id,
                hour_start=hour_start,
                stats={
                    "scans_performed": 42 + (hour_back * 7 + index * 5) % 17,
                    "scans_failed": (hour_back + index) % 3,
                    "gps_scans": 12,
                    "bluetooth_enabled": True,
                    "gps_enabled": True,
                },
                received_at=hour_start + HOUR))

    # fresh two-hour scenario: ada sits one metre from bea for exactly
    # thirty minutes; cora stays out of radio range the whole time.
    # zero noise makes every contact minute read -67 dBm, comfortably
    # above the -78 threshold, so the traced duration is exactly 30.
    start_epoch = last_hour - 2 * HOUR
    scenario = ScenarioConfig(
        start_epoch=start_epoch,
        duration_minutes=120,
        seed=7,
        rssi_model=RssiModel(sigma=0.0),
        devices=[
            DeviceSpec(name="ada", phone="+15550300001",
                       make_model=DEMO_MAKE_MODELS[0],
                       trajectory=[(0, 0.0, 0.0)]),
            DeviceSpec(name="bea", phone="+15550300002",
                       make_model=DEMO_MAKE_MODELS[1],
                       trajectory=[(0, 200.0, 0.0), (10, 1.0, 0.0),
                                   (40, 200.0, 0.0)]),
            DeviceSpec(name="cora", phone="+15550300003",
                       make_model=DEMO_MAKE_MODELS[2],
                       trajectory=[(0, -500.0, 0.0)]),
        ])
    clock.set(start_epoch)
    codes = platform.identity.issue_codes(len(scenario.devices))
    report = run_scenario(scenario, InProcessGateway(platform.ingest),
                          codes, clock=clock)

    clock.set(now)
    platform.run_preprocessing(include_open=True)
    platform.run_daily_jobs()

    subjects = {}
    for name in ("ada", "bea", "cora"):
        device_report = report.devices[name]
        device_hex = device_report.device_id.replace("-", "")
        subjects[name] = {
            "unique_id": device_report.unique_id,
            "device_suffix": device_hex[-4:],
            "phone": next(d.phone for d in scenario.devices if d.name == name),
            "invite_code": device_report.invite_code,
        }
    return {
        "seeded_at": now,
        "scenario_start": start_epoch,
        "suggested_window": [start_epoch - 600,
                             start_epoch + 2 * HOUR + 600],
        "subjects": subjects,
        "expected_hop1": {
            "subject": "ada",
            "invite_code": subjects["bea"]["invite_code"],
            "contact_minutes": 30,
        },
    }
