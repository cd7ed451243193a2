"""Shared fixtures."""

from __future__ import annotations

import itertools
import sys
import random

import pytest

from proxtrace import crypto
from proxtrace.clock import ManualClock
from proxtrace.config import PlatformConfig
from proxtrace.ingest.records import EdgeRow
from proxtrace.platform import Platform

# hour-aligned base timestamp all ManualClock tests start from
BASE_TIME = 1_749_999_600
DAY_START = BASE_TIME // 86400 * 86400

PORTAL_TOKENS = {
    "token-health": "health-center",
    "token-board": "advisory-board",
    "token-ops": "ops",
}

_counter = itertools.count()


@pytest.fixture(scope="session")
def keypair() -> tuple[str, str]:
    return crypto.generate_keypair()


@pytest.fixture
def make_platform(tmp_path, keypair):
    """Factory for isolated platforms on a manual clock."""

    def build(clock: ManualClock | None = None, seed: int | None = None,
              **overrides) -> Platform:
        _, public_pem = keypair
        settings = {
            "data_dir": tmp_path / f"platform-{next(_counter)}",
            "auth_salt": "test-auth-salt",
            "phone_salt": "test-phone-salt",
            "public_key_pem": public_pem,
            "portal_tokens": dict(PORTAL_TOKENS),
        }
        settings.update(overrides)
        return Platform(
            PlatformConfig(**settings),
            clock=clock if clock is not None else ManualClock(BASE_TIME),
            id_rng=random.Random(seed) if seed is not None else None)

    return build


@pytest.fixture
def private_pem(keypair) -> str:
    return keypair[0]


def worked_example_rows(day_start: int) -> list[EdgeRow]:
    """The canonical one-day fixture used across graph and score tests.

    Device C meets A for one hour at 9 AM (-80 dBm), 6 PM (-70) and
    9 PM (-100); B for one hour at 10 AM (-50); D for two hours from
    2 PM (-55).
    """
    rows = []
    for hour, rssi in ((9, -80), (18, -70), (21, -100)):
        for minute in range(60):
            rows.append(EdgeRow(ts=day_start + hour * 3600 + minute * 60,
                                src="A", sink="C", rssi=rssi))
    for minute in range(60):
        rows.append(EdgeRow(ts=day_start + 10 * 3600 + minute * 60,
                            src="B", sink="C", rssi=-50))
    for minute in range(120):
        rows.append(EdgeRow(ts=day_start + 14 * 3600 + minute * 60,
                            src="C", sink="D", rssi=-55))
    return rows


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Emit the acceptance pass/fail lines after capture is released."""
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None) if module else None
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for line in results:
        terminalreporter.write_line(line)
    terminalreporter.write_line(
        "criteria 11 and 12 (operator portal) run in frontend/ "
        "with its own suite")
