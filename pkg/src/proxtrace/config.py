"""Platform configuration.

Loaded from a JSON file. Secrets (salts) may be given inline, or as
``env:NAME`` / ``file:/path`` references resolved at load time so the
literal value stays out of the config file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ValidationError

DEFAULT_ANALYTICS_ENDPOINTS = [
    "/analytics/contact-buckets",
    "/analytics/neighbourhood-tree",
    "/analytics/heatmap",
]


@dataclass
class PlatformConfig:
    data_dir: Path
    # request auth
    auth_salt: str = "change-me-auth"
    freshness_window_s: int = 300
    # phone protection
    phone_salt: str = "change-me-phone"
    public_key_pem: str | None = None
    # proximity analytics defaults
    rssi_threshold: int = -78            # delta: near iff rssi >= threshold
    min_contact_minutes: int = 15        # proximate-neighbor cutoff
    background_minutes: int = 240        # background-neighbor cutoff
    trace_contact_minutes: int = 15      # qualifying-contact cutoff for traces
    # alerts
    proximity_trigger_count: int = 5
    proximity_privacy_floor: int = 3
    proximity_cooldown_s: int = 3600
    scan_target_per_day: int = 1000
    # identity
    registration_daily_limit: int = 10
    invite_code_length: int = 8
    invite_expiry_days: int = 30
    otp_validity_s: int = 600
    otp_max_attempts: int = 3
    # tracing
    trace_window_max_days: int = 30
    # ingestion
    segment_seconds: int = 7200
    heatmap_area_m: float = 1500.0
    analytics_endpoints: list[str] = field(
        default_factory=lambda: list(DEFAULT_ANALYTICS_ENDPOINTS))
    # HTTP surface
    host: str = "127.0.0.1"
    port: int = 8470
    portal_tokens: dict[str, str] = field(default_factory=dict)  # token -> role
    expose_test_hooks: bool = False

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        if self.min_contact_minutes <= 0:
            raise ValidationError("min_contact_minutes must be positive")
        if self.background_minutes <= self.min_contact_minutes:
            raise ValidationError(
                "background_minutes must exceed min_contact_minutes")
        if self.rssi_threshold >= 0:
            raise ValidationError("rssi_threshold must be negative dBm")
        if self.freshness_window_s <= 0:
            raise ValidationError("freshness_window_s must be positive")

    def with_overrides(self, **kwargs) -> "PlatformConfig":
        return replace(self, **kwargs)


def _resolve_secret(value: str) -> str:
    if value.startswith("env:"):
        name = value[4:]
        resolved = os.environ.get(name)
        if resolved is None:
            raise ValidationError(f"environment variable {name} is not set")
        return resolved
    if value.startswith("file:"):
        return Path(value[5:]).read_text(encoding="utf-8").strip()
    return value


def load_config(path: str | Path) -> PlatformConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if "data_dir" not in raw:
        raise ValidationError("config requires data_dir")
    for key in ("auth_salt", "phone_salt"):
        if key in raw:
            raw[key] = _resolve_secret(raw[key])
    if "public_key_pem" in raw and raw["public_key_pem"]:
        raw["public_key_pem"] = _resolve_secret(raw["public_key_pem"])
        if not raw["public_key_pem"].startswith("-----BEGIN"):
            # treat as a path for convenience
            raw["public_key_pem"] = Path(raw["public_key_pem"]).read_text(
                encoding="utf-8")
    known = {f for f in PlatformConfig.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    return PlatformConfig(**raw)
