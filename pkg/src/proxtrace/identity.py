"""Identifier indirection between people and device ids.

Three relational-style tables, persisted as JSON-lines files under
``<data_dir>/identity/``:

    codes.jsonl       one row per invite code
    identities.jsonl  one row per registered user, keyed by unique_id
    devices.jsonl     one row per issued device id

Phone numbers are never stored in plaintext: only a salted SHA256 hash
(for reinstall and trace-subject checks) and an RSA-OAEP ciphertext a
health authority can decrypt offline. OTP consent challenges and the
registration throttle are in-memory; they expire too fast to be worth
persisting.

Tables are rewritten wholesale on mutation. That keeps purges real (the
old row is gone from disk, not shadowed) and is plenty at the intended
scale of thousands of devices.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import logging
import random
import secrets
import string
import threading
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

from . import crypto, wire
from .clock import Clock
from .config import PlatformConfig
from .errors import (NotFoundError, OtpError, RegistrationError,
                     ThrottledError, ValidationError)

logger = logging.getLogger(__name__)

CODE_ALPHABET = string.ascii_uppercase + string.digits
PIN_LENGTH = 6


@dataclass
class InviteCode:
    code: str
    issued_at: int
    expires_at: int
    used: bool = False


@dataclass
class DeviceRecord:
    device_id: str
    unique_id: str
    created_at: int


@dataclass
class Identity:
    unique_id: str
    invite_code: str
    pin: str
    make_model: str
    created_at: int
    phone_hash: str | None = None
    phone_encrypted: str | None = None
    devices: list[DeviceRecord] = field(default_factory=list)

    @property
    def current_device(self) -> DeviceRecord:
        return self.devices[-1]


@dataclass(frozen=True)
class IdentityRef:
    """Resolution of a device id. ``kind`` is ``user``, ``beacon``, or
    ``unknown``; only users carry an invite code."""

    device_id: str
    kind: str
    invite_code: str | None = None
    unique_id: str | None = None


@dataclass(frozen=True)
class Registration:
    unique_id: str
    device_id: str
    device_key: str
    pin: str
    invite_code: str


@dataclass
class OtpStatus:
    unique_id: str
    issued_at: int
    expires_at: int
    attempts_left: int
    verified: bool = False


@dataclass
class _OtpChallenge:
    unique_id: str
    otp: str
    issued_at: int
    expires_at: int
    attempts_left: int


class RateLimiter:
    """Counts failed attempts per (source, UTC day)."""

    def __init__(self, daily_limit: int):
        self.daily_limit = daily_limit
        self._failures: dict[tuple[str, int], int] = {}

    def check(self, source: str, now: int) -> None:
        if self._failures.get((source, now // 86400), 0) >= self.daily_limit:
            raise ThrottledError(
                f"too many failed attempts from {source} today")

    def record_failure(self, source: str, now: int) -> None:
        key = (source, now // 86400)
        self._failures[key] = self._failures.get(key, 0) + 1


class IdentityStore:
    """Owns the three tables and their on-disk mirror."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.codes: dict[str, InviteCode] = {}
        self.identities: dict[str, Identity] = {}
        self.device_index: dict[str, str] = {}  # device_id -> unique_id
        self._load()

    def _path(self, table: str) -> Path:
        return self.directory / f"{table}.jsonl"

    def _load(self) -> None:
        codes_path = self._path("codes")
        if codes_path.exists():
            for line in codes_path.read_text(encoding="utf-8").splitlines():
                row = json.loads(line)
                self.codes[row["code"]] = InviteCode(**row)
        identities_path = self._path("identities")
        if identities_path.exists():
            for line in identities_path.read_text(encoding="utf-8").splitlines():
                row = json.loads(line)
                self.identities[row["unique_id"]] = Identity(**row, devices=[])
        devices_path = self._path("devices")
        if devices_path.exists():
            for line in devices_path.read_text(encoding="utf-8").splitlines():
                rec = DeviceRecord(**json.loads(line))
                self.identities[rec.unique_id].devices.append(rec)
                self.device_index[rec.device_id] = rec.unique_id
        for identity in self.identities.values():
            identity.devices.sort(key=lambda r: r.created_at)

    def _write_table(self, table: str, rows: Iterable[dict]) -> None:
        path = self._path(table)
        tmp = path.with_suffix(".tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
        tmp.replace(path)

    def persist(self) -> None:
        self._write_table(
            "codes", (asdict(c) for c in self.codes.values()))
        self._write_table(
            "identities",
            ({k: v for k, v in asdict(i).items() if k != "devices"}
             for i in self.identities.values()))
        self._write_table(
            "devices",
            (asdict(d) for i in self.identities.values() for d in i.devices))

    def add_device(self, identity: Identity, record: DeviceRecord) -> None:
        identity.devices.append(record)
        self.device_index[record.device_id] = identity.unique_id


def normalize_phone(phone: str) -> str:
    cleaned = "".join(ch for ch in phone if ch.isdigit() or ch == "+")
    if len(cleaned.lstrip("+")) < 6:
        raise ValidationError("phone number too short")
    return cleaned


class IdentityService:
    """All identity operations behind one lock.

    Single-process, many-threads: FastAPI workers and the simulator all
    funnel through here, so the mutating paths are serialized.
    """

    def __init__(self, config: PlatformConfig, clock: Clock,
                 rng: random.Random | None = None):
        self.config = config
        self.clock = clock
        self.store = IdentityStore(Path(config.data_dir) / "identity")
        self._limiter = RateLimiter(config.registration_daily_limit)
        self._challenges: dict[str, _OtpChallenge] = {}
        self.otp_outbox: list[dict] = []  # simulated SMS gateway
        self._lock = threading.RLock()
        # all identifier generation funnels through one source so tests
        # and simulations can make it reproducible; default is the CSPRNG
        self._rand = rng if rng is not None else secrets.SystemRandom()

    def _new_uuid(self) -> uuid.UUID:
        return uuid.UUID(int=self._rand.getrandbits(128), version=4)

    # -- invite codes --------------------------------------------------

    def issue_codes(self, count: int) -> list[str]:
        if count < 1:
            raise ValidationError("count must be positive")
        now = self.clock.now()
        expires = now + self.config.invite_expiry_days * 86400
        issued = []
        with self._lock:
            while len(issued) < count:
                code = "".join(self._rand.choice(CODE_ALPHABET)
                               for _ in range(self.config.invite_code_length))
                if code in self.store.codes:
                    continue
                self.store.codes[code] = InviteCode(
                    code=code, issued_at=now, expires_at=expires)
                issued.append(code)
            self.store.persist()
        return issued

    # -- registration --------------------------------------------------

    def _hash_phone(self, phone: str) -> str:
        material = (phone + self.config.phone_salt).encode("utf-8")
        return hashlib.sha256(material).hexdigest()

    def _new_device_record(self, identity: Identity) -> DeviceRecord:
        created = self.clock.now()
        if identity.devices and created <= identity.devices[-1].created_at:
            # created_at orders reinstall history; keep it strictly increasing
            created = identity.devices[-1].created_at + 1
        record = DeviceRecord(
            device_id=str(self._new_uuid()),
            unique_id=identity.unique_id,
            created_at=created)
        self.store.add_device(identity, record)
        return record

    def register_device(self, invite_code: str, phone: str | None = None,
                        make_model: str = "", source: str = "default"
                        ) -> Registration:
        now = self.clock.now()
        with self._lock:
            self._limiter.check(source, now)
            code = self.store.codes.get(invite_code.strip().upper())
            if code is None or code.used or now >= code.expires_at:
                self._limiter.record_failure(source, now)
                raise RegistrationError("invite code unknown, used, or expired")
            phone_hash = phone_encrypted = None
            if phone is not None:
                phone = normalize_phone(phone)
                if not self.config.public_key_pem:
                    raise ValidationError(
                        "no public key configured; cannot accept a phone number")
                phone_hash = self._hash_phone(phone)
                phone_encrypted = crypto.encrypt_field(
                    self.config.public_key_pem, phone.encode("utf-8"))
            identity = Identity(
                unique_id=self._new_uuid().hex,
                invite_code=code.code,
                pin="".join(self._rand.choice(string.digits)
                            for _ in range(PIN_LENGTH)),
                make_model=make_model,
                created_at=now,
                phone_hash=phone_hash,
                phone_encrypted=phone_encrypted)
            code.used = True
            self.store.identities[identity.unique_id] = identity
            device = self._new_device_record(identity)
            self.store.persist()
            logger.info("registered unique_id=%s via code %s",
                        identity.unique_id, code.code)
            return Registration(
                unique_id=identity.unique_id,
                device_id=device.device_id,
                device_key=wire.derive_device_key(
                    uuid.UUID(device.device_id), self.config.auth_salt),
                pin=identity.pin,
                invite_code=code.code)

    def reinstall_device(self, phone: str, pin: str,
                         source: str = "default") -> Registration:
        """Issues a fresh device id for an existing identity.

        Authenticated by phone + PIN; failures count against the same
        per-source daily throttle as registration.
        """
        now = self.clock.now()
        with self._lock:
            self._limiter.check(source, now)
            phone_hash = self._hash_phone(normalize_phone(phone))
            identity = next(
                (i for i in self.store.identities.values()
                 if i.phone_hash == phone_hash), None)
            if identity is None or not hmac.compare_digest(identity.pin, pin):
                self._limiter.record_failure(source, now)
                raise RegistrationError("phone and PIN do not match any identity")
            device = self._new_device_record(identity)
            self.store.persist()
            return Registration(
                unique_id=identity.unique_id,
                device_id=device.device_id,
                device_key=wire.derive_device_key(
                    uuid.UUID(device.device_id), self.config.auth_salt),
                pin=identity.pin,
                invite_code=identity.invite_code)

    # -- resolution ----------------------------------------------------

    def is_registered_device(self, device_id: str) -> bool:
        return device_id in self.store.device_index

    def resolve_identity(self, device_ids: Iterable[str]) -> list[IdentityRef]:
        refs = []
        with self._lock:
            for device_id in device_ids:
                unique_id = self.store.device_index.get(device_id)
                if unique_id is not None:
                    identity = self.store.identities[unique_id]
                    refs.append(IdentityRef(
                        device_id=device_id, kind="user",
                        invite_code=identity.invite_code,
                        unique_id=unique_id))
                elif wire.is_beacon_device_id(device_id):
                    refs.append(IdentityRef(device_id=device_id, kind="beacon"))
                else:
                    refs.append(IdentityRef(device_id=device_id, kind="unknown"))
        return refs

    def get_identity(self, unique_id: str) -> Identity:
        identity = self.store.identities.get(unique_id)
        if identity is None:
            raise NotFoundError(f"unknown unique_id {unique_id}")
        return identity

    def all_identities(self) -> list[Identity]:
        with self._lock:
            return list(self.store.identities.values())

    def device_ids_for(self, unique_id: str) -> list[str]:
        return [d.device_id for d in self.get_identity(unique_id).devices]

    def verify_subject(self, unique_id: str, device_suffix: str,
                       phone: str) -> bool:
        """Checks the three-way cross-reference a trace submission gives:
        unique id, last-4 of some device id, and the phone on file."""
        try:
            identity = self.get_identity(unique_id)
        except NotFoundError:
            return False
        if identity.phone_hash is None:
            return False
        if identity.phone_hash != self._hash_phone(normalize_phone(phone)):
            return False
        suffix = device_suffix.strip().lower()
        return any(uuid.UUID(d.device_id).hex.endswith(suffix)
                   for d in identity.devices)

    # -- OTP consent ---------------------------------------------------

    def issue_consent_otp(self, unique_id: str) -> OtpStatus:
        with self._lock:
            identity = self.get_identity(unique_id)
            if identity.phone_hash is None:
                raise OtpError("no-phone")
            now = self.clock.now()
            challenge = _OtpChallenge(
                unique_id=unique_id,
                otp=f"{self._rand.randrange(1000000):06d}",
                issued_at=now,
                expires_at=now + self.config.otp_validity_s,
                attempts_left=self.config.otp_max_attempts)
            self._challenges[unique_id] = challenge
            # Stands in for the SMS gateway: logged and kept on the outbox
            # so tests and the simulated fleet can read what was "sent".
            self.otp_outbox.append({
                "unique_id": unique_id, "otp": challenge.otp, "issued_at": now})
            logger.info("issued consent OTP for unique_id=%s", unique_id)
            return OtpStatus(
                unique_id=unique_id, issued_at=now,
                expires_at=challenge.expires_at,
                attempts_left=challenge.attempts_left)

    def verify_consent_otp(self, unique_id: str, otp: str) -> OtpStatus:
        with self._lock:
            challenge = self._challenges.get(unique_id)
            if challenge is None:
                raise OtpError("no-challenge")
            now = self.clock.now()
            if now >= challenge.expires_at:
                del self._challenges[unique_id]
                raise OtpError("expired")
            if challenge.attempts_left <= 0:
                raise OtpError("exhausted")
            if not hmac.compare_digest(challenge.otp, otp.strip()):
                challenge.attempts_left -= 1
                if challenge.attempts_left <= 0:
                    del self._challenges[unique_id]
                    raise OtpError("exhausted")
                raise OtpError("mismatch")
            del self._challenges[unique_id]
            return OtpStatus(
                unique_id=unique_id, issued_at=challenge.issued_at,
                expires_at=challenge.expires_at,
                attempts_left=challenge.attempts_left, verified=True)

    def expire_otp(self, unique_id: str) -> None:
        """Test hook: force the outstanding challenge to expire."""
        with self._lock:
            challenge = self._challenges.get(unique_id)
            if challenge is not None:
                challenge.expires_at = self.clock.now()

    # -- erasure -------------------------------------------------------

    def purge_phone(self, unique_id: str) -> None:
        """Removes the phone hash and ciphertext from memory and disk."""
        with self._lock:
            identity = self.get_identity(unique_id)
            identity.phone_hash = None
            identity.phone_encrypted = None
            self.store.persist()

    def registration_series(self, days: int, now: int | None = None) -> dict:
        """Daily install counts and make/model totals for the ops view."""
        now = self.clock.now() if now is None else now
        day_end = (now // 86400 + 1) * 86400
        starts = [day_end - 86400 * (days - i) for i in range(days)]
        installs = {s: 0 for s in starts}
        models: dict[str, int] = {}
        with self._lock:
            for identity in self.store.identities.values():
                for device in identity.devices:
                    day = device.created_at // 86400 * 86400
                    if day in installs:
                        installs[day] += 1
                label = identity.make_model or "unknown"
                models[label] = models.get(label, 0) + 1
        return {
            "days": [{"day_start": s, "installs": installs[s]} for s in starts],
            "make_models": dict(sorted(models.items())),
            "total_identities": len(self.store.identities),
        }
