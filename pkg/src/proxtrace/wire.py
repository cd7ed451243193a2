"""Binary contact-batch codec, request signing, and beacon id embedding.

Wire layout (all integers big-endian):

    batch    := source_id(16 bytes) record*
    record   := epoch(4, unsigned) count(1) contact[count]
    contact  := device_id(16) rssi(1, two's complement)

so a batch with record sizes ``n_i`` occupies ``16 + sum(5 + 17*n_i)``
bytes. A batch must fill its buffer exactly; a partial trailing field is
a parse error reported with the byte offset of the field that could not
be read.

Request authentication is stateless. Both sides derive

    device_key = base64(SHA256(device_id_bytes || auth_salt))
    signature  = base64(SHA256(device_id_bytes || str(timestamp) || device_key))

where ``str(timestamp)`` is the decimal ASCII form of the epoch seconds
and ``device_key`` enters as its base64 ASCII string. The server checks
timestamp freshness first, then recomputes the signature.
"""

from __future__ import annotations

import base64
import hashlib
import uuid
from dataclasses import dataclass

from .errors import AuthError, CodecError, ValidationError

SOURCE_ID_LEN = 16
RECORD_HEADER_LEN = 5  # epoch(4) + count(1)
CONTACT_LEN = 17       # device_id(16) + rssi(1)
MAX_CONTACTS_PER_RECORD = 255
MAX_EPOCH = 0xFFFFFFFF

DEFAULT_FRESHNESS_WINDOW_S = 300

# Stationary beacons advertise ids from a fixed template: the first 12
# bytes never change, the configured major/minor pair sits in bytes
# 12..15. Random (version 4) device uuids can never match the prefix.
BEACON_PREFIX = bytes.fromhex("beac" + "00" * 10)


@dataclass(frozen=True)
class Contact:
    """One sighted device within a scan."""

    device_id: uuid.UUID
    rssi: int


@dataclass(frozen=True)
class ScanRecord:
    """All devices sighted by one Bluetooth scan."""

    epoch: int
    contacts: tuple[Contact, ...]


@dataclass(frozen=True)
class ContactBatch:
    source_device_id: uuid.UUID
    records: tuple[ScanRecord, ...]

    def encoded_length(self) -> int:
        return SOURCE_ID_LEN + sum(
            RECORD_HEADER_LEN + CONTACT_LEN * len(r.contacts)
            for r in self.records)


def encode_contact_batch(batch: ContactBatch) -> bytes:
    out = bytearray(batch.source_device_id.bytes)
    for record in batch.records:
        if not 0 <= record.epoch <= MAX_EPOCH:
            raise ValidationError(
                f"record epoch {record.epoch} out of unsigned 32-bit range")
        if len(record.contacts) > MAX_CONTACTS_PER_RECORD:
            raise ValidationError(
                f"record holds {len(record.contacts)} contacts; "
                f"limit is {MAX_CONTACTS_PER_RECORD}")
        out += record.epoch.to_bytes(4, "big")
        out.append(len(record.contacts))
        for contact in record.contacts:
            if not -128 <= contact.rssi <= 127:
                raise ValidationError(
                    f"rssi {contact.rssi} outside signed byte range")
            out += contact.device_id.bytes
            out.append(contact.rssi & 0xFF)
    return bytes(out)


def decode_contact_batch(data: bytes) -> ContactBatch:
    if len(data) < SOURCE_ID_LEN:
        raise CodecError("buffer too short for source device id", offset=0)
    source = uuid.UUID(bytes=data[:SOURCE_ID_LEN])
    pos = SOURCE_ID_LEN
    records: list[ScanRecord] = []
    while pos < len(data):
        if len(data) - pos < RECORD_HEADER_LEN:
            raise CodecError("truncated record header", offset=pos)
        epoch = int.from_bytes(data[pos:pos + 4], "big")
        count = data[pos + 4]
        pos += RECORD_HEADER_LEN
        need = count * CONTACT_LEN
        if len(data) - pos < need:
            raise CodecError(
                f"truncated contact list: need {need} bytes, "
                f"have {len(data) - pos}", offset=pos)
        contacts = []
        for _ in range(count):
            device = uuid.UUID(bytes=data[pos:pos + 16])
            rssi = data[pos + 16]
            if rssi >= 128:
                rssi -= 256
            contacts.append(Contact(device_id=device, rssi=rssi))
            pos += CONTACT_LEN
        records.append(ScanRecord(epoch=epoch, contacts=tuple(contacts)))
    return ContactBatch(source_device_id=source, records=tuple(records))


def derive_device_key(device_id: uuid.UUID, auth_salt: str) -> str:
    digest = hashlib.sha256(device_id.bytes + auth_salt.encode("utf-8"))
    return base64.b64encode(digest.digest()).decode("ascii")


def sign_request(device_id: uuid.UUID, timestamp: int, device_key: str) -> str:
    material = (device_id.bytes
                + str(int(timestamp)).encode("ascii")
                + device_key.encode("ascii"))
    return base64.b64encode(hashlib.sha256(material).digest()).decode("ascii")


@dataclass(frozen=True)
class SignedRequest:
    device_id: uuid.UUID
    timestamp: int
    signature: str


def verify_request(request: SignedRequest, now: int, auth_salt: str,
                   freshness_window_s: int = DEFAULT_FRESHNESS_WINDOW_S) -> None:
    """Raises AuthError unless the request is fresh and correctly signed.

    Freshness is checked first so a stale request is reported as stale
    even when its signature is also wrong.
    """
    if abs(int(now) - int(request.timestamp)) > freshness_window_s:
        raise AuthError("stale-timestamp")
    expected = sign_request(
        request.device_id, request.timestamp,
        derive_device_key(request.device_id, auth_salt))
    if request.signature != expected:
        raise AuthError("bad-signature")


def beacon_device_id(major: int, minor: int) -> uuid.UUID:
    """Device id a stationary beacon with the given version advertises."""
    for name, value in (("major", major), ("minor", minor)):
        if not 0 <= value <= 0xFFFF:
            raise ValidationError(f"beacon {name} {value} outside 16-bit range")
    return uuid.UUID(bytes=BEACON_PREFIX
                     + major.to_bytes(2, "big") + minor.to_bytes(2, "big"))


def is_beacon_device_id(device_id: uuid.UUID | str) -> bool:
    if isinstance(device_id, str):
        try:
            device_id = uuid.UUID(device_id)
        except ValueError:
            return False
    return device_id.bytes[:len(BEACON_PREFIX)] == BEACON_PREFIX


def beacon_version(device_id: uuid.UUID) -> tuple[int, int]:
    """Extracts (major, minor) from a beacon device id."""
    if not is_beacon_device_id(device_id):
        raise ValidationError(f"{device_id} is not a beacon device id")
    raw = device_id.bytes
    return int.from_bytes(raw[12:14], "big"), int.from_bytes(raw[14:16], "big")
