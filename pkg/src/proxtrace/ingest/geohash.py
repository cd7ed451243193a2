"""Geohash encoding for coarse location storage.

Seven characters give roughly a 150 m cell, which is the precision the
platform persists; exact coordinates only ever leave the process as
RSA ciphertext.
"""

from __future__ import annotations

from ..errors import ValidationError

_BASE32 = "0123456789bcdefghjkmnpqrstuvwxyz"
_DECODE = {ch: i for i, ch in enumerate(_BASE32)}

DEFAULT_PRECISION = 7


def encode(lat: float, lon: float, precision: int = DEFAULT_PRECISION) -> str:
    if not -90.0 <= lat <= 90.0:
        raise ValidationError(f"latitude {lat} out of range")
    if not -180.0 <= lon <= 180.0:
        raise ValidationError(f"longitude {lon} out of range")
    if precision < 1:
        raise ValidationError("precision must be at least 1")
    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    chars: list[str] = []
    bits = 0
    bit_count = 0
    even = True  # longitude first
    while len(chars) < precision:
        if even:
            mid = (lon_lo + lon_hi) / 2
            if lon >= mid:
                bits = (bits << 1) | 1
                lon_lo = mid
            else:
                bits <<= 1
                lon_hi = mid
        else:
            mid = (lat_lo + lat_hi) / 2
            if lat >= mid:
                bits = (bits << 1) | 1
                lat_lo = mid
            else:
                bits <<= 1
                lat_hi = mid
        even = not even
        bit_count += 1
        if bit_count == 5:
            chars.append(_BASE32[bits])
            bits = 0
            bit_count = 0
    return "".join(chars)


def decode_bounds(geohash: str) -> tuple[float, float, float, float]:
    """Returns (lat_lo, lat_hi, lon_lo, lon_hi) of the cell."""
    if not geohash:
        raise ValidationError("empty geohash")
    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    even = True
    for ch in geohash.lower():
        if ch not in _DECODE:
            raise ValidationError(f"invalid geohash character {ch!r}")
        value = _DECODE[ch]
        for shift in range(4, -1, -1):
            bit = (value >> shift) & 1
            if even:
                mid = (lon_lo + lon_hi) / 2
                if bit:
                    lon_lo = mid
                else:
                    lon_hi = mid
            else:
                mid = (lat_lo + lat_hi) / 2
                if bit:
                    lat_lo = mid
                else:
                    lat_hi = mid
            even = not even
    return lat_lo, lat_hi, lon_lo, lon_hi


def cell_center(geohash: str) -> tuple[float, float]:
    lat_lo, lat_hi, lon_lo, lon_hi = decode_bounds(geohash)
    return (lat_lo + lat_hi) / 2, (lon_lo + lon_hi) / 2
