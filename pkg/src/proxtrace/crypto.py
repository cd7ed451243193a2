"""Asymmetric encryption helpers for sensitive subscriber fields.

The platform holds only the public key; the matching private key is
kept offline by the operator. Phone numbers and GPS coordinates are
stored as RSA-OAEP ciphertext next to the working representation
(salted hash, geohash) the backend actually uses.
"""

from __future__ import annotations

import base64

from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import padding, rsa

_OAEP = padding.OAEP(
    mgf=padding.MGF1(algorithm=hashes.SHA256()),
    algorithm=hashes.SHA256(),
    label=None,
)


def generate_keypair(key_size: int = 2048) -> tuple[str, str]:
    """Returns (private_pem, public_pem). For provisioning and tests."""
    private = rsa.generate_private_key(public_exponent=65537, key_size=key_size)
    private_pem = private.private_bytes(
        serialization.Encoding.PEM,
        serialization.PrivateFormat.PKCS8,
        serialization.NoEncryption(),
    ).decode("ascii")
    public_pem = private.public_key().public_bytes(
        serialization.Encoding.PEM,
        serialization.PublicFormat.SubjectPublicKeyInfo,
    ).decode("ascii")
    return private_pem, public_pem


def encrypt_field(public_key_pem: str, plaintext: bytes) -> str:
    """Encrypts a short field; returns base64 ciphertext."""
    key = serialization.load_pem_public_key(public_key_pem.encode("ascii"))
    return base64.b64encode(key.encrypt(plaintext, _OAEP)).decode("ascii")


def decrypt_field(private_key_pem: str, ciphertext_b64: str) -> bytes:
    """Inverse of encrypt_field. Lives with the offline key holder."""
    key = serialization.load_pem_private_key(
        private_key_pem.encode("ascii"), password=None)
    return key.decrypt(base64.b64decode(ciphertext_b64), _OAEP)
