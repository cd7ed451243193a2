"""Exception types shared across the platform.

Every error carries an HTTP status and a short machine-readable code so
the server layer can translate failures uniformly. Library callers just
catch the types.
"""

from __future__ import annotations


class PlatformError(Exception):
    """Base class for errors raised by platform services."""

    status = 500
    code = "internal-error"


class ValidationError(PlatformError):
    status = 400
    code = "invalid-request"


class CodecError(ValidationError):
    """Malformed binary payload. ``offset`` is the byte position of the
    field that could not be read."""

    code = "malformed-payload"

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class AuthError(PlatformError):
    """Rejected request authentication. ``reason`` is one of
    ``stale-timestamp`` or ``bad-signature``."""

    status = 401
    code = "auth-rejected"

    def __init__(self, reason: str):
        super().__init__(f"request rejected: {reason}")
        self.reason = reason


class RegistrationError(PlatformError):
    status = 403
    code = "registration-rejected"


class ThrottledError(PlatformError):
    status = 429
    code = "too-many-attempts"


class OtpError(PlatformError):
    """Failed consent challenge. ``reason`` is one of ``no-phone``,
    ``no-challenge``, ``expired``, ``exhausted``, or ``mismatch``."""

    status = 403
    code = "otp-rejected"

    def __init__(self, reason: str):
        super().__init__(f"consent challenge failed: {reason}")
        self.reason = reason


class NotFoundError(PlatformError):
    status = 404
    code = "not-found"


class StateError(PlatformError):
    """Operation not allowed in the entity's current state."""

    status = 409
    code = "invalid-state"


class ForbiddenError(PlatformError):
    status = 403
    code = "forbidden"
