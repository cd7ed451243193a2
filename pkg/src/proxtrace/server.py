"""HTTP adapter over the platform services.

Three surfaces share one app:

- ``/api/*``: device endpoints, authenticated per request with the
  stateless signature headers (``device-id``, ``timestamp``,
  ``signature``)
- ``/analytics/*``: per-device analytics, same signature headers
- ``/routing/*``: portal endpoints for the health center, review board,
  and operations staff, authenticated with static bearer tokens mapped
  to roles in the config

Optional ``/debug/*`` hooks exist only when ``expose_test_hooks`` is on;
they let integration tests read the simulated SMS outbox and force OTP
expiry without reaching into process internals.
"""

from __future__ import annotations

import uuid

from fastapi import Depends, FastAPI, Header, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import wire
from .errors import (AuthError, ForbiddenError, NotFoundError, OtpError,
                     PlatformError, ValidationError)
from .platform import Platform

ROLE_HEALTH_CENTER = "health-center"
ROLE_ADVISORY_BOARD = "advisory-board"
ROLE_OPS = "ops"


def create_app(platform: Platform) -> FastAPI:
    app = FastAPI(title="proximity platform", docs_url=None, redoc_url=None)
    app.state.platform = platform
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"])

    @app.exception_handler(PlatformError)
    async def platform_error_handler(request: Request, exc: PlatformError):
        body = {"error": exc.code, "detail": str(exc)}
        if isinstance(exc, (AuthError, OtpError)):
            body["reason"] = exc.reason
        return JSONResponse(status_code=exc.status, content=body)

    def signed_request(
            device_id: str = Header(...),
            timestamp: str = Header(...),
            signature: str = Header(...)) -> wire.SignedRequest:
        try:
            parsed_id = uuid.UUID(device_id)
            parsed_ts = int(timestamp)
        except ValueError:
            raise ValidationError("malformed auth headers")
        return wire.SignedRequest(device_id=parsed_id, timestamp=parsed_ts,
                                  signature=signature)

    def role_for(authorization: str = Header(default="")) -> str:
        token = authorization.removeprefix("Bearer ").strip()
        role = platform.config.portal_tokens.get(token)
        if role is None:
            raise ForbiddenError("unknown portal token")
        return role

    def require(role: str, allowed: tuple[str, ...]) -> None:
        if role not in allowed:
            raise ForbiddenError(f"role {role} may not call this endpoint")

    @app.get("/health")
    def health():
        return {"status": "ok", "now": platform.clock.now()}

    # -- device API ------------------------------------------------------

    @app.post("/api/register")
    async def register(request: Request):
        payload = await request.json()
        source = request.client.host if request.client else "unknown"
        registration = platform.ingest.register(
            str(payload.get("invite_code", "")),
            phone=payload.get("phone"),
            make_model=str(payload.get("make_model", "")),
            source=payload.get("source") or source)
        return registration.__dict__

    @app.post("/api/add-contacts")
    async def add_contacts(request: Request,
                           auth: wire.SignedRequest = Depends(signed_request)):
        body = await request.body()
        return platform.ingest.add_contacts(auth, body)

    @app.post("/api/add-gps")
    async def add_gps(request: Request,
                      auth: wire.SignedRequest = Depends(signed_request)):
        payload = await request.json()
        try:
            lat = float(payload["lat"])
            lon = float(payload["lon"])
        except (KeyError, TypeError, ValueError):
            raise ValidationError("lat and lon must be numbers")
        ts = payload.get("ts")
        return platform.ingest.add_gps(auth, lat, lon,
                                       ts=int(ts) if ts is not None else None)

    @app.post("/api/add-liveliness")
    async def add_liveliness(request: Request,
                             auth: wire.SignedRequest = Depends(signed_request)):
        payload = await request.json()
        stats = payload.get("stats")
        if not isinstance(stats, dict):
            raise ValidationError("stats must be an object")
        ts = payload.get("ts")
        return platform.ingest.add_liveliness(
            auth, stats, ts=int(ts) if ts is not None else None)

    @app.get("/api/notifications")
    def notifications(auth: wire.SignedRequest = Depends(signed_request)):
        return platform.ingest.poll_notifications(auth)

    @app.get("/api/analytics-manifest")
    def analytics_manifest(auth: wire.SignedRequest = Depends(signed_request)):
        return platform.ingest.analytics_manifest(auth)

    # -- device analytics --------------------------------------------------

    @app.get("/analytics/contact-buckets")
    def contact_buckets(auth: wire.SignedRequest = Depends(signed_request)):
        platform.ingest.authenticate(auth)
        return {"buckets":
                platform.contact_buckets_for(str(auth.device_id))}

    @app.get("/analytics/neighbourhood-tree")
    def neighbourhood_tree(auth: wire.SignedRequest = Depends(signed_request)):
        platform.ingest.authenticate(auth)
        return {"tree": platform.neighbourhood_tree_for(str(auth.device_id))}

    @app.get("/analytics/heatmap")
    def heatmap(auth: wire.SignedRequest = Depends(signed_request)):
        platform.ingest.authenticate(auth)
        return platform.heatmap_for(str(auth.device_id))

    # -- routing portal ------------------------------------------------------

    @app.post("/routing/trace/submit")
    async def trace_submit(request: Request, role: str = Depends(role_for)):
        require(role, (ROLE_HEALTH_CENTER,))
        payload = await request.json()
        for key in ("unique_id", "device_suffix", "phone", "window"):
            if key not in payload:
                raise ValidationError(f"missing field {key}")
        window = payload["window"]
        if (not isinstance(window, (list, tuple)) or len(window) != 2):
            raise ValidationError("window must be [start_epoch, end_epoch]")
        trace = platform.tracing.submit(
            str(payload["unique_id"]), str(payload["device_suffix"]),
            str(payload["phone"]), (int(window[0]), int(window[1])),
            clinical=payload.get("clinical") or {})
        return trace.summary()

    @app.post("/routing/trace/{request_id}/consent")
    async def trace_consent(request_id: str, request: Request,
                            role: str = Depends(role_for)):
        require(role, (ROLE_HEALTH_CENTER,))
        payload = await request.json()
        trace = platform.tracing.record_consent(
            request_id, str(payload.get("otp", "")))
        return trace.summary()

    @app.post("/routing/trace/{request_id}/reissue-otp")
    def trace_reissue(request_id: str, role: str = Depends(role_for)):
        require(role, (ROLE_HEALTH_CENTER,))
        return platform.tracing.reissue_consent_otp(request_id).summary()

    @app.get("/routing/trace/queue")
    def trace_queue(role: str = Depends(role_for)):
        require(role, (ROLE_HEALTH_CENTER, ROLE_ADVISORY_BOARD))
        return {"requests": platform.tracing.queue()}

    @app.post("/routing/trace/{request_id}/decide")
    async def trace_decide(request_id: str, request: Request,
                           role: str = Depends(role_for)):
        require(role, (ROLE_ADVISORY_BOARD,))
        payload = await request.json()
        if "approve" not in payload:
            raise ValidationError("missing field approve")
        trace = platform.tracing.decide(
            request_id, bool(payload["approve"]),
            decided_by=str(payload.get("decided_by", "")))
        return trace.summary()

    @app.get("/routing/trace/{request_id}/result")
    def trace_result(request_id: str, role: str = Depends(role_for)):
        require(role, (ROLE_HEALTH_CENTER, ROLE_ADVISORY_BOARD))
        return platform.tracing.result(request_id).to_dict()

    @app.get("/routing/ops/liveliness-summary")
    def liveliness_summary(hours: int = 72, role: str = Depends(role_for)):
        require(role, (ROLE_OPS,))
        if not 1 <= hours <= 24 * 14:
            raise ValidationError("hours must be between 1 and 336")
        return {"hours": platform.liveliness_store.hourly_summary(
            hours, platform.clock.now())}

    @app.get("/routing/ops/registrations")
    def registrations(days: int = 14, role: str = Depends(role_for)):
        require(role, (ROLE_OPS,))
        if not 1 <= days <= 366:
            raise ValidationError("days must be between 1 and 366")
        return platform.identity.registration_series(days)

    @app.post("/routing/admin/issue-codes")
    async def issue_codes(request: Request, role: str = Depends(role_for)):
        require(role, (ROLE_OPS, ROLE_HEALTH_CENTER))
        payload = await request.json()
        count = int(payload.get("count", 1))
        return {"codes": platform.identity.issue_codes(count)}

    @app.post("/routing/admin/run-jobs")
    def run_jobs(role: str = Depends(role_for)):
        require(role, (ROLE_OPS,))
        platform.run_preprocessing(include_open=True)
        return platform.run_daily_jobs()

    # -- test hooks ----------------------------------------------------------

    if platform.config.expose_test_hooks:
        @app.get("/debug/otp-outbox")
        def otp_outbox():
            return {"messages": platform.identity.otp_outbox}

        @app.post("/debug/expire-otp")
        async def expire_otp(request: Request):
            payload = await request.json()
            platform.identity.expire_otp(str(payload.get("unique_id", "")))
            return {"expired": True}

        @app.get("/debug/demo-summary")
        def demo_summary():
            if platform.demo_summary is None:
                raise NotFoundError("no demo data was seeded")
            return platform.demo_summary

    return app
