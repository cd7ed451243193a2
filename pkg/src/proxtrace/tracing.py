"""Consent-gated contact tracing.

A trace request moves through a strict lifecycle:

    submitted -> consent-pending -> consented -> approved -> completed
                                              -> rejected

Submission verifies the subject (unique id, device-id suffix, phone on
file) and immediately issues an OTP to the subject's phone, so the
stored state is consent-pending. Only the subject can move it to
consented by returning the OTP. Only a review decision can approve or
reject it, and the trace itself runs only from approved. There is no
other path to execution.

Results are de-identified before they leave this module: hop members
resolve to invite codes, devices that are not registered users (beacons,
strangers) drop out, and several device ids belonging to one invite code
merge into one entry with their durations summed.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable

from . import wire
from .clock import Clock
from .config import PlatformConfig
from .errors import (NotFoundError, OtpError, StateError, ValidationError)
from .identity import IdentityService
from .tempgraph import IntervalGraph, minute_floor, t_bfs


class TraceState(str, Enum):
    SUBMITTED = "submitted"
    CONSENT_PENDING = "consent-pending"
    CONSENTED = "consented"
    APPROVED = "approved"
    REJECTED = "rejected"
    COMPLETED = "completed"


@dataclass(frozen=True)
class TraceResultEntry:
    invite_code: str
    contact_minutes: int


@dataclass
class TraceResult:
    request_id: str
    window: tuple[int, int]
    executed_at: int
    hop1: list[TraceResultEntry] = field(default_factory=list)
    hop2: list[TraceResultEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "window": list(self.window),
            "executed_at": self.executed_at,
            "hop1": [asdict(e) for e in self.hop1],
            "hop2": [asdict(e) for e in self.hop2],
        }


@dataclass
class TraceRequest:
    request_id: str
    unique_id: str          # never serialized toward the portal
    window: tuple[int, int]
    clinical: dict
    state: TraceState
    submitted_at: int
    consented_at: int | None = None
    decided_at: int | None = None
    decided_by: str | None = None
    completed_at: int | None = None
    result: TraceResult | None = None

    def summary(self) -> dict:
        """Portal-safe view: no subject identifiers of any kind."""
        return {
            "request_id": self.request_id,
            "window": list(self.window),
            "clinical": self.clinical,
            "state": self.state.value,
            "submitted_at": self.submitted_at,
            "consented_at": self.consented_at,
            "decided_at": self.decided_at,
            "decided_by": self.decided_by,
            "completed_at": self.completed_at,
            "has_result": self.result is not None,
        }


GraphProvider = Callable[[int, int], IntervalGraph]


class TracingService:
    def __init__(self, config: PlatformConfig, clock: Clock,
                 identity: IdentityService, graph_provider: GraphProvider):
        self.config = config
        self.clock = clock
        self.identity = identity
        self.graph_provider = graph_provider
        self._requests: dict[str, TraceRequest] = {}
        self._lock = threading.RLock()
        self._journal = Path(config.data_dir) / "tracing" / "requests.jsonl"
        self._journal.parent.mkdir(parents=True, exist_ok=True)
        self._load()

    # -- persistence -----------------------------------------------------

    def _load(self) -> None:
        if not self._journal.exists():
            return
        for line in self._journal.read_text(encoding="utf-8").splitlines():
            row = json.loads(line)
            result = row.pop("result", None)
            request = TraceRequest(
                **{**row, "state": TraceState(row["state"]),
                   "window": tuple(row["window"])})
            if result is not None:
                request.result = TraceResult(
                    request_id=result["request_id"],
                    window=tuple(result["window"]),
                    executed_at=result["executed_at"],
                    hop1=[TraceResultEntry(**e) for e in result["hop1"]],
                    hop2=[TraceResultEntry(**e) for e in result["hop2"]])
            self._requests[request.request_id] = request

    def _persist(self, request: TraceRequest) -> None:
        row = {
            "request_id": request.request_id,
            "unique_id": request.unique_id,
            "window": list(request.window),
            "clinical": request.clinical,
            "state": request.state.value,
            "submitted_at": request.submitted_at,
            "consented_at": request.consented_at,
            "decided_at": request.decided_at,
            "decided_by": request.decided_by,
            "completed_at": request.completed_at,
            "result": request.result.to_dict() if request.result else None,
        }
        with self._journal.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    # -- lifecycle ---------------------------------------------------------

    def submit(self, unique_id: str, device_suffix: str, phone: str,
               window: tuple[int, int], clinical: dict | None = None
               ) -> TraceRequest:
        now = self.clock.now()
        t_start, t_end = int(window[0]), int(window[1])
        if t_end <= t_start:
            raise ValidationError("trace window is empty")
        max_back = self.config.trace_window_max_days * 86400
        if t_start < now - max_back:
            raise ValidationError(
                f"trace window starts more than "
                f"{self.config.trace_window_max_days} days ago")
        if not self.identity.verify_subject(unique_id, device_suffix, phone):
            raise ValidationError(
                "subject details do not cross-match any registered identity")
        with self._lock:
            request = TraceRequest(
                request_id=uuid.uuid4().hex,
                unique_id=unique_id,
                window=(minute_floor(t_start), minute_floor(t_end)),
                clinical=dict(clinical or {}),
                state=TraceState.SUBMITTED,
                submitted_at=now)
            self._requests[request.request_id] = request
            self.identity.issue_consent_otp(unique_id)
            request.state = TraceState.CONSENT_PENDING
            self._persist(request)
            return request

    def get(self, request_id: str) -> TraceRequest:
        request = self._requests.get(request_id)
        if request is None:
            raise NotFoundError(f"unknown trace request {request_id}")
        return request

    def record_consent(self, request_id: str, otp: str) -> TraceRequest:
        with self._lock:
            request = self.get(request_id)
            if request.state != TraceState.CONSENT_PENDING:
                raise StateError(
                    f"consent not expected in state {request.state.value}")
            self.identity.verify_consent_otp(request.unique_id, otp)
            request.state = TraceState.CONSENTED
            request.consented_at = self.clock.now()
            self._persist(request)
            return request

    def reissue_consent_otp(self, request_id: str) -> TraceRequest:
        """Fresh challenge after an expired or exhausted one."""
        with self._lock:
            request = self.get(request_id)
            if request.state != TraceState.CONSENT_PENDING:
                raise StateError(
                    f"no consent outstanding in state {request.state.value}")
            self.identity.issue_consent_otp(request.unique_id)
            self._persist(request)
            return request

    def queue(self) -> list[dict]:
        with self._lock:
            requests = sorted(self._requests.values(),
                              key=lambda r: (r.submitted_at, r.request_id))
            return [r.summary() for r in requests]

    def decide(self, request_id: str, approve: bool,
               decided_by: str) -> TraceRequest:
        """Review decision. Approval executes the trace immediately."""
        if not decided_by.strip():
            raise ValidationError("decided_by must identify the reviewer")
        with self._lock:
            request = self.get(request_id)
            if request.state != TraceState.CONSENTED:
                raise StateError(
                    f"cannot decide a request in state {request.state.value}")
            request.decided_at = self.clock.now()
            request.decided_by = decided_by
            if not approve:
                request.state = TraceState.REJECTED
                self._persist(request)
                return request
            request.state = TraceState.APPROVED
            self._persist(request)
            self._execute(request)
            return request

    def result(self, request_id: str) -> TraceResult:
        request = self.get(request_id)
        if request.state != TraceState.COMPLETED or request.result is None:
            raise StateError(
                f"no result: request is in state {request.state.value}")
        return request.result

    # -- execution ---------------------------------------------------------

    def _execute(self, request: TraceRequest) -> None:
        if request.state != TraceState.APPROVED:
            raise StateError("trace can only run from the approved state")
        t_start, t_end = request.window
        seeds = self.identity.device_ids_for(request.unique_id)
        graph = self.graph_provider(t_start, t_end)
        hop1, hop2 = t_bfs(
            graph, seeds,
            delta=self.config.rssi_threshold,
            min_minutes=self.config.trace_contact_minutes,
            window=(t_start, t_end),
            exclude=wire.is_beacon_device_id)
        subject_code = self.identity.get_identity(request.unique_id).invite_code
        hop1_codes = self._to_codes(hop1.members, drop={subject_code})
        hop2_codes = self._to_codes(
            hop2.members, drop={subject_code} | {e.invite_code
                                                 for e in hop1_codes})
        request.result = TraceResult(
            request_id=request.request_id,
            window=request.window,
            executed_at=self.clock.now(),
            hop1=hop1_codes,
            hop2=hop2_codes)
        request.state = TraceState.COMPLETED
        request.completed_at = self.clock.now()
        self._persist(request)

    def _to_codes(self, members, drop: set[str]) -> list[TraceResultEntry]:
        """Resolves member devices to invite codes, dropping non-users and
        merging multiple devices of one user."""
        minutes_by_code: dict[str, int] = {}
        refs = self.identity.resolve_identity(
            [m.device_id for m in members])
        for member, ref in zip(members, refs):
            if ref.kind != "user" or ref.invite_code in drop:
                continue
            minutes_by_code[ref.invite_code] = (
                minutes_by_code.get(ref.invite_code, 0)
                + member.contact_minutes)
        return [TraceResultEntry(invite_code=code,
                                 contact_minutes=minutes_by_code[code])
                for code in sorted(minutes_by_code)]
