"""Platform wiring: preprocessing lifecycle, daily jobs, demo seeding."""

from __future__ import annotations

import uuid

import pytest

from proxtrace import wire
from proxtrace.clock import ManualClock
from proxtrace.config import PlatformConfig
from proxtrace.demo import seed_demo
from proxtrace.ingest.records import EdgeRow, GpsPoint, LivelinessReport
from proxtrace.platform import Platform

from conftest import BASE_TIME, PORTAL_TOKENS


def registered(platform):
    code = platform.identity.issue_codes(1)[0]
    return platform.identity.register_device(code)


def upload(platform, registration, epoch, contacts):
    batch = wire.ContactBatch(
        source_device_id=uuid.UUID(registration.device_id),
        records=(wire.ScanRecord(
            epoch=epoch,
            contacts=tuple(wire.Contact(uuid.UUID(d), r)
                           for d, r in contacts)),))
    body = wire.encode_contact_batch(batch)
    did = uuid.UUID(registration.device_id)
    ts = platform.clock.now()
    request = wire.SignedRequest(
        did, ts, wire.sign_request(did, ts, wire.derive_device_key(
            did, platform.config.auth_salt)))
    platform.ingest.add_contacts(request, body)


class TestPreprocessing:
    def test_closed_segments_extracted_and_archived(self, make_platform):
        clock = ManualClock(BASE_TIME)
        platform = make_platform(clock=clock)
        registration = registered(platform)
        peer = str(uuid.uuid4())
        upload(platform, registration, BASE_TIME, [(peer, -60)])
        clock.advance(platform.config.segment_seconds)  # closes the segment
        upload(platform, registration, clock.now(), [(peer, -61)])
        reports = platform.run_preprocessing()
        assert len(reports) == 1
        assert reports[0].rows_written == 1
        # the closed segment moved to the archive; the open one remains
        assert len(platform.segment_log.segments()) == 1
        csvs = platform.edge_store.files()
        assert len(csvs) == 1

    def test_include_open_extracts_in_place(self, make_platform):
        clock = ManualClock(BASE_TIME)
        platform = make_platform(clock=clock)
        registration = registered(platform)
        peer = str(uuid.uuid4())
        upload(platform, registration, BASE_TIME, [(peer, -60)])
        reports = platform.run_preprocessing(include_open=True)
        assert len(reports) == 1
        assert len(platform.segment_log.segments()) == 1  # not archived
        # more data lands in the same open segment; a rerun rewrites the
        # window CSV with the fuller content
        clock.advance(60)
        upload(platform, registration, clock.now(), [(peer, -61)])
        platform.run_preprocessing(include_open=True)
        t0, t1 = platform.segment_log.window_of(
            platform.segment_log.segments()[0])
        assert len(platform.edge_store.rows_in(t0, t1)) == 2

    def test_graph_builds_from_extracted_rows(self, make_platform):
        clock = ManualClock(BASE_TIME)
        platform = make_platform(clock=clock)
        registration = registered(platform)
        peer = str(uuid.uuid4())
        for minute in range(20):
            upload(platform, registration, BASE_TIME + minute * 60,
                   [(peer, -60)])
        platform.run_preprocessing(include_open=True)
        graph = platform.build_graph(BASE_TIME, BASE_TIME + 3600)
        annotation = graph.edge(registration.device_id, peer)
        assert annotation.observed_minutes() == 20


class TestDailyJobs:
    def test_scores_and_nudges_enqueued(self, make_platform):
        clock = ManualClock(BASE_TIME + 7200)
        platform = make_platform(clock=clock)
        busy = registered(platform)
        idle = registered(platform)
        rows = []
        for i in range(3):
            peer = str(uuid.uuid4())
            rows += [EdgeRow(BASE_TIME + m * 60, busy.device_id, peer, -60)
                     for m in range(20)]
        platform.edge_store.write_window(rows, BASE_TIME, BASE_TIME + 3600)
        # busy reached the daily scan target, idle did not
        day_start = (BASE_TIME + 7200) // 3600 * 3600 - 86400
        for hour in range(0, 86400, 3600):
            platform.liveliness_store.upsert(LivelinessReport(
                device_id=busy.device_id, hour_start=day_start + hour,
                stats={"scans_performed": 50}, received_at=clock.now()))
        summary = platform.run_daily_jobs()
        assert summary["scores"][busy.device_id] == 7
        assert summary["scores"][idle.device_id] == 10
        # busy: score alert only (50*24=1200 >= 1000). idle: score + nudge
        assert summary["alerts"] == 3
        busy_alerts = platform.alert_queue.deliver_pending(
            busy.device_id, clock.now())
        assert [a.alert_type for a in busy_alerts] == ["distancing-score"]
        idle_alerts = platform.alert_queue.deliver_pending(
            idle.device_id, clock.now())
        assert sorted(a.alert_type for a in idle_alerts) == \
            ["distancing-score", "scan-progress"]
        score_alert = next(a for a in busy_alerts
                           if a.alert_type == "distancing-score")
        assert score_alert.payload["score"] == 7
        assert score_alert.payload["proximate_count"] == 3

    def test_window_is_trailing_day_hour_floored(self, make_platform):
        clock = ManualClock(BASE_TIME + 1800)
        platform = make_platform(clock=clock)
        summary = platform.run_daily_jobs()
        t_end = BASE_TIME  # floor of BASE_TIME + 1800 to the hour
        assert summary["window"] == [t_end - 86400, t_end]

    def test_scores_use_current_device_after_reinstall(self, make_platform):
        platform = make_platform()
        first = registered(platform)
        code_phone = "+15551112222"
        code = platform.identity.issue_codes(1)[0]
        first = platform.identity.register_device(code, phone=code_phone)
        second = platform.identity.reinstall_device(code_phone, first.pin)
        summary = platform.run_daily_jobs()
        assert second.device_id in summary["scores"]
        assert first.device_id not in summary["scores"]


class TestHeatmapView:
    def test_no_gps_yields_empty(self, make_platform):
        platform = make_platform()
        assert platform.heatmap_for("unknown") == {"tiles": [],
                                                   "center": None}

    def test_center_follows_last_cell(self, make_platform):
        platform = make_platform()
        me = "device-me"
        platform.gps_store.add(GpsPoint(me, BASE_TIME - 60, "u4pruyd", "ct"))
        for i in range(6):
            platform.gps_store.add(GpsPoint(f"other-{i}", BASE_TIME - 30,
                                            "u4pruyd", "ct"))
        view = platform.heatmap_for(me)
        assert view["center"] == "u4pruyd"
        (tile,) = view["tiles"]
        assert tile["geohash"] == "u4pruyd"
        assert tile["display"] == "7"

    def test_small_count_tile_is_categorical(self, make_platform):
        platform = make_platform()
        platform.gps_store.add(GpsPoint("a", BASE_TIME - 60, "u4pruyd", "ct"))
        platform.gps_store.add(GpsPoint("b", BASE_TIME - 60, "u4pruyd", "ct"))
        view = platform.heatmap_for("a")
        assert view["tiles"][0]["display"] == "<5"


class TestDemoSeed:
    @pytest.fixture
    def demo_config(self, tmp_path, keypair):
        _, public_pem = keypair
        return PlatformConfig(
            data_dir=tmp_path / "demo",
            auth_salt="demo-auth",
            phone_salt="demo-phone",
            public_key_pem=public_pem,
            portal_tokens=dict(PORTAL_TOKENS),
            expose_test_hooks=True)

    def test_seeded_trace_matches_promised_summary(self, demo_config):
        summary = seed_demo(demo_config, now=BASE_TIME)
        assert set(summary["subjects"]) == {"ada", "bea", "cora"}
        platform = Platform(demo_config, clock=ManualClock(BASE_TIME))
        ada = summary["subjects"]["ada"]
        request = platform.tracing.submit(
            ada["unique_id"], ada["device_suffix"], ada["phone"],
            tuple(summary["suggested_window"]))
        otp = platform.identity.otp_outbox[-1]["otp"]
        platform.tracing.record_consent(request.request_id, otp)
        platform.tracing.decide(request.request_id, approve=True,
                                decided_by="demo-reviewer")
        result = platform.tracing.result(request.request_id)
        expected = summary["expected_hop1"]
        assert [(e.invite_code, e.contact_minutes) for e in result.hop1] == \
            [(expected["invite_code"], expected["contact_minutes"])]
        assert result.hop2 == []

    def test_seeded_history_feeds_ops_charts(self, demo_config):
        summary = seed_demo(demo_config, now=BASE_TIME)
        platform = Platform(demo_config, clock=ManualClock(BASE_TIME))
        series = platform.identity.registration_series(4)
        assert series["total_identities"] == 6  # 3 backdated + 3 scenario
        installs = sum(row["installs"] for row in series["days"])
        assert installs == 6
        hours = platform.liveliness_store.hourly_summary(72, BASE_TIME)
        reporting = [h for h in hours if h["devices_reporting"] > 0]
        assert len(reporting) >= 70  # backdated fleet reports by the hour
        assert summary["seeded_at"] == BASE_TIME
