"""Distancing score, buckets, crowding, trees, heatmap."""

from __future__ import annotations

import random

import pytest

from proxtrace import analytics
from proxtrace.analytics import (ScoreParams, density_heatmap,
                                 hourly_contact_buckets, neighbourhood_tree,
                                 proximity_alert, scan_progress,
                                 social_distancing_score)
from proxtrace.errors import ValidationError
from proxtrace.ingest import geohash
from proxtrace.ingest.records import EdgeRow, GpsPoint
from proxtrace.tempgraph import build_interval_graph

from conftest import DAY_START, worked_example_rows

H = 3600


def day_graph():
    return build_interval_graph(worked_example_rows(DAY_START), DAY_START,
                                DAY_START + 86400)


class TestScore:
    # worked example: delta -60, 30 near minutes, 180 background.
    # A's three hours with C total exactly 180 observed minutes, so A is
    # background; B (-50) and D (-55) both clear -60 for 30+ minutes.
    def test_worked_example_for_c(self):
        params = ScoreParams(delta=-60, min_minutes=30,
                             background_minutes=180)
        result = social_distancing_score(day_graph(), "C", params)
        assert result.background == ("A",)
        assert result.proximate == ("B", "D")
        assert result.proximate_count == 2

    def test_worked_example_score_value(self):
        params = ScoreParams(delta=-60, min_minutes=30,
                             background_minutes=180)
        assert social_distancing_score(day_graph(), "C", params).score == 8

    def test_defaults_for_c(self):
        result = social_distancing_score(day_graph(), "C")
        # defaults: delta -78, 15 minutes, 240 background. Nobody reaches
        # 240 observed minutes; A (-70 hour), B (-50) qualify as proximate,
        # D (-55 for 120 min) too.
        assert result.background == ()
        assert result.proximate == ("A", "B", "D")
        assert result.score == 7

    def test_background_removed_before_counting(self):
        rows = worked_example_rows(DAY_START)
        params = ScoreParams(delta=-60, min_minutes=30,
                             background_minutes=120)
        result = social_distancing_score(
            build_interval_graph(rows, DAY_START, DAY_START + 86400), "C",
            params)
        assert "D" in result.background
        assert "D" not in result.proximate

    def test_score_floors_at_zero(self):
        t0 = DAY_START
        rows = []
        for i in range(12):
            for minute in range(20):
                rows.append(EdgeRow(t0 + minute * 60, "me", f"n{i:02d}", -60))
        graph = build_interval_graph(rows, t0, t0 + H)
        result = social_distancing_score(graph, "me")
        assert result.proximate_count == 12
        assert result.score == 0

    def test_unknown_device_scores_ten(self):
        result = social_distancing_score(day_graph(), "nobody")
        assert result.score == 10
        assert result.proximate == ()

    def test_params_validated(self):
        with pytest.raises(ValidationError):
            ScoreParams(min_minutes=0)
        with pytest.raises(ValidationError):
            ScoreParams(min_minutes=30, background_minutes=30)


class TestBuckets:
    def test_bands_by_contact_minutes(self):
        t0 = DAY_START
        rows = []
        for minute in range(5):
            rows.append(EdgeRow(t0 + minute * 60, "me", "brief", -70))
        for minute in range(15):
            rows.append(EdgeRow(t0 + minute * 60, "me", "mid", -70))
        for minute in range(25):
            rows.append(EdgeRow(t0 + minute * 60, "me", "long", -70))
        graph = build_interval_graph(rows, t0, t0 + 86400)
        buckets = hourly_contact_buckets(graph, "me", now=t0 + 86400 - 1)
        assert len(buckets) == 24
        assert buckets[0].hour_start == t0
        assert (buckets[0].under_10, buckets[0].from_10_to_20,
                buckets[0].over_20) == (1, 1, 1)
        assert all(b.under_10 + b.from_10_to_20 + b.over_20 == 0
                   for b in buckets[1:])

    def test_contact_spanning_hours_counted_per_hour(self):
        t0 = DAY_START
        rows = [EdgeRow(t0 + 50 * 60 + i * 60, "me", "x", -70)
                for i in range(20)]  # minutes 50..69: 10 in each hour
        graph = build_interval_graph(rows, t0, t0 + 86400)
        buckets = hourly_contact_buckets(graph, "me", now=t0 + 2 * H)
        by_hour = {b.hour_start: b for b in buckets}
        assert by_hour[t0].from_10_to_20 == 1
        assert by_hour[t0 + H].from_10_to_20 == 1


class TestCrowding:
    def contacts(self, n, rssi=-60):
        return [(f"dev-{i}", rssi) for i in range(n)]

    def test_fires_at_effective_trigger(self):
        state: dict[str, int] = {}
        alert = proximity_alert("me", self.contacts(5), DAY_START, -78,
                                trigger_count=5, privacy_floor=3,
                                cooldown_s=3600, cooldown_state=state,
                                now=DAY_START)
        assert alert is not None
        assert alert.payload == {"scan_epoch": DAY_START, "near_count": 5}
        assert alert.valid_to - alert.valid_from == 86400

    def test_below_trigger_or_weak_does_not_fire(self):
        state: dict[str, int] = {}
        assert proximity_alert("me", self.contacts(4), DAY_START, -78, 5, 3,
                               3600, state, DAY_START) is None
        assert proximity_alert("me", self.contacts(9, rssi=-90), DAY_START,
                               -78, 5, 3, 3600, state, DAY_START) is None

    def test_privacy_floor_overrides_low_trigger(self):
        state: dict[str, int] = {}
        # configured trigger 1 would identify a single nearby person
        assert proximity_alert("me", self.contacts(2), DAY_START, -78,
                               trigger_count=1, privacy_floor=3,
                               cooldown_s=3600, cooldown_state=state,
                               now=DAY_START) is None
        alert = proximity_alert("me", self.contacts(3), DAY_START, -78,
                                trigger_count=1, privacy_floor=3,
                                cooldown_s=3600, cooldown_state=state,
                                now=DAY_START)
        assert alert is not None
        assert "3" in alert.content

    def test_cooldown_keyed_on_scan_epoch(self):
        state: dict[str, int] = {}
        assert proximity_alert("me", self.contacts(5), DAY_START, -78, 5, 3,
                               3600, state, DAY_START) is not None
        assert proximity_alert("me", self.contacts(5), DAY_START + 3599, -78,
                               5, 3, 3600, state, DAY_START) is None
        assert proximity_alert("me", self.contacts(5), DAY_START + 3600, -78,
                               5, 3, 3600, state, DAY_START) is not None

    def test_self_sighting_ignored(self):
        state: dict[str, int] = {}
        contacts = self.contacts(4) + [("me", -40)]
        assert proximity_alert("me", contacts, DAY_START, -78, 5, 3, 3600,
                               state, DAY_START) is None


class TestNeighbourhoodTree:
    def test_worked_example_shape(self):
        tree = neighbourhood_tree(day_graph(), "A")
        assert tree.device_id == "A"
        assert [c.device_id for c in tree.children] == ["C"]
        c_node = tree.children[0]
        assert c_node.contact_minutes == 180
        assert [g.device_id for g in c_node.children] == ["B", "D"]

    def test_single_parent_longest_contact_wins(self):
        t0 = DAY_START
        rows = []
        for minute in range(30):
            rows.append(EdgeRow(t0 + minute * 60, "me", "p1", -70))
            rows.append(EdgeRow(t0 + minute * 60, "me", "p2", -70))
        for minute in range(10):
            rows.append(EdgeRow(t0 + minute * 60, "p1", "kid", -70))
        for minute in range(20):
            rows.append(EdgeRow(t0 + minute * 60, "p2", "kid", -70))
        graph = build_interval_graph(rows, t0, t0 + H)
        tree = neighbourhood_tree(graph, "me")
        placements = {c.device_id: [g.device_id for g in c.children]
                      for c in tree.children}
        assert placements == {"p1": [], "p2": ["kid"]}

    def test_tie_goes_to_smaller_parent_id(self):
        t0 = DAY_START
        rows = []
        for minute in range(30):
            rows.append(EdgeRow(t0 + minute * 60, "me", "pa", -70))
            rows.append(EdgeRow(t0 + minute * 60, "me", "pb", -70))
        for minute in range(10):
            rows.append(EdgeRow(t0 + minute * 60, "pa", "kid", -70))
            rows.append(EdgeRow(t0 + minute * 60, "pb", "kid", -70))
        graph = build_interval_graph(rows, t0, t0 + H)
        tree = neighbourhood_tree(graph, "me")
        placements = {c.device_id: [g.device_id for g in c.children]
                      for c in tree.children}
        assert placements == {"pa": ["kid"], "pb": []}

    def test_every_second_level_vertex_appears_once(self):
        rng = random.Random(99)
        t0 = DAY_START
        for _ in range(20):
            vertices = [f"v{i}" for i in range(rng.randint(3, 10))]
            rows = []
            for _ in range(rng.randint(5, 120)):
                a, b = rng.sample(vertices, 2)
                rows.append(EdgeRow(t0 + rng.randrange(0, 60) * 60, a, b,
                                    rng.randint(-90, -50)))
            graph = build_interval_graph(rows, t0, t0 + H)
            ego = rng.choice(vertices)
            tree = neighbourhood_tree(graph, ego)
            level1 = [c.device_id for c in tree.children]
            level2 = [g.device_id for c in tree.children
                      for g in c.children]
            assert len(level2) == len(set(level2))
            assert not set(level2) & set(level1)
            assert ego not in level1 and ego not in level2

    def test_unknown_root(self):
        tree = neighbourhood_tree(day_graph(), "nobody")
        assert tree.children == []

    def test_to_dict_round_trip_shape(self):
        payload = neighbourhood_tree(day_graph(), "C").to_dict()
        assert payload["device_id"] == "C"
        assert {c["device_id"] for c in payload["children"]} == \
            {"A", "B", "D"}


class TestHeatmap:
    def make_points(self, cell_groups: dict[str, int]) -> list[GpsPoint]:
        points = []
        for cell, device_count in cell_groups.items():
            for i in range(device_count):
                points.append(GpsPoint(f"{cell}-d{i}", DAY_START, cell, "ct"))
        return points

    def test_counts_distinct_devices(self):
        center = geohash.cell_center("u4pruyd")
        points = self.make_points({"u4pruyd": 6})
        points.append(GpsPoint("u4pruyd-d0", DAY_START + 60, "u4pruyd", "ct"))
        tiles = density_heatmap(points, *center)
        assert tiles == [analytics.HeatTile("u4pruyd", "6")]

    def test_small_counts_categorical(self):
        center = geohash.cell_center("u4pruyd")
        tiles = density_heatmap(self.make_points({"u4pruyd": 4}), *center)
        assert tiles[0].display == "<5"
        assert not any(ch.isdigit() and ch != "5"
                       for ch in tiles[0].display)

    def test_boundary_exactly_five_shows_number(self):
        center = geohash.cell_center("u4pruyd")
        tiles = density_heatmap(self.make_points({"u4pruyd": 5}), *center)
        assert tiles[0].display == "5"

    def test_faraway_cells_excluded(self):
        center = geohash.cell_center("u4pruyd")
        points = self.make_points({"u4pruyd": 6, "tdr1v9q": 6})
        tiles = density_heatmap(points, *center)
        assert [t.geohash for t in tiles] == ["u4pruyd"]


class TestScanProgress:
    def test_payload(self):
        payload = scan_progress(450, target=1000)
        assert payload["target_reached"] is False
        assert payload["percent_of_target"] == 45.0

    def test_clamping_and_target(self):
        assert scan_progress(2000)["scans_today"] == 1440
        assert scan_progress(1440)["target_reached"] is True
        assert scan_progress(-5)["scans_today"] == 0
