"""Per-device analytics computed from interval graphs and GPS cells.

All functions are pure apart from ``proximity_alert``, which reads and
updates the caller-owned cooldown state. Privacy rules live here too:
the neighbourhood tree never links a hop-2 contact to the hop-1 contact
it was found through, and heatmap tiles never expose an exact device
count below the small-count floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ValidationError
from .ingest import geohash
from .ingest.records import Alert, GpsPoint
from .tempgraph import GAP, MINUTE, IntervalGraph

HOUR = 3600
DAY = 86400
SMALL_COUNT_FLOOR = 5  # heatmap counts below this render as a category

SCORE_CEILING = 10
MINUTES_PER_DAY = 1440


@dataclass(frozen=True)
class ScoreParams:
    """Thresholds for the distancing score.

    ``delta``: near iff rssi >= delta. ``min_minutes``: near-time at or
    above this makes a neighbor proximate. ``background_minutes``: total
    observed time at or above this marks a neighbor as background
    (a desk mate or roommate) and removes it before counting.
    """

    delta: int = -78
    min_minutes: int = 15
    background_minutes: int = 240

    def __post_init__(self):
        if self.min_minutes <= 0:
            raise ValidationError("min_minutes must be positive")
        if self.background_minutes <= self.min_minutes:
            raise ValidationError(
                "background_minutes must exceed min_minutes")


@dataclass(frozen=True)
class ScoreResult:
    device_id: str
    score: int
    proximate_count: int
    proximate: tuple[str, ...]
    background: tuple[str, ...]


def social_distancing_score(graph: IntervalGraph, device_id: str,
                            params: ScoreParams | None = None) -> ScoreResult:
    """Daily distancing score: 10 minus the number of distinct proximate
    neighbors, floored at zero. Background neighbors are set aside first
    and never counted."""
    params = params or ScoreParams()
    background: list[str] = []
    proximate: list[str] = []
    if device_id in graph.vertices:
        for other, annotation in graph.neighbors(device_id):
            if annotation.observed_minutes() >= params.background_minutes:
                background.append(other)
                continue
            if annotation.near_minutes(params.delta) >= params.min_minutes:
                proximate.append(other)
    count = len(proximate)
    return ScoreResult(
        device_id=device_id,
        score=max(0, SCORE_CEILING - count),
        proximate_count=count,
        proximate=tuple(sorted(proximate)),
        background=tuple(sorted(background)))


@dataclass(frozen=True)
class BucketRow:
    hour_start: int
    under_10: int
    from_10_to_20: int
    over_20: int


def hourly_contact_buckets(graph: IntervalGraph, device_id: str,
                           now: int) -> list[BucketRow]:
    """For each of the trailing 24 hours, how many neighbors fell in each
    contact-duration band: under 10 minutes, 10 to 20, over 20."""
    last_hour = now // HOUR * HOUR
    hours = [last_hour - i * HOUR for i in range(23, -1, -1)]
    per_hour: dict[int, list[int]] = {h: [] for h in hours}
    if device_id in graph.vertices:
        for _, annotation in graph.neighbors(device_id):
            for hour in hours:
                minutes = _observed_minutes_in(annotation, hour, hour + HOUR)
                if minutes > 0:
                    per_hour[hour].append(minutes)
    rows = []
    for hour in hours:
        under = sum(1 for m in per_hour[hour] if m < 10)
        mid = sum(1 for m in per_hour[hour] if 10 <= m <= 20)
        over = sum(1 for m in per_hour[hour] if m > 20)
        rows.append(BucketRow(hour_start=hour, under_10=under,
                              from_10_to_20=mid, over_20=over))
    return rows


def _observed_minutes_in(annotation, t_start: int, t_end: int) -> int:
    total = 0
    for sub in annotation.subintervals:
        if sub.rssi == GAP:
            continue
        lo = max(sub.start, t_start)
        hi = min(sub.end, t_end)
        if hi > lo:
            total += (hi - lo) // MINUTE
    return total


def proximity_alert(device_id: str, scan_contacts: list[tuple[str, int]],
                    scan_epoch: int, delta: int, trigger_count: int,
                    privacy_floor: int, cooldown_s: int,
                    cooldown_state: dict[str, int],
                    now: int) -> Alert | None:
    """Crowding check for one scan.

    Fires when the number of distinct devices at or above ``delta``
    reaches the effective trigger, which never sits below the privacy
    floor no matter how low the configured trigger is, so an alert can
    never tell the user they are near exactly one or two people. At most
    one alert per device per cooldown period, keyed on scan time.
    """
    effective = max(trigger_count, privacy_floor)
    near = {d for d, rssi in scan_contacts if rssi >= delta and d != device_id}
    if len(near) < effective:
        return None
    last = cooldown_state.get(device_id)
    if last is not None and scan_epoch - last < cooldown_s:
        return None
    cooldown_state[device_id] = scan_epoch
    return Alert(
        device_id=device_id,
        title="Crowded area",
        content=(f"At least {effective} devices were nearby; "
                 "consider moving apart."),
        alert_type="proximity",
        valid_from=now,
        valid_to=now + DAY,
        payload={"scan_epoch": scan_epoch, "near_count": len(near)})


@dataclass
class TreeNode:
    device_id: str
    contact_minutes: int
    children: list["TreeNode"] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"device_id": self.device_id,
                "contact_minutes": self.contact_minutes,
                "children": [c.to_dict() for c in self.children]}


def neighbourhood_tree(graph: IntervalGraph, device_id: str) -> TreeNode:
    """Two-level ego tree: the device, its direct contacts, and their
    onward contacts. Every second-level vertex hangs under exactly one
    first-level parent (its longest contact, ties to the smaller id), so
    the rendered tree never reveals which other first-level contacts a
    second-level vertex also met."""
    root = TreeNode(device_id=device_id, contact_minutes=0)
    if device_id not in graph.vertices:
        return root
    level1: dict[str, TreeNode] = {}
    for other, annotation in graph.neighbors(device_id):
        node = TreeNode(other, annotation.observed_minutes())
        level1[other] = node
        root.children.append(node)
    root.children.sort(key=lambda n: n.device_id)
    best_parent: dict[str, tuple[int, str]] = {}
    for middle in level1:
        for other, annotation in graph.neighbors(middle):
            if other == device_id or other in level1:
                continue
            claim = (annotation.observed_minutes(), middle)
            held = best_parent.get(other)
            if held is None or claim[0] > held[0] or (
                    claim[0] == held[0] and claim[1] < held[1]):
                best_parent[other] = claim
    for other, (minutes, middle) in sorted(best_parent.items()):
        level1[middle].children.append(TreeNode(other, minutes))
    for node in level1.values():
        node.children.sort(key=lambda n: n.device_id)
    return root


@dataclass(frozen=True)
class HeatTile:
    geohash: str
    display: str  # exact count as text, or the small-count category


def density_heatmap(points: list[GpsPoint], center_lat: float,
                    center_lon: float, area_m: float = 1500.0
                    ) -> list[HeatTile]:
    """Distinct devices per geohash cell around a center point.

    Cells whose device count is below the small-count floor display the
    category label instead of a number; the exact count is not part of
    the result at all.
    """
    half = area_m / 2.0
    lat_degree = half / 111320.0
    lon_degree = half / (111320.0 * max(0.01, math.cos(math.radians(center_lat))))
    devices_per_cell: dict[str, set[str]] = {}
    for point in points:
        lat, lon = geohash.cell_center(point.geohash)
        if abs(lat - center_lat) > lat_degree:
            continue
        if abs(lon - center_lon) > lon_degree:
            continue
        devices_per_cell.setdefault(point.geohash, set()).add(point.device_id)
    tiles = []
    for cell in sorted(devices_per_cell):
        count = len(devices_per_cell[cell])
        display = str(count) if count >= SMALL_COUNT_FLOOR \
            else f"<{SMALL_COUNT_FLOOR}"
        tiles.append(HeatTile(geohash=cell, display=display))
    return tiles


def scan_progress(scans_today: int, target: int = 1000,
                  possible: int = MINUTES_PER_DAY) -> dict:
    """Payload for the daily scan-coverage nudge."""
    scans_today = max(0, min(scans_today, possible))
    return {
        "scans_today": scans_today,
        "target": target,
        "possible": possible,
        "target_reached": scans_today >= target,
        "percent_of_target": round(100.0 * scans_today / target, 1),
    }
