"""Temporal interval graphs over proximity sightings.

Vertices are device ids; an undirected edge between two devices carries
the full time structure of their relationship inside a window: an
ordered list of disjoint subintervals, each annotated with the signal
strength observed during it, with gaps annotated as minus infinity.

Construction works at one-minute resolution. All sightings of a pair
within the same minute (either direction) collapse to the strongest
signal for that minute; runs of consecutive minutes with equal strength
merge into maximal subintervals; the edge's span runs from its first
observed minute to the end of its last one, and interior unobserved
minutes appear as the minus-infinity gap subintervals.

``t_bfs`` is the time-respecting reachability used by contact tracing:
hop-1 contacts share enough near-threshold minutes with a seed, hop-2
contacts share enough near minutes with a hop-1 contact *at or after*
the minute that hop-1 contact first got near a seed, so influence only
flows forward in time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .errors import ValidationError
from .ingest.records import EdgeRow

MINUTE = 60
GAP = float("-inf")


def minute_floor(ts: int) -> int:
    return ts // MINUTE * MINUTE


@dataclass(frozen=True)
class Subinterval:
    """Half-open [start, end) with a uniform signal strength; ``rssi`` is
    minus infinity for gaps where the pair was not observed."""

    start: int
    end: int
    rssi: float

    @property
    def minutes(self) -> int:
        return (self.end - self.start) // MINUTE


@dataclass
class EdgeAnnotation:
    span: tuple[int, int]
    subintervals: list[Subinterval]

    def observed_minutes(self) -> int:
        return sum(s.minutes for s in self.subintervals if s.rssi != GAP)

    def near_minutes(self, delta: float, t_start: int | None = None,
                     t_end: int | None = None) -> int:
        """Minutes inside [t_start, t_end) with strength at or above delta."""
        return sum(1 for _ in self.iter_near_minutes(delta, t_start, t_end))

    def iter_near_minutes(self, delta: float, t_start: int | None = None,
                          t_end: int | None = None) -> Iterator[int]:
        lo = self.span[0] if t_start is None else max(self.span[0], t_start)
        hi = self.span[1] if t_end is None else min(self.span[1], t_end)
        for sub in self.subintervals:
            if sub.rssi == GAP or sub.rssi < delta:
                continue
            start = max(sub.start, lo)
            end = min(sub.end, hi)
            for minute in range(start, end, MINUTE):
                yield minute

    def first_near_minute(self, delta: float, t_start: int | None = None,
                          t_end: int | None = None) -> int | None:
        for minute in self.iter_near_minutes(delta, t_start, t_end):
            return minute
        return None


def _edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass
class IntervalGraph:
    window: tuple[int, int]
    vertices: set[str] = field(default_factory=set)
    edges: dict[tuple[str, str], EdgeAnnotation] = field(default_factory=dict)

    def edge(self, a: str, b: str) -> EdgeAnnotation | None:
        return self.edges.get(_edge_key(a, b))

    def neighbors(self, vertex: str) -> Iterator[tuple[str, EdgeAnnotation]]:
        for (a, b), annotation in self.edges.items():
            if a == vertex:
                yield b, annotation
            elif b == vertex:
                yield a, annotation

    def degree(self, vertex: str) -> int:
        return sum(1 for _ in self.neighbors(vertex))


def build_interval_graph(rows: Iterable[EdgeRow], t_start: int,
                         t_end: int) -> IntervalGraph:
    """Builds the interval graph for sightings with ts in [t_start, t_end)."""
    if t_start % MINUTE or t_end % MINUTE:
        raise ValidationError("graph window must be minute-aligned")
    if t_end <= t_start:
        raise ValidationError("empty graph window")
    # strongest signal per (pair, minute); direction is irrelevant
    per_minute: dict[tuple[str, str], dict[int, int]] = {}
    graph = IntervalGraph(window=(t_start, t_end))
    for row in rows:
        if not t_start <= row.ts < t_end:
            continue
        if row.src == row.sink:
            continue
        key = _edge_key(row.src, row.sink)
        minute = minute_floor(row.ts)
        minutes = per_minute.setdefault(key, {})
        if minute not in minutes or row.rssi > minutes[minute]:
            minutes[minute] = row.rssi
        graph.vertices.add(row.src)
        graph.vertices.add(row.sink)
    for key, minutes in per_minute.items():
        graph.edges[key] = _annotate(minutes)
    return graph


def _annotate(minutes: dict[int, int]) -> EdgeAnnotation:
    ordered = sorted(minutes)
    first, last = ordered[0], ordered[-1]
    subintervals: list[Subinterval] = []
    cursor = first
    while cursor <= last:
        if cursor in minutes:
            rssi = minutes[cursor]
            end = cursor + MINUTE
            while end <= last and minutes.get(end) == rssi:
                end += MINUTE
            subintervals.append(Subinterval(cursor, end, float(rssi)))
        else:
            end = cursor + MINUTE
            while end <= last and end not in minutes:
                end += MINUTE
            subintervals.append(Subinterval(cursor, end, GAP))
        cursor = subintervals[-1].end
    return EdgeAnnotation(span=(first, last + MINUTE),
                          subintervals=subintervals)


@dataclass(frozen=True)
class ContactMember:
    device_id: str
    contact_minutes: int


@dataclass
class ContactSet:
    hop: int
    members: list[ContactMember]

    def device_ids(self) -> set[str]:
        return {m.device_id for m in self.members}


def t_bfs(graph: IntervalGraph, seeds: Iterable[str],
          delta: float, min_minutes: int,
          window: tuple[int, int] | None = None,
          exclude: Callable[[str], bool] | None = None
          ) -> tuple[ContactSet, ContactSet]:
    """Two-level time-respecting reachability from the seed devices.

    A device B is a hop-1 contact when some seed's edge to B has at
    least ``min_minutes`` minutes at or above ``delta`` inside the
    window. A device C is a hop-2 contact when some hop-1 contact B's
    edge to C has at least ``min_minutes`` such minutes starting no
    earlier than the first minute B was near any seed; contact with B
    before B met the seeds cannot have passed anything on.

    ``exclude`` drops vertices from membership (stationary beacons) but
    they still relay: an excluded hop-1 vertex can still produce hop-2
    members through its later contacts.

    Durations sum the qualifying minutes over every qualifying edge into
    the member, so a device near two seeds counts both relationships.
    """
    if min_minutes < 1:
        raise ValidationError("min_minutes must be at least 1")
    t_start, t_end = window if window is not None else graph.window
    seed_set = {s for s in seeds}
    excluded = exclude if exclude is not None else (lambda v: False)

    hop1_minutes: dict[str, int] = {}
    first_near: dict[str, int] = {}  # earliest minute a hop-1 vertex met a seed
    for seed in seed_set:
        if seed not in graph.vertices:
            continue
        for other, annotation in graph.neighbors(seed):
            if other in seed_set:
                continue
            near = annotation.near_minutes(delta, t_start, t_end)
            if near < min_minutes:
                continue
            first = annotation.first_near_minute(delta, t_start, t_end)
            hop1_minutes[other] = hop1_minutes.get(other, 0) + near
            if other not in first_near or first < first_near[other]:
                first_near[other] = first

    hop2_minutes: dict[str, int] = {}
    for middle, earliest in first_near.items():
        for other, annotation in graph.neighbors(middle):
            if other in seed_set or other in first_near:
                continue
            near = annotation.near_minutes(delta, earliest, t_end)
            if near >= min_minutes:
                hop2_minutes[other] = hop2_minutes.get(other, 0) + near

    def members(minutes: dict[str, int]) -> list[ContactMember]:
        return [ContactMember(device_id=v, contact_minutes=minutes[v])
                for v in sorted(minutes) if not excluded(v)]

    return (ContactSet(hop=1, members=members(hop1_minutes)),
            ContactSet(hop=2, members=members(hop2_minutes)))


def degree_centrality(graph: IntervalGraph) -> dict[str, int]:
    degrees = {v: 0 for v in graph.vertices}
    for a, b in graph.edges:
        degrees[a] += 1
        degrees[b] += 1
    return degrees


# -- serialization ---------------------------------------------------------

def graph_to_json(graph: IntervalGraph) -> dict:
    return {
        "window": list(graph.window),
        "vertices": sorted(graph.vertices),
        "edges": [
            {
                "a": a, "b": b,
                "span": list(annotation.span),
                "subintervals": [
                    [s.start, s.end, None if s.rssi == GAP else s.rssi]
                    for s in annotation.subintervals
                ],
            }
            for (a, b), annotation in sorted(graph.edges.items())
        ],
    }


def graph_from_json(payload: dict) -> IntervalGraph:
    graph = IntervalGraph(window=tuple(payload["window"]))
    graph.vertices = set(payload["vertices"])
    for edge in payload["edges"]:
        annotation = EdgeAnnotation(
            span=tuple(edge["span"]),
            subintervals=[
                Subinterval(start, end, GAP if rssi is None else float(rssi))
                for start, end, rssi in edge["subintervals"]
            ])
        graph.edges[_edge_key(edge["a"], edge["b"])] = annotation
    return graph


def save_graph(graph: IntervalGraph, path: Path) -> None:
    Path(path).write_text(json.dumps(graph_to_json(graph), indent=2),
                          encoding="utf-8")


def load_graph(path: Path) -> IntervalGraph:
    return graph_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
