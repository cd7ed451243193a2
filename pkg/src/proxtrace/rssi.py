"""Signal-strength statistics and proximity-threshold calibration.

Calibration input is a measurement campaign: pairs of phones held at a
known distance for a while, logging RSSI. Per (pair, distance) the
single strongest and single weakest readings are dropped as outliers,
the remainder pools into one empirical distribution per distance, and
the working threshold is the RSSI that best separates the close
distribution from the far one: the value maximizing

    (fraction of close-range samples at or above r)
  - (fraction of far-range samples at or above r)

which is the true-positive rate minus the false-positive rate of the
rule "call it close when rssi >= r". Ties break toward the most
negative candidate.

A synthetic measurement campaign ships with the package so a fresh
deployment can exercise the calibration path end to end.
"""

from __future__ import annotations

import csv
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ValidationError

DEFAULT_SUPPORT = range(-100, -39)  # candidate thresholds, ascending


@dataclass(frozen=True)
class RssiSample:
    pair_id: str
    distance_m: float
    rssi: int


def load_samples_csv(path: Path | str) -> list[RssiSample]:
    samples = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"pair_id", "distance_m", "rssi"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValidationError(
                f"sample CSV must have columns {sorted(required)}")
        for row in reader:
            samples.append(RssiSample(
                pair_id=row["pair_id"],
                distance_m=float(row["distance_m"]),
                rssi=int(row["rssi"])))
    return samples


def write_samples_csv(samples: Iterable[RssiSample], path: Path | str) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair_id", "distance_m", "rssi"])
        for sample in samples:
            writer.writerow([sample.pair_id, sample.distance_m, sample.rssi])


def bundled_campaign_path() -> Path:
    """Path of the synthetic measurement campaign shipped in the package."""
    return Path(resources.files("proxtrace") / "data" / "rssi_campaign.csv")


def drop_pair_outliers(samples: Sequence[RssiSample]) -> list[RssiSample]:
    """Removes one strongest and one weakest reading per (pair, distance)
    group, provided the group keeps at least one sample. Groups of one
    or two pass through untouched."""
    groups: dict[tuple[str, float], list[RssiSample]] = {}
    for sample in samples:
        groups.setdefault((sample.pair_id, sample.distance_m), []).append(sample)
    kept: list[RssiSample] = []
    for group in groups.values():
        if len(group) <= 2:
            kept.extend(group)
            continue
        ordered = sorted(group, key=lambda s: s.rssi)
        kept.extend(ordered[1:-1])
    return kept


class EmpiricalCdf:
    """Empirical distribution of integer RSSI readings."""

    def __init__(self, values: Iterable[int]):
        self.values = sorted(int(v) for v in values)
        if not self.values:
            raise ValidationError("empty sample set")

    @classmethod
    def from_samples(cls, samples: Iterable[RssiSample],
                     distance_m: float) -> "EmpiricalCdf":
        return cls(s.rssi for s in samples if s.distance_m == distance_m)

    @property
    def support(self) -> list[int]:
        return sorted(set(self.values))

    @property
    def total(self) -> int:
        return len(self.values)

    def count_at_or_above(self, rssi: int) -> int:
        return len(self.values) - bisect_left(self.values, rssi)

    def fraction_at_or_below(self, rssi: int) -> float:
        return bisect_right(self.values, rssi) / len(self.values)

    def fraction_at_or_above(self, rssi: int) -> float:
        return self.count_at_or_above(rssi) / len(self.values)


def discriminating_threshold(close_cdf: EmpiricalCdf, far_cdf: EmpiricalCdf,
                             support: Iterable[int] = DEFAULT_SUPPORT) -> int:
    """RSSI threshold maximizing close-range hits minus far-range hits.

    Scans the candidate support in ascending order with a strict
    improvement rule, so ties resolve to the most negative candidate.
    """
    candidates = list(support)
    if not candidates:
        raise ValidationError("empty candidate support")
    best_rssi = candidates[0]
    best_diff: int | None = None
    for rssi in candidates:
        # cross-multiplied integer counts: float subtraction can break
        # exact ties between candidates and flip the argmax
        diff = (close_cdf.count_at_or_above(rssi) * far_cdf.total
                - far_cdf.count_at_or_above(rssi) * close_cdf.total)
        if best_diff is None or diff > best_diff:
            best_diff = diff
            best_rssi = rssi
    return best_rssi


def classify_proximity(rssi: int, delta: int) -> bool:
    """True when a reading counts as near under threshold delta."""
    return rssi >= delta


@dataclass(frozen=True)
class CalibrationResult:
    threshold: int
    close_distance_m: float
    far_distance_m: float
    samples_used: int
    samples_dropped: int
    separation: float  # TP minus FP at the chosen threshold


def calibrate_threshold(samples: Sequence[RssiSample],
                        close_distance_m: float = 2.0,
                        far_distance_m: float = 4.0,
                        support: Iterable[int] = DEFAULT_SUPPORT
                        ) -> CalibrationResult:
    cleaned = drop_pair_outliers(samples)
    close = EmpiricalCdf.from_samples(cleaned, close_distance_m)
    far = EmpiricalCdf.from_samples(cleaned, far_distance_m)
    threshold = discriminating_threshold(close, far, support)
    return CalibrationResult(
        threshold=threshold,
        close_distance_m=close_distance_m,
        far_distance_m=far_distance_m,
        samples_used=len(close.values) + len(far.values),
        samples_dropped=len(samples) - len(cleaned),
        separation=(close.fraction_at_or_above(threshold)
                    - far.fraction_at_or_above(threshold)))
