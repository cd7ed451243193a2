"""Generates the bundled synthetic RSSI measurement campaign.

The campaign is fully determined by three survival tables (percent of
samples at or above each integer RSSI) chosen so that, after per-pair
outlier dropping, the pooled distributions satisfy exactly:

    fraction of 1 m samples at or below -75  = 0.23
    fraction of 2 m samples at or below -75  = 0.54
    fraction of 4 m samples at or below -75  = 0.84
    fraction of 2 m samples at or above -78  = 0.59
    fraction of 4 m samples at or above -78  = 0.29

and the difference (2 m at-or-above) minus (4 m at-or-above) attains its
maximum 0.30 at -78 (a second attainment at -74 exercises the
most-negative tie-break). Each distance yields 100 designed samples
split over 5 pairs; every pair also gets one -120 and one -15 sentinel
reading, which are exactly what per-pair outlier dropping removes.

Run from the repository root:

    python tools/make_rssi_campaign.py
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from proxtrace.rssi import (EmpiricalCdf, RssiSample, discriminating_threshold,
                            drop_pair_outliers, write_samples_csv)

OUT = Path(__file__).resolve().parents[1] / "src/proxtrace/data/rssi_campaign.csv"

SUPPORT = list(range(-100, -39))

# percent of samples at or above r, for r = -100..-40
SURVIVAL = {
    1.0: [100, 100, 99, 99, 98, 98, 97, 97, 96, 96, 95, 94, 93, 92, 91, 90,
          89, 87, 86, 84, 83, 81, 80, 79, 78, 78, 77, 74, 71, 68, 64, 60,
          55, 50, 45, 40, 35, 30, 26, 22, 18, 15, 12, 10, 8, 6, 5, 4,
          3, 2, 2, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0],
    2.0: [100, 100, 100, 99, 99, 98, 98, 97, 96, 95, 94, 93, 91, 89, 87, 84,
          81, 77, 73, 69, 65, 62, 59, 55, 52, 49, 46, 41, 37, 33, 29, 26,
          23, 20, 17, 15, 13, 11, 10, 9, 8, 7, 6, 5, 5, 4, 4, 3,
          3, 2, 2, 2, 1, 1, 1, 1, 1, 0, 0, 0, 0],
    4.0: [100, 100, 99, 98, 97, 96, 95, 93, 91, 89, 87, 84, 81, 77, 73, 68,
          63, 58, 52, 46, 40, 34, 29, 26, 23, 20, 16, 13, 11, 9, 7, 6,
          5, 4, 3, 2, 2, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0,
          0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
}

PAIRS_PER_DISTANCE = 5
SENTINELS = (-120, -15)


def expand(survival: list[int]) -> list[int]:
    """Turns a survival table into the sorted list of 100 sample values."""
    values = []
    for i, r in enumerate(SUPPORT):
        nxt = survival[i + 1] if i + 1 < len(survival) else 0
        values.extend([r] * (survival[i] - nxt))
    assert len(values) == 100, len(values)
    return values


def main() -> None:
    samples: list[RssiSample] = []
    for distance, survival in sorted(SURVIVAL.items()):
        assert len(survival) == len(SUPPORT)
        assert all(a >= b for a, b in zip(survival, survival[1:]))
        tag = f"p{int(distance)}m"
        values = expand(survival)
        for index, value in enumerate(values):
            samples.append(RssiSample(
                pair_id=f"{tag}-{index % PAIRS_PER_DISTANCE}",
                distance_m=distance, rssi=value))
        for pair in range(PAIRS_PER_DISTANCE):
            for sentinel in SENTINELS:
                samples.append(RssiSample(
                    pair_id=f"{tag}-{pair}", distance_m=distance,
                    rssi=sentinel))
    samples.sort(key=lambda s: (s.distance_m, s.pair_id, s.rssi))

    cleaned = drop_pair_outliers(samples)
    cdf1 = EmpiricalCdf.from_samples(cleaned, 1.0)
    cdf2 = EmpiricalCdf.from_samples(cleaned, 2.0)
    cdf4 = EmpiricalCdf.from_samples(cleaned, 4.0)
    checks = [
        ("F1(-75)", cdf1.fraction_at_or_below(-75), 0.23),
        ("F2(-75)", cdf2.fraction_at_or_below(-75), 0.54),
        ("F4(-75)", cdf4.fraction_at_or_below(-75), 0.84),
        ("S2(-78)", cdf2.fraction_at_or_above(-78), 0.59),
        ("S4(-78)", cdf4.fraction_at_or_above(-78), 0.29),
    ]
    for name, got, want in checks:
        assert abs(got - want) < 1e-9, (name, got, want)
    assert discriminating_threshold(cdf2, cdf4) == -78
    diffs = {r: cdf2.fraction_at_or_above(r) - cdf4.fraction_at_or_above(r)
             for r in SUPPORT}
    peak = max(diffs.values())
    assert abs(peak - 0.30) < 1e-9
    assert min(r for r, d in diffs.items() if abs(d - peak) < 1e-9) == -78

    OUT.parent.mkdir(parents=True, exist_ok=True)
    write_samples_csv(samples, OUT)
    print(f"wrote {len(samples)} samples to {OUT}")


if __name__ == "__main__":
    main()
