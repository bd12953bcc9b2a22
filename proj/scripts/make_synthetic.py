#!/usr/bin/env python3
"""Regenerates the bundled synthetic dataset (data/synthetic).

Seven Delhi-like stations in two spatial groups, 24 monthly buckets over
2018-2019. The field is trend-dominated: a steady multi-month increase with a
faint seasonal wiggle, per-station level factors that decay log-linearly
along each transect (so pair ratios grow with pair distance), and small
multiplicative noise. Trend dominance matters: it makes the influence-ratio
statistics lag-resolved (a given ratio magnitude pins down the lag that
produced it), which is the regime where ratio-based interpolation is
informative. Roughly 10% of station-months are fully missing. Fully
deterministic: a fixed seed and only stdlib randomness.
"""

import argparse
import json
import math
import random
from pathlib import Path

KM_PER_DEG_LAT = 111.195  # mean earth radius 6371 km

# Log-ratio gradient along each transect: ln(f_i/f_j) = GRADIENT * distance_km,
# so the spatial influence ratio of a pair identifies its separation.
GRADIENT = 0.0316

# Two north-south transects. Station spacing within each transect is uneven so
# the pairwise distances (and hence the ratio bins) spread out.
NORTH_SPACING_KM = (3.5, 5.5, 4.0)
SOUTH_SPACING_KM = (4.6, 6.0)

YEARS = (2018, 2019)
SAMPLE_DAYS = (5, 15, 25)
SEED = 20180101
MISSING_FRACTION = 0.10

N_MONTHS = len(YEARS) * 12
GROWTH = 3.2  # total multiplicative growth over the 24 months


def build_stations():
    stations = []

    def transect(prefix, lat0, lon, f0, spacings):
        lat, f = lat0, f0
        stations.append((f"{prefix}1", round(lat, 6), lon, f))
        for i, gap_km in enumerate(spacings, start=2):
            lat -= gap_km / KM_PER_DEG_LAT
            f /= math.exp(GRADIENT * gap_km)
            stations.append((f"{prefix}{i}", round(lat, 6), lon, f))

    transect("N", 28.820, 77.12, 1.45, NORTH_SPACING_KM)
    transect("S", 28.470, 77.06, 0.84, SOUTH_SPACING_KM)
    return stations


STATIONS = build_stations()


def base_level(t: int) -> float:
    """Deterministic monthly level shared by all stations (before factors)."""
    trend = 80.0 * GROWTH ** (t / (N_MONTHS - 1))
    season = 1.0 + 0.006 * math.cos(2.0 * math.pi * ((t % 12) - 10.0) / 12.0)
    return trend * season


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out", default=str(Path(__file__).resolve().parent.parent / "data" / "synthetic")
    )
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rng = random.Random(SEED)

    months = [(y, m) for y in YEARS for m in range(1, 13)]
    station_months = [(sid, ym) for sid, *_ in STATIONS for ym in months]
    n_gaps = round(MISSING_FRACTION * len(station_months))
    gaps = set(rng.sample(station_months, n_gaps))

    obs_rows = ["station_id,timestamp,value"]
    for sid, _lat, _lon, factor in STATIONS:
        for t, (y, m) in enumerate(months):
            if (sid, (y, m)) in gaps:
                continue
            base = base_level(t) * factor
            for day in SAMPLE_DAYS:
                noise = math.exp(rng.gauss(0.0, 0.012))
                value = base * noise
                obs_rows.append(f"{sid},{y:04d}-{m:02d}-{day:02d},{value:.3f}")
    # One nonpositive reading: the ingester demotes it to missing with a
    # warning instead of failing.
    obs_rows.append("N1,2018-03-07,0.0")

    (out / "observations.csv").write_text("\n".join(obs_rows) + "\n")

    sta_rows = ["id,lat,lon"]
    for sid, lat, lon, _ in STATIONS:
        sta_rows.append(f"{sid},{lat:.6f},{lon:.6f}")
    (out / "stations.csv").write_text("\n".join(sta_rows) + "\n")

    config = {
        "observations": "data/synthetic/observations.csv",
        "stations": "data/synthetic/stations.csv",
        "out": "out/synthetic",
        "seed": 42,
        "threads": 1,
        "granularity": "1m",
        "cluster": {"radius_m": 18026.0, "linkage": "complete"},
        "gapfill": {
            "hidden": 8,
            "window": 6,
            "learning_rate": 0.05,
            "epochs": 120,
            "pooled": False,
        },
        "fit": {
            "max_lag": 6,
            "grid_h_steps": 200,
            "min_margin_bins": 5,
            "candidates": ["weibull", "gumbel", "frechet", "gev", "blended_weibull"],
        },
        "interpolate": {
            "mode": "normalized",
            "k_donors": 1,
            "cell_deg": 0.02,
            "bbox": [28.35, 28.85, 77.02, 77.18],
            "times": [0, 6, 11, 17, 23],
        },
        "evaluate": {"holdout_fraction": 0.1, "loso": True},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")

    n_obs = len(obs_rows) - 1
    print(f"wrote {len(STATIONS)} stations, {n_obs} observation rows, {n_gaps} month gaps")


if __name__ == "__main__":
    main()
