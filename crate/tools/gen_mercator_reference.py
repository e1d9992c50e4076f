#!/usr/bin/env python3
"""Regenerate the frozen high-precision Web Mercator reference table.

Evaluates the spherical forward projection with mpmath at 60 decimal
digits for a fixed set of coordinates and prints a Rust array literal.
The frozen copy lives in crates/core/tests/acceptance.rs; rerun this
script only if the table layout needs to change, and paste the output
over the existing constant.
"""

import random

import mpmath as mp

mp.mp.dps = 60

R = mp.mpf(6378137)


def forward(lat_deg: float, lon_deg: float):
    lat = mp.radians(mp.mpf(lat_deg))
    lon = mp.radians(mp.mpf(lon_deg))
    x = R * lon
    y = R * mp.log(mp.tan(mp.pi / 4 + lat / 2))
    return x, y


def main():
    rng = random.Random(0xB57A)
    rows = []
    for _ in range(50):
        # Short decimals so the Rust literal parses to the exact same f64.
        lat = round(rng.uniform(-85.0, 85.0), 4)
        lon = round(rng.uniform(-180.0, 180.0), 4)
        rows.append((lat, lon))

    print("const MERCATOR_REFERENCE: [(f64, f64, f64, f64); 50] = [")
    for lat, lon in rows:
        x, y = forward(lat, lon)
        print(f"    ({lat}, {lon}, {mp.nstr(x, 17)}, {mp.nstr(y, 17)}),")
    print("];")

    x180, _ = forward(0.0, 180.0)
    print(f"// antimeridian x at the equator: {mp.nstr(x180, 20)}")


if __name__ == "__main__":
    main()
