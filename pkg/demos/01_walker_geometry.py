"""Walker-Delta geometry walkthrough: build a constellation, propagate the
orbits, inspect the grid neighbors, and watch a ground station's access
satellite change over time.

Run:  python3 demos/01_walker_geometry.py
"""

import math

import numpy as np

from leoroute.constellation import (
    GroundStation,
    WalkerConfig,
    access_satellite,
    build_walker,
    elevation_angle,
    great_circle_distance,
    grid_neighbors,
    gs_id,
    propagate,
    sat_id,
    satellite_position,
)

cfg = WalkerConfig(num_planes=12, sats_per_plane=8, altitude_m=600e3,
                   inclination_deg=53.0, phasing_factor=1)
constellation = build_walker(cfg)
print(f"constellation: {cfg.num_planes} planes x {cfg.sats_per_plane} sats "
      f"= {constellation.num_satellites} satellites")
print(f"orbital period: {cfg.period_s / 60:.1f} min, "
      f"mean motion {math.degrees(cfg.mean_motion):.4f} deg/s")

# positions stay on the shell |r| = R_E + h at all times
for t in (0.0, 300.0, cfg.period_s):
    pos = propagate(constellation, t)
    radius = np.linalg.norm(pos, axis=1)
    print(f"t={t:8.1f}s  radius spread: "
          f"{radius.min() / 1e3:.3f} .. {radius.max() / 1e3:.3f} km")

# the four grid neighbors (N, S, W, E) wrap around plane and seam boundaries
sat = sat_id(0)
n, s, w, e = grid_neighbors(constellation, sat)
print(f"\nneighbors of satellite 0: N={n.index} S={s.index} W={w.index} E={e.index}")
pos0 = propagate(constellation, 0.0)
for name, nbr in (("N", n), ("S", s), ("W", w), ("E", e)):
    d = np.linalg.norm(pos0[nbr.index] - pos0[0]) / 1e3
    print(f"  {name}: satellite {nbr.index:3d} at {d:7.1f} km")

# ground station visibility over ten minutes
lux = GroundStation(gs_id(0), 49.6116, 6.1319, min_elevation_deg=10.0,
                    name="luxembourg")
print("\naccess satellite for Luxembourg (min elevation 10 deg):")
last = None
for t in np.arange(0.0, 600.0, 30.0):
    acc = access_satellite(lux, constellation, float(t))
    if acc != last:
        el = (elevation_angle(lux, satellite_position(constellation, acc, float(t)),
                              float(t)) if acc else float("nan"))
        print(f"  t={t:6.0f}s -> sat {acc.index if acc else None} "
              f"(elevation {el:.1f} deg)")
        last = acc

d = great_circle_distance((49.6116, 6.1319), (39.9042, 116.4074))
print(f"\nLuxembourg to Beijing great-circle distance: {d / 1e3:.0f} km")
