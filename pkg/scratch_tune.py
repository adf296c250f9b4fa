"""Scratch: tune default-scene constants (slab thickness, target) against the
acceptance windows. Not part of the package."""
import dataclasses
import math
import sys

import numpy as np

import bipnav as b
from bipnav.geometry import Point3H
from bipnav.dlt import FiducialSet

BASE_XY = [
    (-30.0, -30.0), (30.0, -30.0), (30.0, 30.0), (-30.0, 30.0),
    (-18.0, 8.0), (22.0, -12.0), (5.0, 28.0), (-25.0, -5.0), (12.0, 15.0), (28.0, 5.0),
]
# z pattern in units of half-thickness
Z_PATTERN = [-1.0, 1.0, -1.0, 1.0, 0.5, -0.75, 1.0, -0.25, -1.0, 0.25]


def plate(h):
    return FiducialSet(
        points=tuple(Point3H(x, y, h * z) for (x, y), z in zip(BASE_XY, Z_PATTERN)),
        name=f"plate-h{h}",
    )


def scan(h, target, trials=2000):
    cfg = b.default_config()
    cfg = dataclasses.replace(cfg, fiducials=plate(h), target_mm=target, trials=trials)

    out = {}
    for sigma in (2.0, 0.1):
        c = b.scenario.with_noise(cfg, sigma)
        batch = b.run_batch(c, workers=1)
        mc = b.axis_stats(batch.outcomes, c.target_point())
        mean, cov = b.analytic_prediction(c)
        ana_std = cov.axis_std()
        ratio = mc.std / ana_std
        out[sigma] = dict(
            fail=len(batch.failures),
            mc_std=mc.std, ana_std=ana_std, ratio=ratio,
            mc_mean=mc.mean, ana_mean=mean.xyz(),
            e3d=b.summarize(batch.e3d()),
        )
    return out


def fmt(v):
    return "[" + " ".join(f"{x:8.4f}" for x in v) + "]"


if __name__ == "__main__":
    hs = [float(x) for x in sys.argv[1].split(",")] if len(sys.argv) > 1 else [2, 4, 6, 8]
    target = tuple(float(x) for x in sys.argv[2].split(",")) if len(sys.argv) > 2 else (100.0, 100.0, 50.0)
    trials = int(sys.argv[3]) if len(sys.argv) > 3 else 1000
    print(f"target={target} trials={trials}")
    for h in hs:
        r = scan(h, target, trials)
        r2, r01 = r[2.0], r[0.1]
        z_dominant_mc = r2["mc_std"][2] > max(r2["mc_std"][0], r2["mc_std"][1])
        z_dominant_ana = r2["ana_std"][2] > max(r2["ana_std"][0], r2["ana_std"][1])
        print(f"h={h:5.2f} | s2: fail={r2['fail']:4d} mc={fmt(r2['mc_std'])} ana={fmt(r2['ana_std'])} "
              f"ratio={fmt(r2['ratio'])} Zdom mc/ana={z_dominant_mc}/{z_dominant_ana}")
        print(f"        | s0.1: fail={r01['fail']:3d} ratio={fmt(r01['ratio'])} "
              f"mean_e3d(s2)={r2['e3d'].mean:.4f} p95={r2['e3d'].p95:.4f}")
