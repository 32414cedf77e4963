"""Smoke test for the lakemesh Python module.

Build and install it first, e.g. ``maturin develop -m crates/python/Cargo.toml``.
"""

import math
import pathlib
import sys
import tempfile

import lakemesh

SPEC = """\
bathymetry = paraboloid 20 2
bank = 0 8 0.5 2
bank = 8 16 0.5 2
samples = 500
lane_spacing = 3
seed = 4
"""


def main():
    e, n, zone, north = lakemesh.wgs84_to_utm(30.62, -96.34)
    lat, lon = lakemesh.utm_to_wgs84(e, n, zone, north)
    assert zone == 14 and north
    assert abs(lat - 30.62) < 1e-9 and abs(lon + 96.34) < 1e-9

    cube = lakemesh.TriMesh(
        [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)],
        [(0, 2, 1), (0, 3, 2), (4, 5, 6), (4, 6, 7), (0, 1, 5), (0, 5, 4),
         (1, 2, 6), (1, 6, 5), (2, 3, 7), (2, 7, 6), (3, 0, 4), (3, 4, 7)],
    )
    assert cube.watertight()[0]
    assert cube.enclosed_volume() == 1.0
    assert cube.flipped().enclosed_volume() == -1.0

    try:
        lakemesh.TriMesh(cube.vertices, cube.faces[:-1]).enclosed_volume()
        raise AssertionError("open mesh accepted")
    except lakemesh.LakemeshError as err:
        assert str(err).startswith("not-watertight"), err

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        lakemesh.simulate(SPEC, tmp / "sim")
        log = (tmp / "sim" / "depth_log.txt").read_text()
        cloud = lakemesh.ingest(log)
        bed = lakemesh.reconstruct(cloud)
        print(cloud, bed)

        banks = sorted((tmp / "sim").glob("bank_*.ply"))
        parts = [bed]
        for path in banks:
            offset = tuple(float(x) for x in path.with_suffix(".offset").read_text().split())
            placed = lakemesh.georeference(lakemesh.TriMesh.read(path), offset, bed.frame)
            fixed, removed = lakemesh.repair(placed, clip_below=0.0, largest_component=True)
            assert removed > 0
            parts.append(fixed)
        water = lakemesh.close(lakemesh.merge(parts), lid=0.0)
        assert water.watertight()[0]

        report = lakemesh.run_pipeline(tmp / "sim" / "depth_log.txt", banks, tmp / "out")
        assert "watertight = true" in report

        closed = lakemesh.TriMesh.read(tmp / "out" / "closed.ply")
        curve = closed.stage_storage([-1.0, 0.0])
        want = 0.5 * math.pi * 20**2 * 2
        assert abs(curve[-1][1] - want) / want < 0.05, curve
        print("capacity at the waterline:", round(curve[-1][1], 1), "m3; analytic", round(want, 1))

    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
