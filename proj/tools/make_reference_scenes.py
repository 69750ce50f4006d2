#!/usr/bin/env python3
"""Writes the bundled T-junction reference scenes to data/scenes/.

Road: a 78 m main road (12 m wide, y in [17, 29]) with a 12 m wide stem
(x in [33, 45]) running south to y = 0. Extent: [0, 78] x [0, 30].

The obstacle variant adds two double-stacked container blocks and two
parked tractor-trailers beside the road.
"""
import json
import pathlib

ROAD = [[33, 0], [45, 0], [45, 17], [78, 17], [78, 29], [0, 29], [0, 17], [33, 17]]
EXTENT = {"min": [0, 0], "max": [78, 30]}

BOX_FACES = [
    [0, 2, 1], [0, 3, 2],  # bottom
    [4, 5, 6], [4, 6, 7],  # top
    [0, 1, 5], [0, 5, 4],  # south
    [1, 2, 6], [1, 6, 5],  # east
    [2, 3, 7], [2, 7, 6],  # north
    [3, 0, 4], [3, 4, 7],  # west
]


def box(x0, x1, y0, y1, z0, z1, base=0):
    verts = [[x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
             [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1]]
    tris = [[a + base, b + base, c + base] for a, b, c in BOX_FACES]
    return verts, tris


def mesh(*boxes):
    verts, tris = [], []
    for b in boxes:
        v, t = box(*b, base=len(verts))
        verts += v
        tris += t
    return {"vertices": verts, "triangles": tris}


OBSTACLES = [
    # container block west of the stem, two 40 ft boxes side by side, two high
    mesh((19.5, 31.7, 10.5, 15.38, 0.0, 5.8)),
    # container block east of the stem, long side along the stem
    mesh((46.5, 51.38, 1.5, 13.7, 0.0, 5.8)),
    # tractor-trailer parked west, cab facing west
    mesh((2.0, 4.5, 12.5, 15.0, 0.0, 3.2), (4.8, 18.4, 12.5, 15.0, 0.0, 4.0)),
    # tractor-trailer parked east, cab facing east
    mesh((56.0, 69.6, 13.8, 16.3, 0.0, 4.0), (69.9, 72.4, 13.8, 16.3, 0.0, 3.2)),
]


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "scenes"
    out.mkdir(parents=True, exist_ok=True)
    base = {"road": {"boundary": ROAD}, "extent": EXTENT}
    (out / "t_junction.json").write_text(json.dumps({"obstacles": [], **base}, indent=1) + "\n")
    (out / "t_junction_obstacles.json").write_text(
        json.dumps({"obstacles": OBSTACLES, **base}, indent=1) + "\n")


if __name__ == "__main__":
    main()
