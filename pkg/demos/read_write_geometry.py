"""Round-trip tour of the geometry readers.

Builds two small shapes, writes them in the three supported encodings
(binary STL, ascii STL, polygon csv), and reads everything back through
the format-sniffing loader.
"""

from __future__ import annotations

import argparse
import struct
from pathlib import Path

import numpy as np

from sphprep import geometry_aabb, load_geometry, naca_airfoil, square_polygon, tetrahedron


def write_ascii_stl(path: Path, g) -> None:
    # cast to float32 up front so both STL encodings carry identical bits
    tris = g.vertices[g.faces].astype(np.float32)
    with open(path, "w") as f:
        f.write("solid demo\n")
        for tri in tris:
            f.write("  facet normal 0 0 0\n    outer loop\n")
            for v in tri:
                f.write("      vertex %.9g %.9g %.9g\n" % tuple(v))
            f.write("    endloop\n  endfacet\n")
        f.write("endsolid demo\n")


def write_binary_stl(path: Path, g) -> None:
    tris = g.vertices[g.faces].astype(np.float32)
    with open(path, "wb") as f:
        f.write(b"\x00" * 80)
        f.write(struct.pack("<I", len(tris)))
        for tri in tris:
            f.write(struct.pack("<3f", 0.0, 0.0, 0.0))
            for v in tri:
                f.write(struct.pack("<3f", *v))
            f.write(struct.pack("<H", 0))


def write_polygon_csv(path: Path, loops) -> None:
    chunks = ["\n".join("%.17g,%.17g" % (x, y) for x, y in loop) for loop in loops]
    path.write_text("\n\n".join(chunks) + "\n")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output", default="demo_out", help="scratch directory")
    args = ap.parse_args(argv)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)

    tet = tetrahedron()
    print("tetrahedron: %d vertices, %d faces" % (len(tet.vertices), len(tet.faces)))

    write_binary_stl(out / "tet_bin.stl", tet)
    write_ascii_stl(out / "tet_ascii.stl", tet)
    a = load_geometry(out / "tet_bin.stl")
    b = load_geometry(out / "tet_ascii.stl")
    print("binary stl reload: %d vertices from %d triangle corners (deduplicated)"
          % (len(a.vertices), 3 * len(a.faces)))
    print("ascii and binary reloads identical:", np.array_equal(a.vertices, b.vertices)
          and np.array_equal(a.faces, b.faces))

    lens = np.linalg.norm(a.face_normals, axis=1)
    print("face normals unit length: max |1 - |n|| = %.3g" % np.abs(1.0 - lens).max())

    # a plate with a square hole: outer loop counter-clockwise, hole clockwise
    outer = square_polygon(side=2.0).vertices
    hole = square_polygon(side=0.8).vertices[::-1]
    wing = naca_airfoil(segments=400)
    write_polygon_csv(out / "plate.csv", [outer, hole])
    write_polygon_csv(out / "wing.csv", [wing.vertices])

    plate = load_geometry(out / "plate.csv")
    print("plate with hole: %d edges over 2 loops" % len(plate.faces))
    # edge normals of the outer loop point away from the origin, the
    # hole's point toward it; both mean "out of the material"
    mids = plate.vertices[plate.faces].mean(axis=1)
    outward = np.sign(np.einsum("ij,ij->i", mids, plate.face_normals))
    print("outer-loop normals outward: %d/4, hole normals inward: %d/4"
          % ((outward[:4] > 0).sum(), (outward[4:] < 0).sum()))

    reload_wing = load_geometry(out / "wing.csv")
    box = geometry_aabb(reload_wing)
    print("airfoil bounding box: min=%s max=%s"
          % (np.round(box.min_corner, 4), np.round(box.max_corner, 4)))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
