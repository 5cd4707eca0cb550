"""Shared test helpers: minimal writers for the supported geometry files."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

Array = np.ndarray


def write_stl_binary(path, tris: Array, header: bytes = b"") -> None:
    """Write a (n, 3, 3) triangle soup as binary STL; stored normals zeroed."""
    tris = np.asarray(tris, dtype=np.float32)
    out = bytearray(header.ljust(80, b"\0")[:80])
    out += struct.pack("<I", len(tris))
    for tri in tris:
        out += struct.pack("<3f", 0.0, 0.0, 0.0)
        for v in tri:
            out += struct.pack("<3f", *v)
        out += struct.pack("<H", 0)
    Path(path).write_bytes(bytes(out))


def write_stl_ascii(path, tris: Array, name: str = "part") -> None:
    """Write the same soup as ASCII STL.

    Nine significant digits round-trip any float32 exactly, so the ASCII
    and binary encodings of one soup parse to identical geometries.
    """
    lines = [f"solid {name}"]
    for tri in np.asarray(tris, dtype=np.float32):
        lines.append("  facet normal 0 0 0")
        lines.append("    outer loop")
        for v in tri:
            lines.append(
                "      vertex "
                + " ".join(format(float(c), ".9g") for c in v)
            )
        lines.append("    endloop")
        lines.append("  endfacet")
    lines.append(f"endsolid {name}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_polygon_csv(path, loops) -> None:
    """Write 2D loops (sequences of (n, 2) vertices) as x,y lines.

    Blank lines separate loops; loops close implicitly.
    """
    blocks = []
    for loop in loops:
        rows = (
            f"{format(float(x), '.17g')},{format(float(y), '.17g')}"
            for x, y in np.asarray(loop, dtype=np.float64)
        )
        blocks.append("\n".join(rows))
    Path(path).write_text("\n\n".join(blocks) + "\n")


def triangle_soup(g) -> Array:
    """Per-face vertex triples of an indexed mesh."""
    return g.vertices[g.faces]
