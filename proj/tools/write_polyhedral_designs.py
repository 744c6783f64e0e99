#!/usr/bin/env python3
"""Write the exact icosahedron and dodecahedron vertex sets as `ux,uy,uz` CSVs.

The icosahedron has a vertex at the north pole and two rings at z = +-1/sqrt(5);
the dodecahedron uses the cyclic (1/phi, 0, phi) orientation.  Both match the
orientation of the hemisphere tables used for the two-shell-family designs.

Usage: write_polyhedral_designs.py OUTDIR
"""
import sys

import numpy as np


def icosahedron():
    pts = [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
    r, z = 2 / np.sqrt(5), 1 / np.sqrt(5)
    for k in range(5):
        a = 2 * np.pi * k / 5
        pts.append((r * np.cos(a), r * np.sin(a), z))
        pts.append((-r * np.cos(a), -r * np.sin(a), -z))
    return np.array(pts)


def dodecahedron():
    phi = (1 + np.sqrt(5)) / 2
    pts = [(sx, sy, sz) for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)]
    for s1 in (1, -1):
        for s2 in (1, -1):
            pts.append((s1 / phi, 0.0, s2 * phi))
            pts.append((0.0, s1 * phi, s2 / phi))
            pts.append((s1 * phi, s2 / phi, 0.0))
    return np.array(pts) / np.sqrt(3)


def write(path, pts):
    with open(path, "w") as fh:
        fh.write("ux,uy,uz\n")
        for p in pts:
            fh.write(f"{p[0]:.17g},{p[1]:.17g},{p[2]:.17g}\n")


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "."
    write(f"{out}/icosahedron12.csv", icosahedron())
    write(f"{out}/dodecahedron20.csv", dodecahedron())
