"""Generate the polygonal meshes committed under data/meshes/.

Voronoi meshes of the unit square come from Lloyd-relaxed random seeds
with mirrored ghost seeds, so boundary cells are clipped exactly to the
square.  The 8-element nonconvex mesh is a stack of zigzag bands.  All
outputs are deterministic; rerunning overwrites identical files.
"""

from __future__ import annotations

import pathlib
import sys

import numpy as np
from scipy.spatial import Voronoi

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from trefftzvem.mesh import PolygonalMesh, save_mesh

OUT = pathlib.Path(__file__).resolve().parents[1] / "data" / "meshes"
SIZES = (8, 16, 32, 64, 128, 256)
LLOYD_ITERS = 200
WELD_DECIMALS = 9


def mirrored(seeds):
    left = seeds * [-1, 1]
    right = seeds * [-1, 1] + [2, 0]
    down = seeds * [1, -1]
    up = seeds * [1, -1] + [0, 2]
    return np.vstack([seeds, left, right, down, up])


def lloyd(seeds, iters):
    n = len(seeds)
    for _ in range(iters):
        vor = Voronoi(mirrored(seeds))
        new = np.empty_like(seeds)
        for i in range(n):
            region = vor.regions[vor.point_region[i]]
            poly = vor.vertices[region]
            # polygon centroid via the shoelace moments
            x, y = poly[:, 0], poly[:, 1]
            xn, yn = np.roll(x, -1), np.roll(y, -1)
            cross = x * yn - xn * y
            a = cross.sum() / 2.0
            cx = np.sum((x + xn) * cross) / (6.0 * a)
            cy = np.sum((y + yn) * cross) / (6.0 * a)
            new[i] = (cx, cy)
        seeds = new
    return seeds


def voronoi_mesh(n_cells, seed):
    rng = np.random.default_rng(seed)
    seeds = lloyd(rng.random((n_cells, 2)), LLOYD_ITERS)
    vor = Voronoi(mirrored(seeds))

    key_of = {}
    verts = []

    def vid(p):
        x = round(min(max(p[0], 0.0), 1.0), WELD_DECIMALS)
        y = round(min(max(p[1], 0.0), 1.0), WELD_DECIMALS)
        key = (x, y)
        if key not in key_of:
            key_of[key] = len(verts)
            verts.append((x, y))
        return key_of[key]

    elems = []
    for i in range(n_cells):
        region = vor.regions[vor.point_region[i]]
        poly = vor.vertices[region]
        x, y = poly[:, 0], poly[:, 1]
        if np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) < 0:
            poly = poly[::-1]
        ids = []
        for p in poly:
            v = vid(p)
            if not ids or v != ids[-1]:
                ids.append(v)
        if ids[0] == ids[-1]:
            ids.pop()
        elems.append(ids)

    varr = np.array(verts, dtype=float)
    labels = {}
    for el in elems:
        m = len(el)
        for s in range(m):
            a, b = el[s], el[(s + 1) % m]
            key = (a, b) if a < b else (b, a)
            labels[key] = labels.get(key, 0) + 1
    labels = {k: "R" for k, c in labels.items() if c == 1}
    return PolygonalMesh(varr, elems, labels)


def zigzag_mesh(bands=8, segments=6, amplitude=1.0 / 24.0):
    """Stack of horizontal bands with zigzag interfaces (nonconvex cells)."""
    xs = np.linspace(0.0, 1.0, segments + 1)
    key_of = {}
    verts = []

    def vid(x, y):
        key = (round(x, 12), round(y, 12))
        if key not in key_of:
            key_of[key] = len(verts)
            verts.append(key)
        return key_of[key]

    def interface(i):
        y0 = i / bands
        pts = []
        for j, x in enumerate(xs):
            d = 0.0
            if 0 < j < segments and 0 < i < bands:
                d = amplitude * (1 if (i + j) % 2 == 0 else -1)
            pts.append(vid(x, y0 + d))
        return pts

    lines = [interface(i) for i in range(bands + 1)]
    elems = []
    for i in range(bands):
        elems.append(lines[i] + lines[i + 1][::-1])

    varr = np.array(verts, dtype=float)
    labels = {}
    for el in elems:
        m = len(el)
        for s in range(m):
            a, b = el[s], el[(s + 1) % m]
            key = (a, b) if a < b else (b, a)
            labels[key] = labels.get(key, 0) + 1
    labels = {k: "R" for k, c in labels.items() if c == 1}
    return PolygonalMesh(varr, elems, labels)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for n in SIZES:
        m = voronoi_mesh(n, seed=1000 + n)
        m.validate()
        assert abs(m.areas.sum() - 1.0) < 1e-9
        path = OUT / f"voronoi_{n:03d}.txt"
        save_mesh(m, path)
        lens = m.edge_lengths
        print(f"{path.name}: {m.n_elements} elements, {len(m.edges)} edges, "
              f"h={m.h:.4f}, min edge {lens.min():.2e}")
    m = zigzag_mesh()
    m.validate()
    assert abs(m.areas.sum() - 1.0) < 1e-9
    save_mesh(m, OUT / "concave_008.txt")
    print(f"concave_008.txt: {m.n_elements} elements, h={m.h:.4f}")


if __name__ == "__main__":
    main()
