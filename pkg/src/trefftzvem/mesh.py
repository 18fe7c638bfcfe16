"""Polygonal meshes: storage, builders, and text-file I/O.

Elements are simple polygons listed counterclockwise; hanging nodes are
represented as collinear vertices so that neighbouring elements always
share whole edges.  Edges are keyed by their (min, max) vertex pair and
kept in lexicographic order of that key; this fixed order also defines
the global degree-of-freedom layout downstream.

Boundary edges carry a label: 'D' (Dirichlet), 'N' (Neumann), 'R'
(impedance/Robin) or 'Sc' (scatterer, resolved to D or N per problem).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quadrature import polygon_area, polygon_centroid

BOUNDARY_LABELS = ("D", "N", "R", "Sc")
_WELD_TOL = 1e-12


@dataclass
class Edge:
    """Mesh edge with canonical vertex order v0 < v1."""

    v0: int
    v1: int
    elements: list[int] = field(default_factory=list)
    label: str | None = None


class PolygonalMesh:
    """Conforming polygonal mesh of a plane domain.

    Parameters
    ----------
    vertices : (nv, 2) float array
    elements : sequence of int sequences
        CCW vertex indices of each element.
    boundary_labels : dict, optional
        Maps canonical vertex pairs (min, max) to a boundary label.
        Must cover exactly the topological boundary edges.
    """

    def __init__(self, vertices, elements, boundary_labels=None):
        self.vertices = np.asarray(vertices, dtype=float)
        self.elements = [np.asarray(el, dtype=int) for el in elements]
        self._build_edges(boundary_labels or {})
        self._compute_geometry()
        self.validate()

    # ------------------------------------------------------------------
    # construction helpers

    def _build_edges(self, boundary_labels):
        edge_map: dict[tuple[int, int], Edge] = {}
        for ei, el in enumerate(self.elements):
            m = len(el)
            for i in range(m):
                a, b = int(el[i]), int(el[(i + 1) % m])
                if a == b:
                    raise ValueError(f"element {ei} repeats vertex {a}")
                key = (a, b) if a < b else (b, a)
                edge = edge_map.setdefault(key, Edge(*key))
                edge.elements.append(ei)
        self.edges = [edge_map[key] for key in sorted(edge_map)]
        self.edge_index = {(e.v0, e.v1): i for i, e in enumerate(self.edges)}
        for e in self.edges:
            if len(e.elements) > 2:
                raise ValueError(
                    f"edge ({e.v0},{e.v1}) shared by {len(e.elements)} elements")
            if len(e.elements) == 1:
                key = (e.v0, e.v1)
                if key not in boundary_labels:
                    raise ValueError(f"boundary edge {key} has no label")
                lab = boundary_labels[key]
                if lab not in BOUNDARY_LABELS:
                    raise ValueError(f"unknown boundary label {lab!r} on {key}")
                e.label = lab
        labelled = set(boundary_labels)
        actual = {(e.v0, e.v1) for e in self.edges if len(e.elements) == 1}
        extra = labelled - actual
        if extra:
            raise ValueError(f"labels given for non-boundary edges: {sorted(extra)}")

    def _compute_geometry(self):
        v = self.vertices
        self.edge_lengths = np.array(
            [np.hypot(*(v[e.v1] - v[e.v0])) for e in self.edges])
        self.edge_midpoints = np.array(
            [0.5 * (v[e.v0] + v[e.v1]) for e in self.edges])
        self.edge_tangents = np.array(
            [(v[e.v1] - v[e.v0]) / h for e, h in zip(self.edges, self.edge_lengths)])
        self.areas = np.array([polygon_area(v[el]) for el in self.elements])
        self.centroids = np.array([polygon_centroid(v[el]) for el in self.elements])
        self.diameters = np.empty(len(self.elements))
        for i, el in enumerate(self.elements):
            pts = v[el]
            d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
            self.diameters[i] = np.sqrt(d2.max())
        # traversal-ordered edge ids and outward normals per element
        self.element_edges: list[list[int]] = []
        self.element_normals: list[np.ndarray] = []
        for el in self.elements:
            ids = []
            normals = []
            m = len(el)
            for i in range(m):
                a, b = int(el[i]), int(el[(i + 1) % m])
                key = (a, b) if a < b else (b, a)
                ids.append(self.edge_index[key])
                t = v[b] - v[a]
                t = t / np.hypot(*t)
                normals.append([t[1], -t[0]])  # CCW traversal: outward is right
            self.element_edges.append(ids)
            self.element_normals.append(np.array(normals))

    # ------------------------------------------------------------------

    def validate(self):
        """Raise ValueError on geometric or topological defects."""
        if np.any(self.edge_lengths <= 0.0):
            bad = int(np.argmin(self.edge_lengths))
            e = self.edges[bad]
            raise ValueError(f"degenerate edge ({e.v0},{e.v1})")
        if np.any(self.areas <= 0.0):
            bad = int(np.argmin(self.areas))
            raise ValueError(
                f"element {bad} not counterclockwise (signed area {self.areas[bad]:g})")
        used = np.zeros(len(self.vertices), dtype=bool)
        for el in self.elements:
            used[el] = True
        if not used.all():
            orphan = int(np.argmin(used))
            raise ValueError(f"vertex {orphan} not referenced by any element")

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def h(self) -> float:
        """Mesh size: largest element diameter."""
        return float(self.diameters.max())

    @property
    def boundary_edge_ids(self):
        return [i for i, e in enumerate(self.edges) if len(e.elements) == 1]

    @property
    def interior_edge_ids(self):
        return [i for i, e in enumerate(self.edges) if len(e.elements) == 2]

    def outward_normal(self, element: int, local_edge: int) -> np.ndarray:
        """Unit normal of the element's local_edge-th edge, pointing out."""
        return self.element_normals[element][local_edge]


# ----------------------------------------------------------------------
# builders


def cartesian_mesh(n: int, bounds=((0.0, 0.0), (1.0, 1.0)),
                   label: str = "R") -> PolygonalMesh:
    """Uniform n-by-n quadrilateral mesh of a rectangle.

    All boundary edges get the same label (default impedance).
    """
    if n < 1:
        raise ValueError("n must be positive")
    (x0, y0), (x1, y1) = bounds
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    vid = lambda i, j: j * (n + 1) + i
    verts = [(xs[i], ys[j]) for j in range(n + 1) for i in range(n + 1)]
    elems = []
    for j in range(n):
        for i in range(n):
            elems.append([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)])
    labels = {}
    for i in range(n):
        labels[_ckey(vid(i, 0), vid(i + 1, 0))] = label
        labels[_ckey(vid(i, n), vid(i + 1, n))] = label
        labels[_ckey(vid(0, i), vid(0, i + 1))] = label
        labels[_ckey(vid(n, i), vid(n, i + 1))] = label
    return PolygonalMesh(verts, elems, labels)


def hole_mesh(level: int, label_outer: str = "R",
              label_inner: str = "Sc") -> PolygonalMesh:
    """Square grid on (-1,2) x (0,3) minus the unit square hole [0,1] x [1,2].

    Refinement halves the cells: level l gives 3*2^l cells per side and
    8 * 4^l elements.  Outer boundary labelled `label_outer`, hole
    boundary `label_inner`.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    m = 2 ** level
    n = 3 * m
    xs = np.linspace(-1.0, 2.0, n + 1)
    ys = np.linspace(0.0, 3.0, n + 1)
    vid = lambda i, j: j * (n + 1) + i
    verts = [(xs[i], ys[j]) for j in range(n + 1) for i in range(n + 1)]
    elems = []
    for j in range(n):
        for i in range(n):
            if m <= i < 2 * m and m <= j < 2 * m:
                continue  # hole
            elems.append([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)])
    labels = {}
    for i in range(n):
        labels[_ckey(vid(i, 0), vid(i + 1, 0))] = label_outer
        labels[_ckey(vid(i, n), vid(i + 1, n))] = label_outer
        labels[_ckey(vid(0, i), vid(0, i + 1))] = label_outer
        labels[_ckey(vid(n, i), vid(n, i + 1))] = label_outer
    for i in range(m, 2 * m):
        labels[_ckey(vid(i, m), vid(i + 1, m))] = label_inner
        labels[_ckey(vid(i, 2 * m), vid(i + 1, 2 * m))] = label_inner
        labels[_ckey(vid(m, i), vid(m, i + 1))] = label_inner
        labels[_ckey(vid(2 * m, i), vid(2 * m, i + 1))] = label_inner
    # drop grid vertices strictly inside the hole; the remap is monotone,
    # so canonical (min, max) edge keys stay canonical
    used = sorted({int(v) for el in elems for v in el})
    remap = {old: new for new, old in enumerate(used)}
    verts = [verts[i] for i in used]
    elems = [[remap[v] for v in el] for el in elems]
    labels = {(remap[a], remap[b]): lab for (a, b), lab in labels.items()}
    return PolygonalMesh(verts, elems, labels)


def hole_mesh_locator(level: int):
    """Point-to-element map for `hole_mesh(level)` by grid arithmetic.

    Returns a callable taking points of shape (n, 2) and returning the
    containing element index per point.  Points inside the hole raise.
    """
    m = 2 ** level
    n = 3 * m
    s = 3.0 / n
    cell_id = {}
    idx = 0
    for j in range(n):
        for i in range(n):
            if m <= i < 2 * m and m <= j < 2 * m:
                continue
            cell_id[(i, j)] = idx
            idx += 1

    def locate(pts):
        pts = np.asarray(pts, dtype=float)
        ii = np.clip(((pts[:, 0] + 1.0) / s).astype(int), 0, n - 1)
        jj = np.clip((pts[:, 1] / s).astype(int), 0, n - 1)
        out = np.empty(len(pts), dtype=int)
        for r, (i, j) in enumerate(zip(ii, jj)):
            try:
                out[r] = cell_id[(i, j)]
            except KeyError:
                raise ValueError(f"point {pts[r]} lies inside the hole")
        return out

    return locate


def graded_mesh(n: int, mu: float, label: str = "R"):
    """Mesh of the unit square graded toward the point (0, 1/2).

    Starting from the single square, the cell whose closure contains the
    grading point is split n times into six subcells: one vertical cut at
    a fraction mu of its width and two horizontal cuts at mu of its
    height around the midline.  Element sizes then decay like mu^layer
    toward the point.  Hanging nodes become collinear polygon vertices.

    Returns
    -------
    mesh : PolygonalMesh
    degrees : (n_elements,) int array
        Per-element effective degree q_K = layer + 1, where layer 0 is
        the cell at the grading point and layers grow outward by
        closure adjacency.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie in (0, 1)")
    rects = []  # (x0, x1, y0, y1)
    w = 1.0
    x0, y0, y1 = 0.0, 0.0, 1.0  # current nu-cell, nu on its left mid side
    for _ in range(n):
        xc = w * mu
        yl = 0.5 - 0.5 * w * mu
        yh = 0.5 + 0.5 * w * mu
        # five outer subcells of the current nu-cell
        rects.append((0.0, xc, y0, yl))
        rects.append((xc, w, y0, yl))
        rects.append((xc, w, yl, yh))
        rects.append((0.0, xc, yh, y1))
        rects.append((xc, w, yh, y1))
        w, y0, y1 = xc, yl, yh
    rects.append((0.0, w, y0, y1))  # innermost cell containing (0, 1/2)
    rects = [tuple(round(c, 15) for c in r) for r in rects]

    # a vertex sits on a rect side exactly where some rect has a corner there
    corners = sorted({(rx, ry) for (x0_, x1_, y0_, y1_) in rects
                      for rx in (x0_, x1_) for ry in (y0_, y1_)})
    vmap: dict[tuple[float, float], int] = {}
    verts: list[tuple[float, float]] = []

    def vert(x, y):
        key = (x, y)
        if key not in vmap:
            vmap[key] = len(verts)
            verts.append(key)
        return vmap[key]

    def on_hline(y, lo, hi):
        return sorted(cx for (cx, cy) in corners
                      if abs(cy - y) <= _WELD_TOL and lo - _WELD_TOL <= cx <= hi + _WELD_TOL)

    def on_vline(x, lo, hi):
        return sorted(cy for (cx, cy) in corners
                      if abs(cx - x) <= _WELD_TOL and lo - _WELD_TOL <= cy <= hi + _WELD_TOL)

    elems = []
    for (rx0, rx1, ry0, ry1) in rects:
        xs_b = on_hline(ry0, rx0, rx1)
        xs_t = on_hline(ry1, rx0, rx1)
        ys_l = on_vline(rx0, ry0, ry1)
        ys_r = on_vline(rx1, ry0, ry1)
        poly = []
        poly += [vert(x, ry0) for x in xs_b]
        poly += [vert(rx1, y) for y in ys_r[1:]]
        poly += [vert(x, ry1) for x in reversed(xs_t[:-1])]
        poly += [vert(rx0, y) for y in reversed(ys_l[1:-1])]
        elems.append(poly)

    degrees = _grading_layers(rects) + 1
    labels = {k: label for k in _all_boundary(verts, elems)}
    mesh = PolygonalMesh(np.asarray(verts), elems, labels)
    return mesh, degrees


def _all_boundary(verts, elems):
    """Canonical keys of topological boundary edges, labelled 'R'."""
    count: dict[tuple[int, int], int] = {}
    for el in elems:
        m = len(el)
        for i in range(m):
            a, b = el[i], el[(i + 1) % m]
            key = (a, b) if a < b else (b, a)
            count[key] = count.get(key, 0) + 1
    return {key: "R" for key, c in count.items() if c == 1}


def _grading_layers(rects) -> np.ndarray:
    nu = np.array([0.0, 0.5])
    n = len(rects)

    def dist(r):
        dx = max(r[0] - nu[0], nu[0] - r[1], 0.0)
        dy = max(r[2] - nu[1], nu[1] - r[3], 0.0)
        return np.hypot(dx, dy)

    def rect_gap(r, s):
        dx = max(r[0] - s[1], s[0] - r[1], 0.0)
        dy = max(r[2] - s[3], s[2] - r[3], 0.0)
        return np.hypot(dx, dy)

    layers = np.full(n, -1, dtype=int)
    frontier = [i for i in range(n) if dist(rects[i]) <= _WELD_TOL]
    layers[frontier] = 0
    current = 0
    while frontier:
        nxt = []
        for j in range(n):
            if layers[j] >= 0:
                continue
            if any(rect_gap(rects[j], rects[i]) <= _WELD_TOL for i in frontier):
                nxt.append(j)
        layers[nxt] = current + 1
        frontier = nxt
        current += 1
    if np.any(layers < 0):
        raise ValueError("disconnected grading construction")
    return layers


def _ckey(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


# ----------------------------------------------------------------------
# text format I/O


def load_mesh(path) -> PolygonalMesh:
    """Read a mesh from the sectioned text format.

    Sections ``vertices`` (id x y), ``elements`` (id v0 v1 ...) and
    ``boundary`` (v0 v1 label); '#' starts a comment.
    """
    verts: dict[int, tuple[float, float]] = {}
    elems: dict[int, list[int]] = {}
    labels: dict[tuple[int, int], str] = {}
    section = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line in ("vertices", "elements", "boundary"):
                section = line
                continue
            parts = line.split()
            try:
                if section == "vertices":
                    if len(parts) != 3:
                        raise ValueError("expected: id x y")
                    verts[int(parts[0])] = (float(parts[1]), float(parts[2]))
                elif section == "elements":
                    if len(parts) < 4:
                        raise ValueError("expected: id and at least 3 vertices")
                    elems[int(parts[0])] = [int(p) for p in parts[1:]]
                elif section == "boundary":
                    if len(parts) != 3:
                        raise ValueError("expected: v0 v1 label")
                    labels[_ckey(int(parts[0]), int(parts[1]))] = parts[2]
                else:
                    raise ValueError("data before any section header")
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not verts or not elems:
        raise ValueError(f"{path}: missing vertices or elements section")
    nv = max(verts) + 1
    if sorted(verts) != list(range(nv)):
        raise ValueError(f"{path}: vertex ids must be 0..{nv - 1} without gaps")
    varr = np.array([verts[i] for i in range(nv)])
    elist = [elems[i] for i in sorted(elems)]
    return PolygonalMesh(varr, elist, labels)


def save_mesh(mesh: PolygonalMesh, path) -> None:
    """Write a mesh in the text format; floats round-trip exactly."""
    with open(path, "w") as fh:
        fh.write("vertices\n")
        for i, (x, y) in enumerate(mesh.vertices):
            fh.write(f"{i} {float(x)!r} {float(y)!r}\n")
        fh.write("elements\n")
        for i, el in enumerate(mesh.elements):
            fh.write(f"{i} " + " ".join(str(int(v)) for v in el) + "\n")
        fh.write("boundary\n")
        for e in mesh.edges:
            if e.label is not None:
                fh.write(f"{e.v0} {e.v1} {e.label}\n")
