"""Discrete spaces, local matrices and the global Helmholtz solver.

Each mesh edge carries a set of plane-wave traces; the degrees of
freedom are weighted edge moments against those traces.  Two trace
treatments are supported:

* ``filtered``: directions whose tangential components coincide are
  merged exactly (a constant replaces a direction orthogonal to the
  edge), leaving the raw plane-wave traces otherwise untouched;
* ``orthonormal``: the trace Gram matrix is diagonalized, eigenvectors
  below a threshold are discarded and the remaining ones define a
  well-conditioned edge basis.

Local element matrices follow the standard virtual element pattern:
a sesquilinear-form Gram ``G`` of the bulk plane waves, a projection
right-hand side ``B``, a dof matrix ``D``, the projector
``Pi* = G^-1 B`` and the stabilized bilinear form.  Boundary moments
are computed with Gauss-Legendre rules whose order grows with k h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import planewave, quadrature
from .mesh import PolygonalMesh
from .planewave import FilteredEdgeBasis, OrthonormalEdgeBasis
from .problems import BoundaryData

BULK_COND_WARN = 1e12
MIN_MOMENT_ORDER = 16


@dataclass(frozen=True)
class BasisConfig:
    """Edge basis treatment and its parameters."""

    kind: str = "orthonormal"            # "orthonormal" or "filtered"
    sigma: float = planewave.SIGMA_DEFAULT
    sigma_relative: bool = False
    scale: bool = True
    tangent_tol: float = planewave.TANGENT_TOL

    def __post_init__(self):
        if self.kind not in ("orthonormal", "filtered"):
            raise ValueError(f"unknown basis kind {self.kind!r}")


@dataclass
class EdgeSpace:
    """Trace space attached to one mesh edge."""

    edge_id: int
    a: np.ndarray
    b: np.ndarray
    h: float
    midpoint: np.ndarray
    dirs: np.ndarray                     # raw trace directions, (m, 2)
    offset: int
    ndof: int
    n_orig: int                          # count after exact filtering only
    cond: float                          # condition number of the working Gram
    filtered: FilteredEdgeBasis | None = None
    ortho: OrthonormalEdgeBasis | None = None
    gram: np.ndarray | None = None       # working Gram (real symmetric)

    def member_directions(self) -> np.ndarray:
        """Directions of the filtered trace functions, constant as zero."""
        mem = self.filtered.members
        md = np.zeros((len(mem), 2))
        keep = mem >= 0
        md[keep] = self.dirs[mem[keep]]
        return md


@dataclass
class ElementSpace:
    element: int
    dirs: np.ndarray                     # bulk directions, (p, 2)
    center: np.ndarray
    edge_ids: list
    normals: np.ndarray
    global_idx: np.ndarray
    local_starts: np.ndarray


@dataclass
class Spaces:
    mesh: PolygonalMesh
    k: float
    basis: BasisConfig
    degrees: np.ndarray
    table: np.ndarray                    # master direction table
    edges: list
    elements: list
    ndof: int
    n_orig: int

    @property
    def max_edge_cond(self) -> float:
        return max(es.cond for es in self.edges)


@dataclass
class Diagnostic:
    """Near-singular bulk Gram report for one element."""

    element: int
    cond: float
    k: float
    resonance: tuple | None = None       # (m, n, sqrt(nu)) for near-squares

    def __str__(self):
        msg = (f"element {self.element}: bulk plane-wave Gram condition "
               f"{self.cond:.2e} at k = {self.k:g}")
        if self.resonance is not None:
            m, n, root = self.resonance
            msg += (f"; nearest square Neumann resonance sqrt(nu_{{{m},{n}}})"
                    f" = {root:.6f}")
        return msg


@dataclass
class Result:
    """Solved discrete system with everything needed for evaluation."""

    spaces: Spaces
    u: np.ndarray
    residual: float
    pi_stars: list
    diagnostics: list = field(default_factory=list)

    @property
    def ndof(self) -> int:
        return self.spaces.ndof

    @property
    def n_orig(self) -> int:
        return self.spaces.n_orig

    @property
    def max_edge_cond(self) -> float:
        return self.spaces.max_edge_cond


def moment_order(k: float, h_e: float) -> int:
    """Gauss point count for edge moments, growing with the phase k h."""
    return max(MIN_MOMENT_ORDER, math.ceil(2.0 + k * h_e / 2.0))


GRADED_RATIO = 0.15
GRADED_TMIN = 1e-14


def _graded_toward(a, b, order):
    """Composite Gauss rule on [a, b], geometrically refined toward a.

    Handles data with an integrable algebraic singularity at a: each
    subsegment sees a smooth integrand.  Grading stops once a + t*(b-a)
    would round onto a itself (short edges near a large coordinate), and
    no earlier than relative distance GRADED_TMIN; the dropped sliver
    contributes O(tmin^(2/3)) for r^(-1/3) data.
    """
    length = np.linalg.norm(np.asarray(b) - np.asarray(a))
    eps = np.finfo(float).eps
    t_min = max(GRADED_TMIN, 16.0 * eps * max(1.0, np.abs(a).max()) / length)
    pts, wts = [], []
    t_hi = 1.0
    while t_hi > t_min:
        t_lo = max(t_hi * GRADED_RATIO, t_min)
        p, w = quadrature.segment_rule(a + t_lo * (b - a),
                                       a + t_hi * (b - a), order)
        pts.append(p)
        wts.append(w)
        t_hi = t_lo if t_lo > t_min else 0.0
    return np.concatenate(pts), np.concatenate(wts)


def _moment_rule(es: EdgeSpace, k: float, singular_point):
    """Quadrature points and weights for one edge's data moments."""
    order = moment_order(k, es.h)
    if singular_point is None:
        return quadrature.segment_rule(es.a, es.b, order)
    p = np.asarray(singular_point, dtype=float)
    d = es.b - es.a
    t = float(np.dot(p - es.a, d) / np.dot(d, d))
    closest = es.a + min(max(t, 0.0), 1.0) * d
    if np.linalg.norm(p - closest) > 1e-9 * es.h:
        return quadrature.segment_rule(es.a, es.b, order)
    if t <= 1e-9:
        return _graded_toward(es.a, es.b, order)
    if t >= 1.0 - 1e-9:
        return _graded_toward(es.b, es.a, order)
    mid = es.a + t * d
    p1, w1 = _graded_toward(mid, es.a, order)
    p2, w2 = _graded_toward(mid, es.b, order)
    return np.concatenate([p1, p2]), np.concatenate([w1, w2])


def build_spaces(mesh: PolygonalMesh, k: float,
                 degrees: int | Sequence[int],
                 basis: BasisConfig | None = None) -> Spaces:
    """Attach trace spaces to every edge and bulk spaces to every element.

    `degrees` is a single q for a uniform space or one q per element.
    Nonuniform degrees use the interleaved master direction table, so
    every element's direction set is a prefix of each of its edges'.
    """
    basis = basis or BasisConfig()
    if np.isscalar(degrees):
        deg = np.full(mesh.n_elements, int(degrees))
    else:
        deg = np.asarray(degrees, dtype=int)
        if deg.shape != (mesh.n_elements,):
            raise ValueError("need one degree per element")
    if np.any(deg < 1):
        raise ValueError("degrees must be at least 1")

    q_max = int(deg.max())
    uniform = bool(deg.min() == q_max)
    table = planewave.directions(q_max)
    if not uniform:
        if basis.kind == "filtered":
            raise ValueError("filtered basis requires a uniform degree")
        table = table[planewave.hp_direction_order(table.shape[0])]

    # edge trace count: maximum rule over the adjacent elements
    edge_p = np.empty(len(mesh.edges), dtype=int)
    for i, e in enumerate(mesh.edges):
        q_e = max(deg[el] for el in e.elements)
        edge_p[i] = 2 * q_e + 1

    edges = []
    offset = 0
    n_orig_total = 0
    for i, e in enumerate(mesh.edges):
        a = mesh.vertices[e.v0]
        b = mesh.vertices[e.v1]
        h = mesh.edge_lengths[i]
        dirs = table[: edge_p[i]]
        tangent = mesh.edge_tangents[i]
        fb = planewave.filter_directions(dirs, tangent, basis.tangent_tol)
        es = EdgeSpace(i, a, b, h, mesh.edge_midpoints[i], dirs,
                       offset, 0, fb.ndof, np.nan)
        if basis.kind == "filtered":
            es.filtered = fb
            es.gram = planewave.edge_gram(k, a, b, es.member_directions())
            es.ndof = fb.ndof
        else:
            gram_raw = planewave.edge_gram(k, a, b, dirs)
            ob = planewave.orthonormalize_edge_basis(
                gram_raw, sigma=basis.sigma, relative=basis.sigma_relative,
                h_e=h, scale=basis.scale)
            es.ortho = ob
            es.gram = ob.combine.T @ gram_raw @ ob.combine
            es.ndof = ob.ndof
        w = np.abs(np.linalg.eigvalsh(es.gram))
        es.cond = float(w.max() / w.min()) if w.min() > 0 else float("inf")
        offset += es.ndof
        n_orig_total += es.n_orig
        edges.append(es)

    elements = []
    for kel in range(mesh.n_elements):
        p = 2 * deg[kel] + 1
        eids = mesh.element_edges[kel]
        sizes = np.array([edges[i].ndof for i in eids])
        starts = np.concatenate([[0], np.cumsum(sizes)])
        gidx = np.concatenate([
            np.arange(edges[i].offset, edges[i].offset + edges[i].ndof)
            for i in eids])
        elements.append(ElementSpace(kel, table[:p], mesh.centroids[kel],
                                     list(eids), mesh.element_normals[kel],
                                     gidx, starts))

    return Spaces(mesh, k, basis, deg, table, edges, elements,
                  offset, n_orig_total)


def _edge_exp_integrals(k, a, b, dirs_row, dirs_col):
    """I[r, c] = integral over [a, b] of exp(i k (d_col[c] - d_row[r]) . x)."""
    d = b - a
    h = math.hypot(d[0], d[1])
    ta_r = dirs_row @ a
    ta_c = dirs_col @ a
    td_r = dirs_row @ d
    td_c = dirs_col @ d
    va = k * (ta_c[None, :] - ta_r[:, None])
    vd = k * (td_c[None, :] - td_r[:, None])
    return h * np.exp(1j * va) * planewave.phi(1j * vd)


def _dof_rows(k, es: EdgeSpace, u_dirs, bulk_dirs, x_k):
    """Edge moments of the bulk waves against the traces with directions u.

    Row r, column l holds (1/h) int_e w_l^K conj(w_r^e) ds.
    """
    eint = _edge_exp_integrals(k, es.a, es.b, u_dirs, bulk_dirs)
    ue = u_dirs @ es.midpoint
    sk = bulk_dirs @ x_k
    return np.exp(1j * k * (ue[:, None] - sk[None, :])) * eint / es.h


def local_matrices(spaces: Spaces, element: int):
    """G, B, D of one element in its dof basis."""
    el = spaces.elements[element]
    k = spaces.k
    dirs = el.dirs
    p = dirs.shape[0]
    n_local = el.local_starts[-1]
    sk = dirs @ el.center

    G = np.zeros((p, p), dtype=complex)
    B = np.zeros((p, n_local), dtype=complex)
    D = np.zeros((n_local, p), dtype=complex)

    for s, eid in enumerate(el.edge_ids):
        es = spaces.edges[eid]
        n = el.normals[s]
        eint = _edge_exp_integrals(k, es.a, es.b, dirs, dirs)
        G += (1j * k * np.exp(1j * k * (sk[:, None] - sk[None, :]))
              * (dirs @ n)[None, :] * eint)

        coef = (-1j * k * (dirs @ n)
                * np.exp(-1j * k * (dirs @ (es.midpoint - el.center))) * es.h)
        lo, hi = el.local_starts[s], el.local_starts[s + 1]
        if spaces.basis.kind == "filtered":
            slots = es.filtered.trace_slot
            np.add.at(B, (np.arange(p), lo + slots), coef)
            D[lo:hi] = _dof_rows(k, es, es.member_directions(), dirs,
                                 el.center)
        else:
            B[:, lo:hi] = coef[:, None] * es.ortho.expand[:p, :]
            d_raw = _dof_rows(k, es, es.dirs, dirs, el.center)
            D[lo:hi] = es.ortho.combine.T @ d_raw
    return G, B, D


def nearest_neumann_resonance(k: float, side: float):
    """Square Neumann Laplace eigenvalue sqrt(nu_{m,n}) closest to k."""
    n_max = int(math.ceil(side * k / math.pi)) + 2
    best = None
    for m in range(n_max + 1):
        for n in range(n_max + 1):
            if m == 0 and n == 0:
                continue
            root = math.pi * math.sqrt(m * m + n * n) / side
            if best is None or abs(root - k) < abs(best[2] - k):
                best = (m, n, root)
    return best


def _square_side(verts: np.ndarray) -> float | None:
    """Side length if the polygon is nearly a square, else None."""
    if verts.shape[0] != 4:
        return None
    lens = np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)
    side = lens.mean()
    if np.max(np.abs(lens - side)) > 0.05 * side:
        return None
    diags = (np.linalg.norm(verts[2] - verts[0]),
             np.linalg.norm(verts[3] - verts[1]))
    if abs(diags[0] - diags[1]) > 0.05 * side:
        return None
    return float(side)


@dataclass
class System:
    """Assembled sparse system plus per-element projection data."""

    spaces: Spaces
    A: sp.csr_matrix
    f: np.ndarray
    pi_stars: list
    diagnostics: list


def assemble_system(spaces: Spaces, data: BoundaryData,
                    stab: str = "drecipe") -> System:
    if stab not in ("drecipe", "identity"):
        raise ValueError(f"unknown stabilization {stab!r}")
    if abs(spaces.k - data.k) > 1e-12 * max(1.0, abs(data.k)):
        raise ValueError("boundary data wavenumber differs from the space's")

    mesh = spaces.mesh
    k = spaces.k
    rows, cols, vals = [], [], []
    f = np.zeros(spaces.ndof, dtype=complex)
    pi_stars = []
    diagnostics = []

    for el in spaces.elements:
        G, B, D = local_matrices(spaces, el.element)
        sv = np.linalg.svd(G, compute_uv=False)
        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
        if cond > BULK_COND_WARN:
            side = _square_side(mesh.vertices[mesh.elements[el.element]])
            res = (nearest_neumann_resonance(k, side)
                   if side is not None else None)
            diagnostics.append(Diagnostic(el.element, cond, k, res))
        pi_s = np.linalg.solve(G, B)
        pi_stars.append(pi_s)

        energy = np.conj(pi_s).T @ G @ pi_s
        ip = np.eye(D.shape[0]) - D @ pi_s
        if stab == "identity":
            s_diag = np.ones(D.shape[0])
        else:
            s_diag = np.maximum(np.real(np.diag(energy)), 1.0)
        a_loc = energy + np.conj(ip).T @ (s_diag[:, None] * ip)

        gi = el.global_idx
        rr, cc = np.meshgrid(gi, gi, indexing="ij")
        rows.append(rr.ravel())
        cols.append(cc.ravel())
        vals.append(a_loc.ravel())

    dirichlet_rows = []
    dirichlet_vals = []
    for eid in mesh.boundary_edge_ids:
        es = spaces.edges[eid]
        e = mesh.edges[eid]
        label, g = data.resolve(e.label)
        elem = e.elements[0]
        s = mesh.element_edges[elem].index(eid)
        n_out = mesh.element_normals[elem][s]
        mom = _edge_moments(spaces, es, g, n_out, data.singular_point)
        gsl = np.arange(es.offset, es.offset + es.ndof)
        if label == "D":
            dirichlet_rows.append(gsl)
            dirichlet_vals.append(mom / es.h)
        elif label == "N":
            f[gsl] += es.h * np.linalg.solve(es.gram, mom)
        elif label == "R":
            f[gsl] += es.h * np.linalg.solve(es.gram, mom)
            r_blk = (1j * k * data.theta * es.h ** 2
                     * np.linalg.inv(es.gram))
            rr, cc = np.meshgrid(gsl, gsl, indexing="ij")
            rows.append(rr.ravel())
            cols.append(cc.ravel())
            vals.append(r_blk.astype(complex).ravel())

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)

    if dirichlet_rows:
        fixed = np.concatenate(dirichlet_rows)
        fixed_vals = np.concatenate(dirichlet_vals)
        keep = ~np.isin(rows, fixed)
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        rows = np.concatenate([rows, fixed])
        cols = np.concatenate([cols, fixed])
        vals = np.concatenate([vals, np.ones(len(fixed), dtype=complex)])
        f[fixed] = fixed_vals

    A = sp.coo_matrix((vals, (rows, cols)),
                      shape=(spaces.ndof, spaces.ndof)).tocsr()
    return System(spaces, A, f, pi_stars, diagnostics)


def _edge_moments(spaces: Spaces, es: EdgeSpace, g: Callable, n_out,
                  singular_point=None):
    """Moments int_e g conj(w_j^e) ds in the edge's working basis."""
    k = spaces.k
    pts, w = _moment_rule(es, k, singular_point)
    vals = np.asarray(g(pts, n_out), dtype=complex)
    if spaces.basis.kind == "filtered":
        u_dirs = es.member_directions()
        wv = np.exp(1j * k * ((pts - es.midpoint) @ u_dirs.T))
        return (w * vals) @ np.conj(wv)
    wv = np.exp(1j * k * ((pts - es.midpoint) @ es.dirs.T))
    return es.ortho.combine.T @ ((w * vals) @ np.conj(wv))


def solve_helmholtz(mesh: PolygonalMesh, data: BoundaryData,
                    q: int | None = None,
                    degrees: Sequence[int] | None = None,
                    basis: BasisConfig | None = None,
                    stab: str = "drecipe") -> Result:
    """Build, assemble and solve; the one-call entry point."""
    if (q is None) == (degrees is None):
        raise ValueError("pass exactly one of q or degrees")
    spaces = build_spaces(mesh, data.k, q if q is not None else degrees,
                          basis)
    system = assemble_system(spaces, data, stab)
    u = spla.spsolve(system.A.tocsc(), system.f)
    fn = np.linalg.norm(system.f)
    residual = float(np.linalg.norm(system.A @ u - system.f)
                     / (fn if fn > 0 else 1.0))
    return Result(spaces, u, residual, system.pi_stars, system.diagnostics)
