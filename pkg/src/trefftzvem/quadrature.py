"""Quadrature rules: segments, triangles, and polygons.

Line integrals use Gauss-Legendre or Gauss-Lobatto nodes.  Area integrals
over polygons go through a signed fan triangulation (valid for nonconvex
polygons: overlapping fan triangles cancel) combined with a collapsed
Gauss-Jacobi rule on each triangle that is exact beyond polynomial degree
20 in each coordinate.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.special import roots_jacobi

# Default 1D order for the collapsed triangle rule; exactness 2*N-1 = 23.
TRI_RULE_1D = 12


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    if n < 1:
        raise ValueError("need at least one node")
    x, w = npleg.leggauss(n)
    return x, w


@lru_cache(maxsize=64)
def gauss_lobatto(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Lobatto nodes and weights on [-1, 1].

    Includes both endpoints; exact for polynomials of degree <= 2n - 3.

    Parameters
    ----------
    n : int
        Number of nodes, n >= 2.
    """
    if n < 2:
        raise ValueError("Lobatto rule needs n >= 2")
    if n == 2:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    # interior nodes: roots of P'_{n-1}
    coef = np.zeros(n)
    coef[-1] = 1.0
    pn1 = npleg.Legendre(coef)
    xi = pn1.deriv().roots()
    x = np.concatenate(([-1.0], np.sort(xi.real), [1.0]))
    w = 2.0 / (n * (n - 1) * npleg.legval(x, coef) ** 2)
    return x, w


def segment_rule(a, b, n: int, kind: str = "legendre"):
    """Quadrature for the line integral int_e f ds on the segment a->b.

    Returns (points, weights) with points of shape (n, 2) and weights
    summing to |b - a|.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if kind == "legendre":
        t, w = gauss_legendre(n)
    elif kind == "lobatto":
        t, w = gauss_lobatto(n)
    else:
        raise ValueError(f"unknown rule kind {kind!r}")
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[None, :] + t[:, None] * half[None, :]
    h = float(np.hypot(*(b - a)))
    return pts, w * (h / 2.0)


@lru_cache(maxsize=8)
def _reference_triangle_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Collapsed-coordinate rule on the triangle (0,0),(1,0),(0,1):
    # x = xi*(1-eta), y = eta with a Jacobi(1,0) rule absorbing the (1-eta)
    # Jacobian exactly.  Positive weights, degree 2n-1 per variable.
    s, v = gauss_legendre(n)
    t, w = roots_jacobi(n, 1.0, 0.0)
    xi = 0.5 * (1.0 + s)
    eta = 0.5 * (1.0 + t)
    X = np.outer(1.0 - eta, xi)          # (eta, xi) grid
    Y = np.broadcast_to(eta[:, None], X.shape)
    W = np.outer(w, v) / 8.0
    pts = np.column_stack([X.ravel(), Y.ravel()])
    return pts, W.ravel()


def triangle_rule(p0, p1, p2, n: int = TRI_RULE_1D):
    """Quadrature points and signed weights for one triangle.

    The weight sign follows the orientation of (p0, p1, p2), so rules from
    a fan triangulation of a nonconvex polygon add up correctly.
    """
    p0 = np.asarray(p0, dtype=float)
    e1 = np.asarray(p1, dtype=float) - p0
    e2 = np.asarray(p2, dtype=float) - p0
    ref_pts, ref_w = _reference_triangle_rule(n)
    pts = p0[None, :] + np.outer(ref_pts[:, 0], e1) + np.outer(ref_pts[:, 1], e2)
    cross = e1[0] * e2[1] - e1[1] * e2[0]
    return pts, ref_w * cross


def _subdivide(tri):
    # one uniform subdivision of a triangle into 4 congruent children
    a, b, c = tri
    ab = 0.5 * (a + b)
    bc = 0.5 * (b + c)
    ca = 0.5 * (c + a)
    return [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]


def polygon_rule(vertices, n: int = TRI_RULE_1D, refine: int = 0, center=None):
    """Quadrature over a simple polygon via signed fan triangulation.

    Parameters
    ----------
    vertices : (m, 2) array
        Polygon vertices in order (CCW for positive total weight).
    n : int
        1D order of the per-triangle collapsed rule.
    refine : int
        Number of uniform subdivisions of each fan triangle.
    center : (2,) array, optional
        Fan center; defaults to the area centroid.  Any point works since
        the triangle weights are signed.

    Returns
    -------
    points : (N, 2) array
    weights : (N,) array, summing to the polygon area.
    """
    verts = np.asarray(vertices, dtype=float)
    if center is None:
        center = polygon_centroid(verts)
    tris = []
    m = len(verts)
    for i in range(m):
        tris.append((np.asarray(center, dtype=float), verts[i], verts[(i + 1) % m]))
    for _ in range(refine):
        tris = [child for tri in tris for child in _subdivide(tri)]
    all_pts = []
    all_w = []
    for tri in tris:
        pts, w = triangle_rule(*tri, n=n)
        all_pts.append(pts)
        all_w.append(w)
    return np.vstack(all_pts), np.concatenate(all_w)


def polygon_area(vertices) -> float:
    """Signed (shoelace) area; positive for CCW order."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


def polygon_centroid(vertices) -> np.ndarray:
    """Area centroid of a simple polygon."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * np.sum(cross)
    if abs(area) < 1e-300:
        return v.mean(axis=0)
    cx = np.sum((x + xn) * cross) / (6.0 * area)
    cy = np.sum((y + yn) * cross) / (6.0 * area)
    return np.array([cx, cy])
