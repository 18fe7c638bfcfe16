"""Plane-wave bases on elements and edges.

A local space of p = 2q + 1 plane waves e^{i k d_l . (x - x_K)} with
equispaced unit directions d_l.  Edge unknowns are moments against plane
wave traces; two curing strategies for the ill-conditioning of those
traces live here:

* direction filtering drops, per edge, directions whose tangential
  components coincide (their traces are identical up to a constant) and
  adds the constant trace when no direction is edge-orthogonal;
* spectral orthonormalization takes the edge trace Gram matrix, drops
  eigenvalues below a tolerance sigma, and recombines the surviving
  eigenvectors into an L2(e)-orthonormal edge basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TANGENT_TOL = 1e-12
SIGMA_DEFAULT = 1e-13
_PHI_SERIES_RADIUS = 0.5
_PHI_SERIES_TERMS = 18
CONST = -1  # marker for the constant edge function in filtered bases


def directions(q: int) -> np.ndarray:
    """Equispaced unit directions d_l = (cos, sin)(2 pi l / p), p = 2q + 1."""
    if q < 1:
        raise ValueError("effective degree q must be >= 1")
    p = 2 * q + 1
    ang = 2.0 * np.pi * np.arange(p) / p
    return np.column_stack([np.cos(ang), np.sin(ang)])


def phi(z):
    """Entire function Phi(z) = (e^z - 1)/z, Phi(0) = 1.

    Stable for small |z| via its Taylor series sum z^m / (m+1)!; the
    naive quotient loses ~|log10 z| digits to cancellation there.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    small = np.abs(z) < _PHI_SERIES_RADIUS
    if np.any(small):
        zs = z[small]
        acc = np.zeros_like(zs)
        for m in range(_PHI_SERIES_TERMS - 1, 0, -1):
            acc = (acc + 1.0 / _factorial(m + 1)) * zs
        out[small] = acc + 1.0
    if np.any(~small):
        zl = z[~small]
        out[~small] = (np.exp(zl) - 1.0) / zl
    return out[0] if scalar else out


def _factorial(n: int) -> float:
    r = 1.0
    for i in range(2, n + 1):
        r *= i
    return r


def segment_exp_integral(a, b, v):
    """int_e exp(i v . x) ds over the segment from a to b.

    Closed form h_e exp(i v . a) Phi(i v . (b - a)); orientation free.
    `v` may be a single 2-vector or an (..., 2) stack.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    v = np.asarray(v, dtype=float)
    h = np.hypot(*(b - a))
    va = v @ a
    vd = v @ (b - a)
    return h * np.exp(1j * va) * phi(1j * vd)


def edge_pw_integral(a, b, d_l, d_j, k: float):
    """int_e exp(i k (d_l - d_j) . x) ds via the Phi closed form."""
    return segment_exp_integral(a, b, k * (np.asarray(d_l) - np.asarray(d_j)))


def edge_gram(k: float, a, b, dirs, include_const: bool = False) -> np.ndarray:
    """L2(e) Gram matrix of plane wave traces exp(i k d . (x - x_e)).

    Entry (j, l) = (w_l, w_j)_e = h_e sinc(tau/2), tau = k (d_l - d_j)
    . (b - a); real symmetric positive semidefinite, diagonal h_e.  With
    ``include_const`` a trailing row/column for the constant trace is
    appended (a zero direction in the same formula).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    if include_const:
        dirs = np.vstack([dirs, [0.0, 0.0]])
    h = np.hypot(*(b - a))
    t = dirs @ (b - a)  # tangential phases times h_e
    tau = k * (t[None, :] - t[:, None])
    return h * np.sinc(tau / (2.0 * np.pi))


@dataclass
class FilteredEdgeBasis:
    """Result of the direction filtering on one edge.

    ``members`` lists the surviving trace functions as direction indices
    (CONST for the appended constant).  ``trace_slot[j]`` gives, for any
    direction j of the full set, the slot in ``members`` whose trace
    spans it.
    """

    members: np.ndarray
    trace_slot: np.ndarray

    @property
    def ndof(self) -> int:
        return len(self.members)

    @property
    def has_const(self) -> bool:
        return bool(len(self.members)) and self.members[-1] == CONST


def filter_directions(dirs, tangent, tol: float = TANGENT_TOL) -> FilteredEdgeBasis:
    """Drop directions with duplicate tangential components on an edge.

    Keeps the lowest index of each duplicate group (their edge traces
    coincide up to a unimodular constant); afterwards the constant trace
    joins the basis unless some direction is orthogonal to the edge, in
    which case its own trace already is that constant.
    """
    dirs = np.asarray(dirs, dtype=float)
    tangent = np.asarray(tangent, dtype=float)
    tcomp = dirs @ tangent
    members: list[int] = []
    slot = np.empty(len(dirs), dtype=int)
    for j, tj in enumerate(tcomp):
        hit = None
        for s, m in enumerate(members):
            if abs(tj - tcomp[m]) <= tol:
                hit = s
                break
        if hit is None:
            slot[j] = len(members)
            members.append(j)
        else:
            slot[j] = hit
    if np.min(np.abs(tcomp)) > tol:
        members.append(CONST)
    return FilteredEdgeBasis(np.array(members, dtype=int), slot)


@dataclass
class OrthonormalEdgeBasis:
    """Spectrally reduced edge basis from the trace Gram matrix.

    Columns of ``combine`` give the surviving edge functions as linear
    combinations of the raw traces; ``expand`` gives the reverse
    expansion of each raw trace in the new basis (exact on the retained
    eigenspace).  With column scaling the new basis is L2(e)
    orthonormal: combine^T G0 combine = I.
    """

    combine: np.ndarray
    expand: np.ndarray
    eigenvalues: np.ndarray
    n_dropped: int

    @property
    def ndof(self) -> int:
        return self.combine.shape[1]


def orthonormalize_edge_basis(gram, sigma: float = SIGMA_DEFAULT,
                              relative: bool = False, h_e: float = 1.0,
                              scale: bool = True) -> OrthonormalEdgeBasis:
    """Eigendecompose an edge Gram matrix and drop near-null directions.

    Parameters
    ----------
    gram : (p, p) real symmetric array
    sigma : float
        Eigenvalue cutoff; eigenpairs with |lambda| < sigma are removed.
    relative : bool
        Compare lambda / h_e instead of raw lambda against sigma.
    h_e : float
        Edge length, used only in relative mode.
    scale : bool
        Rescale eigenvector columns by 1/sqrt(lambda) so the new basis
        is literally orthonormal; without it the raw eigenvectors are
        kept (orthogonal traces with norms sqrt(lambda)).
    """
    gram = np.asarray(gram, dtype=float)
    lam, vec = np.linalg.eigh(gram)
    metric = lam / h_e if relative else lam
    keep = np.abs(metric) >= sigma
    if not np.any(keep):
        raise ValueError("all trace Gram eigenvalues below sigma: degenerate edge")
    lam = lam[keep]
    vec = vec[:, keep]
    if np.any(lam <= 0.0):
        raise ValueError("retained nonpositive Gram eigenvalue; Gram not PSD")
    # fix eigenvector signs for run-to-run reproducibility
    pivot = np.argmax(np.abs(vec), axis=0)
    signs = np.sign(vec[pivot, np.arange(vec.shape[1])])
    vec = vec * signs
    root = np.sqrt(lam)
    if scale:
        combine = vec / root
        expand = vec * root
    else:
        combine = vec.copy()
        expand = vec.copy()
    return OrthonormalEdgeBasis(combine, expand, lam,
                                n_dropped=gram.shape[0] - len(lam))


def hp_direction_order(p_max: int) -> np.ndarray:
    """Nested ordering of direction indices for variable degrees.

    Odd-numbered directions (1-based) come first, then the even ones,
    each group ascending; prefixes of the reordered list then give
    roughly equidistributed direction sets for every smaller degree.
    """
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    idx = np.arange(p_max)
    return np.concatenate([idx[idx % 2 == 0], idx[idx % 2 == 1]])
