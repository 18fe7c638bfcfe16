"""Quadrature oracles for the local matrices.

Everything here recomputes the assembled quantities from pointwise
function evaluations and resolved composite Gauss rules, sharing no
closed-form integral code with the library.  Traces are evaluated in
the edge's working basis: raw plane waves (a constant for the merged
slot) in the filtered pipeline, eigenvector combinations in the
orthonormal one.
"""

import numpy as np

from conftest import oscillatory_segment_rule
from trefftzvem.assembly import EdgeSpace, Spaces, local_matrices


def edge_quadrature(es: EdgeSpace, k: float):
    return oscillatory_segment_rule(es.a, es.b, 2.0 * k)


def trace_values(es: EdgeSpace, k: float, pts: np.ndarray) -> np.ndarray:
    """Working-basis trace functions at pts, one column per dof."""
    if es.filtered is not None:
        dirs = es.member_directions()  # constant slot has direction zero
        return np.exp(1j * k * ((pts - es.midpoint) @ dirs.T))
    raw = np.exp(1j * k * ((pts - es.midpoint) @ es.dirs.T))
    return raw @ es.ortho.combine


def bulk_values(dirs: np.ndarray, center, k: float,
                pts: np.ndarray) -> np.ndarray:
    return np.exp(1j * k * ((pts - center) @ dirs.T))


def gram_oracle(es: EdgeSpace, k: float) -> np.ndarray:
    """int_e trace_c conj(trace_r) ds for the working basis."""
    pts, w = edge_quadrature(es, k)
    tv = trace_values(es, k, pts)
    return (np.conj(tv) * w[:, None]).T @ tv


def raw_gram_oracle(es: EdgeSpace, k: float) -> np.ndarray:
    """int_e w_c^e conj(w_r^e) ds for the unfiltered directions."""
    pts, w = edge_quadrature(es, k)
    raw = np.exp(1j * k * ((pts - es.midpoint) @ es.dirs.T))
    return (np.conj(raw) * w[:, None]).T @ raw


def local_oracles(spaces: Spaces, element: int):
    """G, D and the two B certificates for one element, by quadrature.

    Returns (G_o, D_o, BG_o, B_direct) where BG_o is h_e * M stacked
    over edges with M[j, c] = -i k (d_j . n) int_e trace_c conj(w_j) ds,
    to be compared against B @ blockdiag(G0_quad); B_direct solves the
    edge Gram for the canonical-basis columns and is only meaningful
    where that Gram is well conditioned (entries are nan elsewhere).
    """
    el = spaces.elements[element]
    k = spaces.k
    dirs = el.dirs
    p = dirs.shape[0]
    n_local = el.local_starts[-1]

    G_o = np.zeros((p, p), dtype=complex)
    D_o = np.zeros((n_local, p), dtype=complex)
    BG_o = np.zeros((p, n_local), dtype=complex)
    B_dir = np.full((p, n_local), np.nan, dtype=complex)

    for s, eid in enumerate(el.edge_ids):
        es = spaces.edges[eid]
        n = el.normals[s]
        pts, w = edge_quadrature(es, k)
        bulk = bulk_values(dirs, el.center, k, pts)
        tv = trace_values(es, k, pts)

        G_o += 1j * k * ((np.conj(bulk) * w[:, None]).T
                         @ (bulk * (dirs @ n)[None, :]))

        lo, hi = el.local_starts[s], el.local_starts[s + 1]
        cross = (np.conj(tv) * w[:, None]).T @ bulk  # (ndof_e, p)
        D_o[lo:hi] = cross / es.h

        m = -1j * k * (dirs @ n)[:, None] * np.conj(cross).T
        BG_o[:, lo:hi] = es.h * m

        g_quad = (np.conj(tv) * w[:, None]).T @ tv
        sv = np.linalg.svd(g_quad, compute_uv=False)
        if sv[-1] > 0 and sv[0] / sv[-1] <= 450.0:
            B_dir[:, lo:hi] = es.h * np.linalg.solve(g_quad.T, m.T).T

    return G_o, D_o, BG_o, B_dir


def compare(code: np.ndarray, oracle: np.ndarray) -> float:
    """Largest entry deviation relative to the largest code entry."""
    scale = np.abs(code).max()
    return float(np.abs(code - oracle).max() / scale)


def certify_element(spaces: Spaces, element: int):
    """Relative deviations (G, D, B_identity, B_direct, G0 worst edge).

    B_identity compares B @ G0_quad with the quadrature moments; the
    direct columns are limited to well-conditioned edge Grams and the
    returned value is nan when no edge qualifies.
    """
    el = spaces.elements[element]
    G, B, D = local_matrices(spaces, element)
    G_o, D_o, BG_o, B_dir = local_oracles(spaces, element)

    blocks = []
    g0_err = 0.0
    for eid in el.edge_ids:
        es = spaces.edges[eid]
        g_o = gram_oracle(es, spaces.k)
        g0_err = max(g0_err, compare(es.gram.astype(complex), g_o))
        blocks.append(g_o)
    n_local = el.local_starts[-1]
    BG = np.zeros((B.shape[0], n_local), dtype=complex)
    for s in range(len(el.edge_ids)):
        lo, hi = el.local_starts[s], el.local_starts[s + 1]
        BG[:, lo:hi] = B[:, lo:hi] @ blocks[s]

    mask = ~np.isnan(B_dir)
    if mask.any():
        db = float(np.abs((B - B_dir)[mask]).max() / np.abs(B).max())
    else:
        db = float("nan")
    return (compare(G, G_o), compare(D, D_o),
            float(np.abs(BG - BG_o).max() / np.abs(BG_o).max()),
            db, g0_err)
