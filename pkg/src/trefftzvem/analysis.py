"""Error measurement, conditioning probes and convergence tables.

Errors are measured against the element-wise plane-wave projection of
the discrete solution, in the relative weighted H1 norm
(|v|_1^2 + k^2 ||v||_0^2)^(1/2) and the relative L2 norm.  Element
integrals use the signed centroid-fan rule, evaluated once on the fan
and once on a refinement to expose under-resolved elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import planewave, quadrature
from .assembly import Result
from .problems import Solution

REFINE_WARN = 1e-8


@dataclass
class Errors:
    """Relative projected errors plus the raw pieces behind them."""

    rel_h1: float
    rel_l2: float
    abs_h1: float
    abs_l2: float
    norm_h1: float
    norm_l2: float
    refine_delta: float          # worst relative change under one refinement


def _accumulate(result: Result, solution, refine: int):
    """Squared error and norm integrals at one quadrature refinement."""
    spaces = result.spaces
    mesh = spaces.mesh
    k = spaces.k
    err_g = err_v = nrm_g = nrm_v = 0.0
    cell_err = np.empty(mesh.n_elements)
    for el, pi_s in zip(spaces.elements, result.pi_stars):
        verts = mesh.vertices[mesh.elements[el.element]]
        pts, w = quadrature.polygon_rule(verts, refine=refine,
                                         center=el.center)
        c = pi_s @ result.u[el.global_idx]
        wave = np.exp(1j * k * ((pts - el.center) @ el.dirs.T))
        uh = wave @ c
        gx = 1j * k * (wave @ (c * el.dirs[:, 0]))
        gy = 1j * k * (wave @ (c * el.dirs[:, 1]))
        ue = solution.value(pts)
        ge = solution.gradient(pts)
        d_v = np.sum(w * np.abs(ue - uh) ** 2)
        d_g = np.sum(w * (np.abs(ge[:, 0] - gx) ** 2
                          + np.abs(ge[:, 1] - gy) ** 2))
        err_v += d_v
        err_g += d_g
        nrm_v += np.sum(w * np.abs(ue) ** 2)
        nrm_g += np.sum(w * (np.abs(ge[:, 0]) ** 2 + np.abs(ge[:, 1]) ** 2))
        cell_err[el.element] = d_g + k * k * d_v
    return err_g, err_v, nrm_g, nrm_v, cell_err


def projected_errors(result: Result, solution: Solution,
                     refine_check: bool = True) -> Errors:
    """Relative H1(k)- and L2-errors of the projected discrete solution.

    `solution` needs `value(pts)` and `gradient(pts)`; any object with
    those two callables works, including a reference-field adapter.
    """
    eg, ev, ng, nv, cells = _accumulate(result, solution, refine=1)
    delta = 0.0
    if refine_check:
        _, _, _, _, cells0 = _accumulate(result, solution, refine=0)
        scale = np.max(cells) if np.max(cells) > 0 else 1.0
        delta = float(np.max(np.abs(cells - cells0)) / scale)
    k = result.spaces.k
    abs_h1 = math.sqrt(eg + k * k * ev)
    abs_l2 = math.sqrt(ev)
    norm_h1 = math.sqrt(ng + k * k * nv)
    norm_l2 = math.sqrt(nv)
    return Errors(abs_h1 / norm_h1, abs_l2 / norm_l2,
                  abs_h1, abs_l2, norm_h1, norm_l2, delta)


def evaluate_projection(result: Result, elements, pts_per_element):
    """Projected field values and gradients at given points.

    `pts_per_element[i]` holds points inside element `elements[i]`;
    returns flat arrays of values and gradients in the same order.
    """
    spaces = result.spaces
    k = spaces.k
    vals, grads = [], []
    for eid, pts in zip(elements, pts_per_element):
        el = spaces.elements[eid]
        c = result.pi_stars[eid] @ result.u[el.global_idx]
        wave = np.exp(1j * k * ((pts - el.center) @ el.dirs.T))
        vals.append(wave @ c)
        grads.append(np.stack([
            1j * k * (wave @ (c * el.dirs[:, 0])),
            1j * k * (wave @ (c * el.dirs[:, 1]))], axis=-1))
    return np.concatenate(vals), np.concatenate(grads)


def convergence_rates(hs, errors) -> np.ndarray:
    """Observed rates log(e_i/e_{i+1}) / log(h_i/h_{i+1}); first entry nan."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    rates = np.full(len(hs), np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        rates[1:] = (np.log(errors[:-1] / errors[1:])
                     / np.log(hs[:-1] / hs[1:]))
    return rates


def edge_gram_condition(k: float, h: float, q: int,
                        vertical: bool = True) -> float:
    """Condition number of the raw plane-wave trace Gram on one edge."""
    a = np.array([0.0, 0.0])
    b = np.array([0.0, h]) if vertical else np.array([h, 0.0])
    g = planewave.edge_gram(k, a, b, planewave.directions(q))
    w = np.abs(np.linalg.eigvalsh(g))
    if w.min() == 0.0:
        return float("inf")
    return float(w.max() / w.min())


def condition_curve(qs, hk_values, k: float = 1.0):
    """Rows (q, hk, cond) of the raw edge Gram condition number.

    The Gram depends on k and h only through the product k h, so a
    unit wavenumber with h = hk sweeps the curve.
    """
    rows = []
    for q in qs:
        for hk in hk_values:
            rows.append((q, hk, edge_gram_condition(k, hk / k, q)))
    return rows


def bulk_gram_min_singular(k: float, q: int, verts: np.ndarray) -> float:
    """Smallest singular value of the bulk sesquilinear Gram G^K."""
    from .assembly import BasisConfig, build_spaces, local_matrices
    from .mesh import PolygonalMesh

    nv = len(verts)
    m = PolygonalMesh(np.asarray(verts, dtype=float),
                      [list(range(nv))],
                      {_key(i, (i + 1) % nv): "R" for i in range(nv)})
    spaces = build_spaces(m, k, q, BasisConfig())
    G, _, _ = local_matrices(spaces, 0)
    return float(np.linalg.svd(G, compute_uv=False)[-1])


def _key(i, j):
    return (i, j) if i < j else (j, i)


def fit_loglog_slope(x, y):
    """Least-squares slope and R^2 of log10(y) against x."""
    x = np.asarray(x, dtype=float)
    y = np.log10(np.asarray(y, dtype=float))
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    fitted = A @ coef
    ss_res = np.sum((y - fitted) ** 2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), float(r2)
