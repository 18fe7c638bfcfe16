"""Reference solutions and boundary data for the Helmholtz model problem.

All fields solve Delta u + k^2 u = 0 away from their singular point:
plane waves at several propagation angles, the radiating line-source
field (Hankel function) centered outside the domain, and a corner
singular Bessel mode with limited Sobolev regularity used for the
algebraic-rate studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import special

SINGULAR_EXPONENT = 2.0 / 3.0


@dataclass(frozen=True)
class Solution:
    """Closed-form Helmholtz field with value and gradient callables."""

    name: str
    k: float
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    singular_point: tuple[float, float] | None = None


def plane_wave_solution(k: float, angle: float, name: str = "pw") -> Solution:
    d = np.array([math.cos(angle), math.sin(angle)])

    def value(pts):
        pts = np.asarray(pts, dtype=float)
        return np.exp(1j * k * (pts @ d))

    def gradient(pts):
        v = value(pts)
        return 1j * k * v[..., None] * d

    return Solution(name, k, value, gradient)


def fundamental_solution(k: float, source=(-0.25, 0.0),
                         name: str = "hankel") -> Solution:
    """Radiating point-source field H0^(1)(k r), r measured from `source`.

    The source must lie outside the computational domain.
    """
    x0 = np.asarray(source, dtype=float)

    def value(pts):
        pts = np.asarray(pts, dtype=float)
        r = np.hypot(pts[..., 0] - x0[0], pts[..., 1] - x0[1])
        return special.hankel1(0, k * r)

    def gradient(pts):
        pts = np.asarray(pts, dtype=float)
        dx = pts[..., 0] - x0[0]
        dy = pts[..., 1] - x0[1]
        r = np.hypot(dx, dy)
        # d/dz H0 = -H1
        dr = -k * special.hankel1(1, k * r)
        return np.stack([dr * dx / r, dr * dy / r], axis=-1)

    return Solution(name, k, value, gradient, singular_point=tuple(x0))


def corner_singular_solution(k: float, center=(0.0, 0.5),
                             name: str = "corner") -> Solution:
    """Fractional Bessel mode J_{2/3}(k r) cos(2 theta / 3).

    Polar coordinates are taken around `center` with theta in (-pi, pi],
    so the angular branch cut lies along the negative x direction,
    outside the unit square; cos of the scaled angle is even, hence the
    field is continuous across that ray as well.  The gradient behaves
    like r^(-1/3) near the center: H^(5/3 - eps) regularity only.
    """
    xi = SINGULAR_EXPONENT
    c = np.asarray(center, dtype=float)

    def polar(pts):
        pts = np.asarray(pts, dtype=float)
        dx = pts[..., 0] - c[0]
        dy = pts[..., 1] - c[1]
        return np.hypot(dx, dy), np.arctan2(dy, dx)

    def value(pts):
        r, th = polar(pts)
        return special.besselj(xi, k * r) * np.cos(xi * th) + 0j

    def gradient(pts):
        r, th = polar(pts)
        if np.any(r == 0.0):
            raise ValueError("gradient singular at the corner point")
        du_dr = k * special.besselj_deriv(xi, k * r) * np.cos(xi * th)
        du_dth = -xi * special.besselj(xi, k * r) * np.sin(xi * th)
        gx = np.cos(th) * du_dr - np.sin(th) / r * du_dth
        gy = np.sin(th) * du_dr + np.cos(th) / r * du_dth
        return np.stack([gx, gy], axis=-1) + 0j

    return Solution(name, k, value, gradient, singular_point=tuple(c))


_ANGLES = {
    "u0": 0.0,
    "u1": math.pi / 4.0,
    "u4": 2.0 * math.pi / 17.0,
}


def exact_solution(name: str, k: float) -> Solution:
    """Factory for the named reference solutions u0..u4."""
    if name in _ANGLES:
        return plane_wave_solution(k, _ANGLES[name], name)
    if name == "u2":
        return fundamental_solution(k, name="u2")
    if name == "u3":
        return corner_singular_solution(k, name="u3")
    raise ValueError(f"unknown solution {name!r}")


SOLUTION_NAMES = ("u0", "u1", "u2", "u3", "u4")


@dataclass
class BoundaryData:
    """Boundary data callables keyed by the mesh edge labels.

    `dirichlet(pts)`, `neumann(pts, n)` and `robin(pts, n)` return the
    data g_D, g_N = grad u . n and g_R = grad u . n + i k theta u at the
    given points; `n` is the outward unit normal of the edge.  Scatterer
    edges ('Sc') resolve to a homogeneous condition of kind `sc_mode`.
    """

    k: float
    theta: float
    dirichlet: Callable | None = None
    neumann: Callable | None = None
    robin: Callable | None = None
    sc_mode: str | None = None
    singular_point: tuple[float, float] | None = None

    def resolve(self, label: str):
        """Effective (label, data) pair for one boundary edge."""
        if label == "Sc":
            if self.sc_mode not in ("D", "N"):
                raise ValueError("scatterer edges present but sc_mode not set")
            return self.sc_mode, _zero
        if label == "D":
            if self.dirichlet is None:
                raise ValueError("Dirichlet edge without data")
            return "D", lambda pts, n: self.dirichlet(pts)
        if label == "N":
            if self.neumann is None:
                raise ValueError("Neumann edge without data")
            return "N", self.neumann
        if label == "R":
            if self.robin is None:
                raise ValueError("Robin edge without data")
            return "R", self.robin
        raise ValueError(f"unknown boundary label {label!r}")


def _zero(pts, n=None):
    pts = np.asarray(pts)
    return np.zeros(pts.shape[:-1], dtype=complex)


def solution_data(sol: Solution, theta: float = 1.0) -> BoundaryData:
    """Boundary data of an exact solution for any mix of D/N/R edges."""

    def g_d(pts):
        return sol.value(pts)

    def g_n(pts, n):
        return sol.gradient(pts) @ np.asarray(n, dtype=float)

    def g_r(pts, n):
        return g_n(pts, n) + 1j * sol.k * theta * sol.value(pts)

    return BoundaryData(sol.k, theta, dirichlet=g_d, neumann=g_n, robin=g_r,
                        singular_point=sol.singular_point)


def scattering_data(kind: str, incident: Solution,
                    theta: float = 1.0) -> BoundaryData:
    """Total-field scattering setup on a holed domain.

    The scatterer boundary is sound-soft (u = 0) or sound-hard
    (grad u . n = 0); the outer boundary carries the first order
    absorbing condition written as an impedance condition with the
    incident field's trace as data.
    """
    if kind not in ("soft", "hard"):
        raise ValueError("kind must be 'soft' or 'hard'")

    def g_r(pts, n):
        grad = incident.gradient(pts) @ np.asarray(n, dtype=float)
        return grad + 1j * incident.k * theta * incident.value(pts)

    return BoundaryData(incident.k, theta, robin=g_r,
                        sc_mode="D" if kind == "soft" else "N")
