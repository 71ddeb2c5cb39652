"""Radial mesh on [0, R] with the operators every other module builds on.

Functions on the ball of radius R in three dimensions are represented by
their nodal values on a uniform radial mesh.  Integrals over the ball reduce
to ``4*pi * int_0^R f(r) r^2 dr`` and are evaluated with a trapezoid-type
rule in the measure ``r^2 dr`` whose boundary weight absorbs the quadrature
defect, so that constants integrate to the exact ball volume.

The interior weights are exactly ``4*pi*h*r_i^2``.  This proportionality to
``r_i^2`` is load bearing: it makes the centered radial Laplacian below
self-adjoint in the weighted inner product (see :mod:`spsflow.energy`), which
the energy/gradient consistency checks rely on at machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field, InitVar

import numpy as np

__all__ = [
    "RadialGrid",
    "RadialField",
    "build_uniform",
    "laplacian",
    "laplacian_rows",
    "h1_norm_sq",
    "h1_inner",
    "lp_norm",
    "l2_norm",
    "volume_integral",
]

MIN_NODES = 16


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform radial mesh on [0, R] with ball-volume quadrature weights.

    Attributes
    ----------
    radius : float
        Ball radius R (>= 1).
    n : int
        Node count (>= 16).
    r : numpy.ndarray of shape (n,)
        Nodes ``0 = r_0 < r_1 < ... < r_{n-1} = R``, uniformly spaced.
    h : float
        Mesh width ``R / (n - 1)``.
    weights : numpy.ndarray of shape (n,)
        Nonnegative volume weights: ``sum(weights * f(r))`` approximates
        ``4*pi * int f r^2 dr``; exact for constant ``f``.
    kernel_weights : numpy.ndarray of shape (n,)
        One-dimensional weights ``weights / (4*pi*r^2)`` (zero at r = 0)
        used by the Poisson kernel quadrature.
    """

    radius: float
    n: int
    r: np.ndarray = field(repr=False)
    h: float
    weights: np.ndarray = field(repr=False)
    kernel_weights: np.ndarray = field(repr=False)

    def same_mesh(self, other: "RadialGrid") -> bool:
        return self is other or (self.n == other.n and self.radius == other.radius)


def build_uniform(radius: float, n: int) -> RadialGrid:
    """Build the uniform grid on [0, radius] with n nodes.

    Rejects ``radius < 1`` (the solver family is defined for balls of radius
    at least one) and ``n < 16`` (too coarse for any of the stencils here).
    """
    radius = float(radius)
    if not np.isfinite(radius) or radius < 1.0:
        raise ValueError(f"radius must be >= 1, got {radius}")
    if int(n) != n or n < MIN_NODES:
        raise ValueError(f"node count must be an integer >= {MIN_NODES}, got {n}")
    n = int(n)
    r = np.linspace(0.0, radius, n)
    h = radius / (n - 1)
    volume = 4.0 * np.pi * radius**3 / 3.0
    weights = 4.0 * np.pi * h * r**2
    weights[0] = 0.0
    # fold the trapezoid volume defect into the boundary node; keeps all
    # weights nonnegative and constants exact
    weights[-1] = volume - weights[:-1].sum()
    if weights[-1] < 0.0:
        raise ValueError("quadrature boundary weight came out negative")
    kernel_weights = np.zeros(n)
    kernel_weights[1:] = weights[1:] / (4.0 * np.pi * r[1:] ** 2)
    for arr in (r, weights, kernel_weights):
        arr.setflags(write=False)
    return RadialGrid(radius=radius, n=n, r=r, h=h,
                      weights=weights, kernel_weights=kernel_weights)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Nodal values of a radial function with zero Dirichlet trace.

    The trace condition ``values[-1] == 0`` is enforced on construction;
    pass ``check_trace=False`` for diagnostic fields (operator outputs,
    manufactured test profiles) that legitimately carry a boundary value.
    """

    grid: RadialGrid
    values: np.ndarray = field(repr=False)
    check_trace: InitVar[bool] = True

    def __post_init__(self, check_trace: bool) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"values must have shape ({self.grid.n},), got {vals.shape}")
        if not np.isfinite(vals).all():
            raise ValueError("field values must be finite")
        if check_trace and vals[-1] != 0.0:
            raise ValueError("field must vanish at r = R (Dirichlet trace)")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __neg__(self) -> "RadialField":
        return RadialField(self.grid, -self.values, check_trace=False)


def laplacian_rows(grid: RadialGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tridiagonal rows (sub, diag, super) of the radial Laplacian.

    Row 0 is the regularity limit ``lap u(0) = 3 u''(0) = 6 (u_1 - u_0)/h^2``
    from the ghost-node reflection ``u(-h) = u(h)``.  Rows 1..n-2 are the
    centered second-order stencil of ``u'' + (2/r) u'``.  The boundary row
    is not included; it is only ever used through the Dirichlet condition.
    """
    n, h, r = grid.n, grid.h, grid.r
    sub = np.zeros(n)
    diag = np.zeros(n)
    sup = np.zeros(n)
    diag[0] = -6.0 / h**2
    sup[0] = 6.0 / h**2
    i = np.arange(1, n - 1)
    sub[i] = 1.0 / h**2 - 1.0 / (h * r[i])
    diag[i] = -2.0 / h**2
    sup[i] = 1.0 / h**2 + 1.0 / (h * r[i])
    return sub, diag, sup


def apply_laplacian(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """Radial Laplacian of nodal values, including a one-sided boundary row."""
    n, h, r = grid.n, grid.h, grid.r
    u = values
    out = np.empty(n)
    out[0] = 6.0 * (u[1] - u[0]) / h**2
    i = np.arange(1, n - 1)
    out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h**2 \
        + (u[i + 1] - u[i - 1]) / (h * r[i])
    # second-order one-sided stencil at r = R, diagnostic only
    upp = (2.0 * u[-1] - 5.0 * u[-2] + 4.0 * u[-3] - u[-4]) / h**2
    up = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)
    out[-1] = upp + 2.0 * up / grid.radius
    return out


def laplacian(u: RadialField) -> RadialField:
    """Second-order discrete Laplacian ``u'' + (2/r) u'`` as a field."""
    return RadialField(u.grid, apply_laplacian(u.grid, u.values), check_trace=False)


def nodal_derivative(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """Centered first derivative; zero at r = 0 (radial symmetry), one-sided at R."""
    n, h = grid.n, grid.h
    du = np.empty(n)
    du[0] = 0.0
    du[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    du[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * h)
    return du


def volume_integral(grid: RadialGrid, nodal: np.ndarray) -> float:
    """``4*pi * int f r^2 dr`` with the grid weights."""
    return float(np.dot(grid.weights, nodal))


def h1_norm_sq(u: RadialField) -> float:
    """Squared H^1 norm ``4*pi * int (u'^2 + u^2) r^2 dr``.

    Uses the grid quadrature and centered differences for u'.
    """
    du = nodal_derivative(u.grid, u.values)
    return volume_integral(u.grid, du * du + u.values * u.values)


def h1_inner(u: RadialField, v: RadialField) -> float:
    """H^1 inner product by the same quadrature as :func:`h1_norm_sq`."""
    if not u.grid.same_mesh(v.grid):
        raise ValueError("fields live on different grids")
    du = nodal_derivative(u.grid, u.values)
    dv = nodal_derivative(v.grid, v.values)
    return volume_integral(u.grid, du * dv + u.values * v.values)


def lp_norm(u: RadialField, p: float) -> float:
    """Lebesgue norm ``(4*pi * int |u|^p r^2 dr)^(1/p)`` for p >= 1."""
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(volume_integral(u.grid, np.abs(u.values) ** p) ** (1.0 / p))


def l2_norm(grid: RadialGrid, nodal: np.ndarray) -> float:
    return float(np.sqrt(np.dot(grid.weights, nodal * nodal)))
