"""Energy functional, its gradient, and the stationarity certificates.

The functional on H^1_0(B_R) is

    E(u) = 1/2 |grad u|_2^2 + 1/2 |u|_2^2 + 1/4 int phi_u u^2
           - 1/(q+1) |u|_{q+1}^{q+1},        q in [3, 5).

All four parts are evaluated with mutually compatible discrete forms so that
the strong-form gradient returned by :func:`gradient` is, on trace-zero
fields, the exact gradient of the discrete energy in the grid's weighted
L^2 product.  Concretely the kinetic part is the quadratic form
``2*pi*h*sum(((x_{i+1}-x_i)/h)^2)`` with ``x = r*u``, which coincides
algebraically with ``1/2 <-lap u, u>_w`` because the centered radial stencil
satisfies ``lap u = D2(r u)/r`` at interior nodes.  Consequences used by the
tests: central finite differences of E match ``<gradient(u), v>`` to O(eps^2),
the Nehari value vanishes at discrete equilibria to solver tolerance, and
:func:`bound_identity` is algebraically zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import RadialField, RadialGrid, laplacian_rows, volume_integral
from .poisson import potential_values

__all__ = ["EnergyReport", "energy", "energy_parts", "gradient",
           "gradient_values", "nehari_value", "bound_identity",
           "operator_norm_sq", "l2_inner", "check_exponent"]

Q_LOW, Q_HIGH = 3.0, 5.0


def check_exponent(q: float) -> float:
    q = float(q)
    if not (Q_LOW <= q < Q_HIGH):
        raise ValueError(f"power exponent q must lie in [{Q_LOW}, {Q_HIGH}), got {q}")
    return q


@dataclass(frozen=True)
class EnergyReport:
    """Value of E split into its four parts (total == sum of parts)."""

    total: float
    kinetic: float
    mass: float
    coulomb: float
    power: float
    q: float

    def as_dict(self) -> dict:
        return {"total": self.total, "kinetic": self.kinetic, "mass": self.mass,
                "coulomb": self.coulomb, "power": self.power, "q": self.q}


def _dirichlet_form(grid: RadialGrid, values: np.ndarray) -> float:
    # 4*pi * int ((r u)')^2 dr == |grad u|_2^2 for u with zero trace
    x = grid.r * values
    d = np.diff(x)
    return float(4.0 * np.pi * np.dot(d, d) / grid.h)


def energy_parts(grid: RadialGrid, values: np.ndarray, q: float,
                 phi: np.ndarray | None = None) -> tuple[float, float, float, float]:
    """(kinetic, mass, coulomb, power) of a nodal array; hot path."""
    if phi is None:
        phi = potential_values(grid, values)
    u2 = values * values
    kinetic = 0.5 * _dirichlet_form(grid, values)
    mass = 0.5 * volume_integral(grid, u2)
    coulomb = 0.25 * volume_integral(grid, phi * u2)
    power = -volume_integral(grid, np.abs(values) ** (q + 1.0)) / (q + 1.0)
    return kinetic, mass, coulomb, power


def energy(u: RadialField, q: float) -> EnergyReport:
    """Energy of a trace-zero field, reported part by part."""
    q = check_exponent(q)
    if u.values[-1] != 0.0:
        raise ValueError("energy requires a zero-trace field")
    kin, mass, coul, power = energy_parts(u.grid, u.values, q)
    return EnergyReport(total=kin + mass + coul + power, kinetic=kin,
                        mass=mass, coulomb=coul, power=power, q=q)


def gradient_values(grid: RadialGrid, values: np.ndarray, q: float,
                    phi: np.ndarray | None = None) -> np.ndarray:
    """Strong-form residual ``-lap u + u + phi_u u - |u|^{q-1} u`` (array form).

    Zero at the boundary node; equilibria of the flow are its zeros.
    """
    if phi is None:
        phi = potential_values(grid, values)
    sub, diag, sup = laplacian_rows(grid)
    u = values
    lap = np.empty(grid.n)
    lap[0] = diag[0] * u[0] + sup[0] * u[1]
    lap[1:-1] = sub[1:-1] * u[:-2] + diag[1:-1] * u[1:-1] + sup[1:-1] * u[2:]
    g = -lap + u + phi * u - np.abs(u) ** (q - 1.0) * u
    g[-1] = 0.0
    return g


def gradient(u: RadialField, q: float) -> RadialField:
    q = check_exponent(q)
    return RadialField(u.grid, gradient_values(u.grid, u.values, q))


def operator_norm_sq(grid: RadialGrid, values: np.ndarray) -> float:
    """The H^1 form paired to the gradient: ``<(-lap + 1) u, u>_w`` exactly."""
    return _dirichlet_form(grid, values) + volume_integral(grid, values * values)


def l2_inner(grid: RadialGrid, a: np.ndarray, b: np.ndarray) -> float:
    """Weighted L^2 pairing ``4*pi * int a b r^2 dr``."""
    return float(np.dot(grid.weights, a * b))


def nehari_value(u: RadialField, q: float) -> float:
    """Directional derivative of E along u: ``|u|^2 + int phi_u u^2 - |u|_{q+1}^{q+1}``.

    Assembled from the same discrete parts as :func:`energy`, so it equals
    ``<gradient(u), u>`` identically and vanishes at discrete equilibria.
    """
    q = check_exponent(q)
    kin, mass, coul, power = energy_parts(u.grid, u.values, q)
    return 2.0 * (kin + mass) + 4.0 * coul + (q + 1.0) * power


def bound_identity(u: RadialField, q: float) -> float:
    """Defect of ``E - 1/4 E'(u)u - 1/4 |u|^2 - (q-3)/(4(q+1)) |u|_{q+1}^{q+1}``.

    Algebraically zero for every field and exponent; returned so tests can
    assert it at roundoff level.
    """
    q = check_exponent(q)
    kin, mass, coul, power = energy_parts(u.grid, u.values, q)
    total = kin + mass + coul + power
    norm_sq = 2.0 * (kin + mass)
    power_int = -(q + 1.0) * power
    nehari = norm_sq + 4.0 * coul - power_int
    return total - 0.25 * nehari - 0.25 * norm_sq \
        - (q - 3.0) / (4.0 * (q + 1.0)) * power_int
