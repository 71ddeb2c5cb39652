"""Self-contained oracle checks behind the ``verify`` subcommand.

Each check pits an implementation path against an independent reference:
closed-form kernel integrals, an explicit double-sum kernel, central finite
differences of the energy, and algebraic identities.  Checks return small
dicts so the CLI can emit a machine-readable report.
"""

from __future__ import annotations

import numpy as np

from .energy import bound_identity, energy, gradient, gradient_values
from .grid import RadialField, build_uniform, laplacian
from .poisson import Potential, potential
from .search import jacobian_apply

__all__ = ["check_kernel_indicator", "check_kernel_order", "check_kernel_two_pass",
           "check_gradient_fd", "check_jacobian_fd", "check_bound_identity",
           "check_volume_exactness", "check_laplacian_quadratic", "run_all"]


def _result(name: str, value: float, threshold: float, detail: str = "") -> dict:
    return {"name": name, "passed": bool(value <= threshold),
            "value": float(value), "threshold": float(threshold),
            "detail": detail}


def _indicator_error(n: int, radius: float = 2.0, a: float = 1.0,
                     potential_fn=potential) -> float:
    grid = build_uniform(radius, n)
    vals = np.where(grid.r <= a, 1.0, 0.0)
    vals[-1] = 0.0
    phi = potential_fn(RadialField(grid, vals)).values
    exact = np.where(grid.r <= a, a**2 / 2.0 - grid.r**2 / 6.0,
                     a**3 / (3.0 * np.maximum(grid.r, 1e-300)))
    exact[0] = a**2 / 2.0
    return float(np.abs((phi - exact) / exact).max())


def check_kernel_indicator(potential_fn=potential) -> dict:
    """Potential of the unit-density ball against its closed form.

    For u^2 the indicator of [0, a]: ``phi = a^2/2 - r^2/6`` inside and
    ``a^3 / (3 r)`` outside, continuous at a with value a^2/3.
    """
    err = _indicator_error(2048, potential_fn=potential_fn)
    return _result("kernel_indicator", err, 1e-5,
                   "max relative error at n=2048, R=2, a=1")


def check_kernel_order(potential_fn=potential) -> dict:
    e1 = _indicator_error(2048, potential_fn=potential_fn)
    e2 = _indicator_error(4096, potential_fn=potential_fn)
    order = np.log2(e1 / e2)
    return {"name": "kernel_order", "passed": bool(order >= 1.8),
            "value": float(order), "threshold": 1.8,
            "detail": "observed convergence order, n=2048 vs 4096"}


def check_kernel_two_pass() -> dict:
    """Two-pass cumulative kernel against the direct O(n^2) double sum."""
    grid = build_uniform(2.0, 256)
    rng = np.random.default_rng(7)
    vals = rng.normal(size=grid.n) * (1.0 - (grid.r / grid.radius) ** 2)
    vals[-1] = 0.0
    u = RadialField(grid, vals)
    fast = potential(u).values
    r, w = grid.r, grid.kernel_weights
    g = vals * vals
    direct = np.empty(grid.n)
    direct[0] = np.sum(w * g * r)
    for i in range(1, grid.n):
        direct[i] = np.sum(w * g * r * np.minimum(r[i], r)) / r[i]
    scale = max(np.abs(direct).max(), 1e-300)
    err = float(np.abs(fast - direct).max() / scale)
    return _result("kernel_two_pass", err, 1e-12, "n=256 random field")


def _random_smooth(grid, rng) -> RadialField:
    s = grid.r / grid.radius
    coeff = rng.normal(size=5)
    vals = (1.0 - s**2) * sum(c * s ** (2 * j) for j, c in enumerate(coeff))
    return RadialField(grid, vals)


def check_gradient_fd(pairs: int = 20, eps: float = 1e-5) -> dict:
    """Central differences of E against the weighted pairing with gradient."""
    grid = build_uniform(3.0, 257)
    rng = np.random.default_rng(11)
    worst = 0.0
    qs = [3.0, 3.5, 4.0, 4.9]
    for trial in range(pairs):
        q = qs[trial % len(qs)]
        u = _random_smooth(grid, rng)
        v = _random_smooth(grid, rng)
        e_plus = energy(RadialField(grid, u.values + eps * v.values), q).total
        e_minus = energy(RadialField(grid, u.values - eps * v.values), q).total
        fd = (e_plus - e_minus) / (2.0 * eps)
        ip = float(np.dot(grid.weights, gradient(u, q).values * v.values))
        worst = max(worst, abs(fd - ip) / max(abs(ip), 1e-300))
    return _result("gradient_fd", worst, 1e-6,
                   f"{pairs} random smooth pairs, eps={eps:g}")


def check_jacobian_fd(pairs: int = 20, eps: float = 1e-5) -> dict:
    """Jacobian action against central differences of the gradient."""
    grid = build_uniform(3.0, 257)
    rng = np.random.default_rng(13)
    worst = 0.0
    qs = [3.0, 3.5, 4.0, 4.9]
    for trial in range(pairs):
        q = qs[trial % len(qs)]
        u = _random_smooth(grid, rng)
        v = _random_smooth(grid, rng)
        g_plus = gradient_values(grid, u.values + eps * v.values, q)
        g_minus = gradient_values(grid, u.values - eps * v.values, q)
        fd = (g_plus - g_minus) / (2.0 * eps)
        jv = jacobian_apply(u, v, q).values
        scale = max(float(np.abs(jv).max()), 1e-300)
        worst = max(worst, float(np.abs(fd - jv).max()) / scale)
    return _result("jacobian_fd", worst, 1e-6,
                   f"{pairs} random smooth pairs, eps={eps:g}")


def check_bound_identity(fields: int = 100) -> dict:
    """The stationarity-energy identity, algebraically zero for all fields."""
    grid = build_uniform(2.0, 129)
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(fields):
        u = _random_smooth(grid, rng)
        for q in (3.0, 3.5, 4.0, 4.9):
            rep = energy(u, q)
            scale = max(1.0, abs(rep.total), 2.0 * (rep.kinetic + rep.mass),
                        abs(rep.power) * (q + 1.0))
            worst = max(worst, abs(bound_identity(u, q)) / scale)
    return _result("bound_identity", worst, 1e-12,
                   f"{fields} random fields, q in (3, 3.5, 4, 4.9)")


def check_volume_exactness() -> dict:
    worst = 0.0
    for radius, n in ((1.0, 16), (1.0, 2048), (7.5, 333), (20.0, 4001)):
        grid = build_uniform(radius, n)
        vol = 4.0 * np.pi * radius**3 / 3.0
        worst = max(worst, abs(grid.weights.sum() - vol) / vol)
    return _result("volume_exactness", worst, 1e-12,
                   "quadrature of constants reproduces the ball volume")


def check_laplacian_quadratic() -> dict:
    worst = 0.0
    for radius, n in ((1.0, 16), (5.0, 640)):
        grid = build_uniform(radius, n)
        u = RadialField(grid, grid.r**2, check_trace=False)
        worst = max(worst, float(np.abs(laplacian(u).values - 6.0).max()))
    return _result("laplacian_quadratic", worst, 1e-8,
                   "discrete Laplacian exact on r^2 at every node")


def run_all() -> list[dict]:
    return [
        check_volume_exactness(),
        check_laplacian_quadratic(),
        check_kernel_indicator(),
        check_kernel_order(),
        check_kernel_two_pass(),
        check_gradient_fd(),
        check_jacobian_fd(),
        check_bound_identity(),
    ]
