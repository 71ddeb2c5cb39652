"""Threshold selection on the bump span and refinement to certified equilibria.

The selection mechanism: along a ray ``t -> t * sum_j d_j w_j`` in the bump
span, small amplitudes decay to zero and large ones blow up; amplitude
bisection brackets the crossing of the attraction-basin boundary.  The
trajectory started inside the final bracket shadows that boundary, and its
quiescent states carry the nodal structure of the sign-changing equilibrium.
Those states seed a damped Newton solve on the stationary system.

Because the target saddles are strongly unstable (their linearization grows
like ``q |u|_inf^{q-1}``, hundreds to thousands here), a double-precision
bracket is exhausted long before the trajectory fully relaxes, and plain
Newton from a quiescent snapshot tends to fall back to the radially
monotone ground state.  Two refinement stages bridge that gap:

* a ladder of harvested snapshots, stratified by energy, each tried as a
  Newton start (the count of the converged solution must match the target);
* a discrete nodal shooting pass: the stationary finite-difference rows are
  marched outward from a center amplitude, the amplitude bisected on the
  sign-change-count transition with the Poisson potential frozen from the
  best harvested snapshot, then the potential iterated to a fixed point.
  Amplitudes are capped below the spurious lattice root
  ``(6/h^2)^{1/(q-1)}`` of the center row, so sub-cell lattice artifacts
  are never accepted; if the transition only exists above the cap the grid
  is declared under-resolved and the driver escalates the density.

Every accepted candidate is certified by the plain Newton iteration and by
the structural checks (count, residual, Nehari value, crossing radii).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .basis import BumpBasis, build_basis, combine
from .energy import (EnergyReport, check_exponent, energy, gradient_values,
                     nehari_value)
from .flow import FlowConfig, FlowTrajectory, Verdict, integrate
from .grid import (RadialField, RadialGrid, build_uniform, h1_norm_sq,
                   l2_norm, laplacian_rows)
from .nodal import NodalProfile, sign_change_count, sign_changes
from .poisson import potential_values

__all__ = ["ThresholdBracket", "EquilibriumCandidate", "SeedBracketFailed",
           "NoStagnationFound", "NewtonDiverged", "classify",
           "bisect_threshold", "extract_candidate", "refine_newton",
           "jacobian_apply", "nodal_shooting_seed", "find_nodal", "FindResult"]


class SeedBracketFailed(RuntimeError):
    """Could not seed the amplitude bisection with decay below and escape above."""


class NoStagnationFound(RuntimeError):
    """No harvested trajectory state led to an acceptable equilibrium.

    ``resolution_limited`` marks failures the driver can only cure by
    refining the grid (the target profile has sub-mesh structure).
    """

    def __init__(self, message: str, resolution_limited: bool = False):
        super().__init__(message)
        self.resolution_limited = resolution_limited


class NewtonDiverged(RuntimeError):
    """Damped Newton could not decrease the residual (or hit its budget)."""


@dataclass(frozen=True)
class ThresholdBracket:
    """Amplitudes bracketing the basin boundary along a fixed ray."""

    direction: tuple[float, ...]
    t_low: float
    t_high: float
    probes: tuple[tuple[float, str], ...]

    @property
    def width(self) -> float:
        return self.t_high - self.t_low

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.t_low + self.t_high)


@dataclass(frozen=True)
class EquilibriumCandidate:
    """A refined equilibrium with its certificates."""

    field: RadialField
    q: float
    radius: float
    k: int
    residual_inf: float
    residual_l2: float
    energy: EnergyReport
    nodal: NodalProfile
    newton_iterations: int
    nehari: float
    residual_history: tuple[float, ...] = ()


def make_candidate(u: RadialField, q: float, k: int, newton_iterations: int,
                   residual_history: tuple[float, ...] = ()) -> EquilibriumCandidate:
    g = gradient_values(u.grid, u.values, q)
    return EquilibriumCandidate(
        field=u, q=q, radius=u.grid.radius, k=k,
        residual_inf=float(np.abs(g).max()), residual_l2=l2_norm(u.grid, g),
        energy=energy(u, q), nodal=sign_changes(u),
        newton_iterations=newton_iterations, nehari=nehari_value(u, q),
        residual_history=residual_history)


# ---------------------------------------------------------------------------
# classification and bisection

def classify(t: float, direction, basis: BumpBasis,
             cfg: FlowConfig | None = None,
             collect_harvest: bool = False) -> FlowTrajectory:
    """Integrate from ``t * combine(direction)`` and return the trajectory."""
    if t < 0.0:
        raise ValueError("amplitude must be nonnegative")
    d = np.asarray(direction, dtype=float)
    u0 = combine(basis, t * d)
    return integrate(u0, basis.q, cfg, collect_harvest=collect_harvest)


def bisect_threshold(direction, basis: BumpBasis, cfg: FlowConfig | None = None,
                     tol: float = 1e-6, t_low: float = 1e-3, t_high: float = 40.0,
                     classify_fn=None, max_probes: int = 200) -> ThresholdBracket:
    """Bisect the decay/escape threshold along a ray to width ``tol * t_high``.

    ``classify_fn(t) -> Verdict`` may be injected for testing; by default
    each probe runs the flow.  Seeds are auto-expanded (halving below,
    doubling above, ten times each) before :class:`SeedBracketFailed`.
    """
    d = tuple(float(x) for x in np.asarray(direction, dtype=float))
    if classify_fn is None:
        def classify_fn(t: float) -> Verdict:
            return classify(t, d, basis, cfg).verdict

    probes: list[tuple[float, str]] = []

    def probe(t: float) -> Verdict:
        v = classify_fn(t)
        probes.append((t, v.value))
        return v

    lo, hi = float(t_low), float(t_high)
    v = probe(lo)
    expand = 0
    while v is not Verdict.DECAYS_TO_ZERO and expand < 10:
        lo *= 0.5
        v = probe(lo)
        expand += 1
    if v is not Verdict.DECAYS_TO_ZERO:
        raise SeedBracketFailed(f"no decaying amplitude found down to t = {lo:g}")
    v = probe(hi)
    expand = 0
    while v is Verdict.DECAYS_TO_ZERO and expand < 10:
        hi *= 2.0
        v = probe(hi)
        expand += 1
    if v is Verdict.DECAYS_TO_ZERO:
        raise SeedBracketFailed(f"no escaping amplitude found up to t = {hi:g}")

    while (hi - lo) > tol * hi and len(probes) < max_probes:
        mid = 0.5 * (lo + hi)
        if probe(mid) is Verdict.DECAYS_TO_ZERO:
            lo = mid
        else:
            hi = mid
    return ThresholdBracket(direction=d, t_low=lo, t_high=hi,
                            probes=tuple(probes))


# ---------------------------------------------------------------------------
# Newton refinement

@lru_cache(maxsize=3)
def _kernel_matrix(grid: RadialGrid) -> np.ndarray:
    """Dense Poisson kernel: phi_i = sum_j K_ij u_j^2."""
    r, w = grid.r, grid.kernel_weights
    K = np.empty((grid.n, grid.n))
    K[0, :] = w * r
    K[1:, :] = (w * r)[None, :] * np.minimum.outer(r[1:], r) / r[1:, None]
    return K


def _kernel_apply(grid: RadialGrid, density: np.ndarray) -> np.ndarray:
    """Two-pass cumulative kernel applied to an arbitrary nodal density."""
    r, w = grid.r, grid.kernel_weights
    inner = np.cumsum(w * density * r * r)
    f1 = w * density * r
    outer = f1.sum() - np.cumsum(f1)
    out = np.empty(grid.n)
    out[0] = f1.sum()
    out[1:] = inner[1:] / r[1:] + outer[1:]
    return out


def jacobian_apply(u: RadialField, v: RadialField, q: float) -> RadialField:
    """Action of the gradient's derivative on v (matrix free).

    ``J[u] v = -lap v + v + phi_u v + 2 u K(u v) - q |u|^{q-1} v`` with K
    the Poisson kernel, evaluated by the same cumulative quadrature as the
    potential itself.
    """
    q = check_exponent(q)
    grid = u.grid
    if not grid.same_mesh(v.grid):
        raise ValueError("fields live on different grids")
    uv, vv = u.values, v.values
    sub, diag, sup = laplacian_rows(grid)
    lap = np.empty(grid.n)
    lap[0] = diag[0] * vv[0] + sup[0] * vv[1]
    lap[1:-1] = sub[1:-1] * vv[:-2] + diag[1:-1] * vv[1:-1] + sup[1:-1] * vv[2:]
    lap[-1] = 0.0
    phi = potential_values(grid, uv)
    kuv = _kernel_apply(grid, 2.0 * uv * vv)
    out = -lap + vv + phi * vv + uv * kuv - q * np.abs(uv) ** (q - 1.0) * vv
    out[-1] = 0.0
    return RadialField(grid, out, check_trace=False)


def _jacobian_dense(grid: RadialGrid, values: np.ndarray, q: float,
                    phi: np.ndarray) -> np.ndarray:
    """Dense Jacobian of the gradient on the unknown block u_0 .. u_{n-2}."""
    m = grid.n - 1
    sub, diag, sup = laplacian_rows(grid)
    J = 2.0 * (values[:m, None] * _kernel_matrix(grid)[:m, :m] * values[None, :m])
    idx = np.arange(m)
    J[idx, idx] += -diag[:m] + 1.0 + phi[:m] - q * np.abs(values[:m]) ** (q - 1.0)
    J[idx[:-1], idx[:-1] + 1] += -sup[:m - 1]
    J[idx[1:], idx[1:] - 1] += -sub[1:m]
    return J


def refine_newton(u0: RadialField, q: float, tol: float = 1e-10, k: int | None = None,
                  max_iterations: int = 200,
                  accept_tol: float = 1e-8) -> EquilibriumCandidate:
    """Damped Newton on the stationary system, certified as a candidate.

    Stops at ``|g|_inf <= tol * (1 + |u|_inf)``.  Damping halves the step
    until the residual decreases; when the line search stalls against the
    roundoff floor of the stencil (about ``eps * |u|_inf / h^2``) the state
    still counts as converged if it meets the certificate bound
    ``accept_tol * (1 + |u|_inf)``.  Anything else raises
    :class:`NewtonDiverged`.  ``k`` labels the candidate; by default it is
    inferred from the converged sign-change count.
    """
    q = check_exponent(q)
    grid = u0.grid
    u = u0.values.copy()
    u[-1] = 0.0
    m = grid.n - 1
    iterations = 0
    history: list[float] = []
    while True:
        phi = potential_values(grid, u)
        g = gradient_values(grid, u, q, phi)
        res = float(np.abs(g).max())
        history.append(res)
        sup = float(np.abs(u).max())
        if res <= tol * (1.0 + sup):
            break
        if iterations >= max_iterations:
            raise NewtonDiverged(
                f"no convergence in {max_iterations} iterations (residual {res:.3g})")
        J = _jacobian_dense(grid, u, q, phi)
        try:
            delta = np.linalg.solve(J, -g[:m])
        except np.linalg.LinAlgError as exc:
            raise NewtonDiverged(f"singular Jacobian: {exc}") from exc
        scale = 1.0
        accepted = False
        for _ in range(40):
            trial = u.copy()
            trial[:m] = u[:m] + scale * delta
            g_trial = gradient_values(grid, trial, q)
            if np.isfinite(g_trial).all() and np.abs(g_trial).max() < res:
                u = trial
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            if res <= accept_tol * (1.0 + sup):
                break
            raise NewtonDiverged(
                f"damping stalled at residual {res:.3g} after {iterations} iterations")
        iterations += 1
    field = RadialField(grid, u)
    count = sign_change_count(u, 1e-8 * max(float(np.abs(u).max()), 1e-300))
    return make_candidate(field, q, k if k is not None else count + 1, iterations,
                          residual_history=tuple(history))


# ---------------------------------------------------------------------------
# discrete nodal shooting (refinement bridge)

def _march(grid: RadialGrid, q: float, alpha: float, phi: np.ndarray) -> np.ndarray:
    """March the stationary finite-difference rows outward from u(0) = alpha."""
    n, h, r = grid.n, grid.h, grid.r
    u = np.zeros(n)
    u[0] = alpha
    f0 = u[0] + phi[0] * u[0] - abs(u[0]) ** (q - 1.0) * u[0]
    u[1] = u[0] + f0 * h * h / 6.0
    for i in range(1, n - 1):
        fi = u[i] + phi[i] * u[i] - abs(u[i]) ** (q - 1.0) * u[i]
        lo = 1.0 / h**2 - 1.0 / (h * r[i])
        up = 1.0 / h**2 + 1.0 / (h * r[i])
        val = (fi - lo * u[i - 1] + 2.0 * u[i] / h**2) / up
        if not np.isfinite(val) or abs(val) > 1e12:
            u[i + 1:] = val if np.isfinite(val) else 1e12
            break
        u[i + 1] = val
    return u


def _march_count(grid: RadialGrid, q: float, alpha: float, phi: np.ndarray) -> int:
    u = _march(grid, q, alpha, phi)
    return sign_change_count(u, 1e-6 * float(np.abs(u).max()))


def _shooting_fixed_point(grid: RadialGrid, q: float, target_count: int,
                          phi0: np.ndarray, cap: float,
                          outer_iterations: int) -> np.ndarray | None:
    phi = phi0.copy()
    profile = None
    for _ in range(outer_iterations):
        lo = 1.0
        while _march_count(grid, q, lo, phi) > target_count:
            lo *= 0.8
            if lo < 1e-8:
                return None
        hi = lo
        while _march_count(grid, q, hi, phi) <= target_count:
            hi *= 1.25
            if hi > cap:
                return None
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if _march_count(grid, q, mid, phi) <= target_count:
                lo = mid
            else:
                hi = mid
        profile = _march(grid, q, 0.5 * (lo + hi), phi)
        profile[-1] = 0.0
        phi_new = potential_values(grid, profile)
        dphi = float(np.abs(phi_new - phi).max())
        phi = 0.5 * phi + 0.5 * phi_new
        if dphi < 1e-9 * (1.0 + float(np.abs(phi).max())):
            break
    return profile


def nodal_shooting_seed(grid: RadialGrid, q: float, target_count: int,
                        phi_seed: np.ndarray | None = None,
                        outer_iterations: int = 60) -> RadialField | None:
    """Discrete shooting seed with ``target_count`` sign changes, or None.

    Bisects the center amplitude on the count transition
    ``target_count -> target_count + 1`` with the potential frozen, then
    iterates the potential to a fixed point.  Amplitudes stay below the
    lattice root of the center row; a transition that only exists above
    that cap, or a profile whose innermost crossing falls inside a single
    cell, means the grid cannot support the profile and None is returned.
    A too-large potential seed can hide the transition, so a zero seed is
    tried before giving up.
    """
    q = check_exponent(q)
    cap = 0.8 * (6.0 / grid.h**2) ** (1.0 / (q - 1.0))
    seeds = [np.zeros(grid.n)] if phi_seed is None else \
        [np.asarray(phi_seed, float), np.zeros(grid.n)]
    for phi0 in seeds:
        profile = _shooting_fixed_point(grid, q, target_count, phi0, cap,
                                        outer_iterations)
        if profile is None:
            continue
        if target_count >= 1:
            sign = np.sign(profile) * (np.abs(profile)
                                       > 1e-6 * np.abs(profile).max())
            nz = np.nonzero(sign)[0]
            flips = nz[:-1][sign[nz[:-1]] * sign[nz[1:]] < 0]
            if flips.size and grid.r[flips[0] + 1] < 2.0 * grid.h:
                continue        # innermost crossing inside one cell: artifact
        return RadialField(grid, profile)
    return None


# ---------------------------------------------------------------------------
# extraction

@dataclass
class ExtractionReport:
    candidate: EquilibriumCandidate
    trajectory: FlowTrajectory
    amplitude: float
    attempts: int
    route: str


def _acceptable(cand: EquilibriumCandidate, k: int) -> bool:
    u = cand.field
    sup = float(np.abs(u.values).max())
    if cand.nodal.count != k - 1 or sup < 0.5:
        return False
    if cand.residual_inf > 1e-8 * (1.0 + sup):
        return False
    if abs(cand.nehari) > 1e-6 * h1_norm_sq(u):
        return False
    if k >= 2 and cand.nodal.crossings and cand.nodal.crossings[0] < 2.0 * u.grid.h:
        return False        # sub-cell innermost crossing: lattice artifact
    return True


def _try_newton(u0: RadialField, q: float, k: int, tol: float,
                max_iterations: int) -> EquilibriumCandidate | None:
    try:
        cand = refine_newton(u0, q, tol=tol, k=k, max_iterations=max_iterations)
    except NewtonDiverged:
        return None
    return cand if _acceptable(cand, k) else None


def extract_candidate(bracket: ThresholdBracket, basis: BumpBasis,
                      cfg: FlowConfig | None = None, tol: float = 1e-10,
                      retries: int = 8, ladder_attempts: int = 3,
                      horizon_factor: float = 2.0) -> ExtractionReport:
    """Harvest the near-threshold trajectory and refine it to an equilibrium.

    The refinement ladder per trajectory: the minimal-``|u_t|`` snapshot by
    plain Newton; the discrete shooting seed (potential frozen from the
    best harvested snapshot) by plain Newton; then harvested snapshots,
    highest energy first, by plain Newton.  Amplitude retries walk
    geometrically toward the escaping endpoint, but only while the
    trajectory fails to harvest the target sign structure at all; once a
    structurally correct harvest refuses to certify twice, retrying other
    amplitudes cannot help and the extraction gives up (with the
    resolution-limited flag when the shooting pass found the profile to be
    finer than the mesh).
    """
    cfg = cfg or FlowConfig()
    cfg_long = replace(cfg, t_max=horizon_factor * cfg.t_max)
    k, q = basis.k, basis.q
    d = np.asarray(bracket.direction)
    attempts = 0
    harvested_attempts = 0
    resolution_limited = False
    last_error = "no harvested snapshot carried the target sign structure"
    for j in range(retries + 1):
        t_j = bracket.midpoint if j == 0 else \
            bracket.t_high - (bracket.t_high - bracket.midpoint) / 2.0**j
        traj = integrate(combine(basis, t_j * d), q, cfg_long, collect_harvest=True)
        attempts += 1

        if traj.min_ut is not None and traj.min_ut.nodal_count == k - 1:
            cand = _try_newton(traj.min_ut.field, q, k, tol, 120)
            if cand is not None:
                return ExtractionReport(cand, traj, t_j, attempts, "stagnation")

        if traj.harvest:
            harvested_attempts += 1
            best = max(traj.harvest, key=lambda s: s.energy)
            phi_seed = potential_values(basis.grid, best.field.values)
            seed = nodal_shooting_seed(basis.grid, q, k - 1, phi_seed)
            if seed is not None:
                cand = _try_newton(seed, q, k, tol, 200)
                if cand is not None:
                    return ExtractionReport(cand, traj, t_j, attempts, "shooting")
                last_error = "shooting seed did not certify"
            else:
                resolution_limited = True
                last_error = "grid too coarse for the target nodal profile"

            for snap in sorted(traj.harvest, key=lambda s: -s.energy)[:ladder_attempts]:
                cand = _try_newton(snap.field, q, k, tol, 120)
                if cand is not None:
                    return ExtractionReport(cand, traj, t_j, attempts, "ladder")
            if resolution_limited or harvested_attempts >= 2:
                break
    raise NoStagnationFound(
        f"extraction failed after {attempts} trajectories: {last_error}",
        resolution_limited=resolution_limited)


# ---------------------------------------------------------------------------
# driver

@dataclass
class FindResult:
    candidate: EquilibriumCandidate
    bracket: ThresholdBracket
    trajectory: FlowTrajectory
    basis: BumpBasis
    grid: RadialGrid
    density: float
    requested_density: float
    direction: tuple[float, ...]
    route: str
    probe_count: int


@lru_cache(maxsize=8)
def _cached_basis(k: int, q: float, grid: RadialGrid) -> BumpBasis:
    return build_basis(k, q, grid)


def calibrate_direction(basis: BumpBasis, cfg: FlowConfig | None = None,
                        tol: float = 3e-2) -> np.ndarray:
    """Alternating direction with each bump scaled to its own threshold."""
    taus = []
    for w in basis.bumps:
        def classify_fn(t: float, w=w) -> Verdict:
            return integrate(RadialField(w.grid, t * w.values), basis.q, cfg).verdict
        bracket = bisect_threshold((1.0,) * basis.k, basis, cfg, tol=tol,
                                   classify_fn=classify_fn)
        taus.append(bracket.midpoint)
    signs = np.array([(-1.0) ** j for j in range(basis.k)])
    return signs * np.asarray(taus)


def find_nodal(k: int, q: float, radius: float, density: float = 200.0,
               cfg: FlowConfig | None = None, direction=None, seed: int = 0,
               bisect_tol: float = 1e-6, newton_tol: float = 1e-10,
               direction_budget: int = 2, density_escalations: int = 2) -> FindResult:
    """Full pipeline: basis, threshold bisection, extraction, certification.

    Tries the alternating ray first, then the threshold-calibrated ray,
    then seeded random directions.  If every ray fails on a grid (for
    example the target profile is finer than the mesh) the density is
    doubled, up to ``density_escalations`` times; the density actually used
    is reported in the result.
    """
    q = check_exponent(q)
    rng = np.random.default_rng(seed)
    dens = float(density)
    last_exc: Exception | None = None
    for _ in range(density_escalations + 1):
        grid = build_uniform(radius, int(round(dens * radius)) + 1)
        basis = _cached_basis(int(k), q, grid)

        def attempt(d) -> FindResult:
            bracket = bisect_threshold(d, basis, cfg, tol=bisect_tol)
            report = extract_candidate(bracket, basis, cfg, tol=newton_tol)
            return FindResult(
                candidate=report.candidate, bracket=bracket,
                trajectory=report.trajectory, basis=basis, grid=grid,
                density=dens, requested_density=float(density),
                direction=bracket.direction, route=report.route,
                probe_count=len(bracket.probes))

        if direction is not None:
            rays = [np.asarray(direction, dtype=float)]
        else:
            rays = [np.array([(-1.0) ** j for j in range(k)]), None]
            rays += [rng.standard_normal(k) for _ in range(direction_budget)]
        for d in rays:
            if d is None:
                try:
                    d = calibrate_direction(basis, cfg)
                except (SeedBracketFailed, NoStagnationFound) as exc:
                    last_exc = exc
                    continue
            try:
                return attempt(d)
            except NoStagnationFound as exc:
                last_exc = exc
                if exc.resolution_limited:
                    # the target profile is finer than this mesh; no other
                    # ray can change that, so move straight to a finer grid
                    break
            except (SeedBracketFailed, NewtonDiverged) as exc:
                last_exc = exc
        dens *= 2.0
    raise NoStagnationFound(
        f"find_nodal failed for k={k}, q={q}, R={radius} (last error: {last_exc})")
