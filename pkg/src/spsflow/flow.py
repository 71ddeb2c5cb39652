"""Time integration of the nonlocal parabolic problem and trajectory verdicts.

The evolution is ``u_t - lap u + u = F(u)`` with
``F(u) = |u|^{q-1} u - phi_u u``, zero boundary values, integrated by an
IMEX step: the stiff linear part ``-lap + 1`` implicit (tridiagonal solve,
reflection row at r = 0), the nonlinearity explicit with phi frozen at the
current state.  Rearranged, one step reads

    (I + dt (-lap + 1)) (u_new - u_old) = -dt * gradient(u_old),

so the discrete time derivative is a filtered negative gradient and the
energy identity ``dE/dt = -|u_t|_2^2`` holds per step up to O(dt) relative
error.  A step is accepted only if the energy does not increase, the
identity holds within 20 percent (skipped below a roundoff floor), and the
sign-change count does not increase; otherwise dt is halved and the step
retried.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .grid import RadialField, RadialGrid, l2_norm, laplacian_rows
from .energy import check_exponent, energy_parts
from .nodal import sign_change_count
from .poisson import potential_values

__all__ = ["Verdict", "FlowConfig", "Snapshot", "FlowTrajectory",
           "TimeStepUnderflow", "FlowInvariantError", "step", "integrate"]

ENERGY_SLACK = 1e-10
DISSIPATION_REL = 0.2
DISSIPATION_FLOOR = 1e3 * np.finfo(float).eps


class TimeStepUnderflow(RuntimeError):
    """dt fell below the minimum while retrying a rejected step."""


class FlowInvariantError(RuntimeError):
    """A trajectory violated a structural invariant that halving dt cannot fix."""


class Verdict(enum.Enum):
    DECAYS_TO_ZERO = "DecaysToZero"
    BLOWS_UP = "BlowsUp"
    STAGNATES = "Stagnates"
    HORIZON_REACHED = "HorizonReached"


@dataclass(frozen=True)
class FlowConfig:
    """Integrator thresholds.  All positive; decay threshold below 1.

    ``stagnation_rel`` scales the initial L^2 norm to the threshold on
    ``|u_t|_2`` below which the state counts as an omega-limit candidate.
    """

    dt0: float = 1e-3
    t_max: float = 50.0
    decay_threshold: float = 1e-3
    blowup_cap: float = 1e6
    energy_floor: float = -1e6
    stagnation_rel: float = 1e-8
    snapshot_stride: int = 10
    dt_growth: float = 1.2
    dt_max_factor: float = 10.0
    growth_after: int = 10
    dt_min: float = 1e-12

    def __post_init__(self) -> None:
        if min(self.dt0, self.t_max, self.decay_threshold, self.blowup_cap,
               self.stagnation_rel, self.dt_growth - 1.0, self.dt_max_factor,
               self.dt_min) <= 0.0 or self.snapshot_stride < 1:
            raise ValueError("flow configuration values must be positive")
        if self.decay_threshold >= 1.0:
            raise ValueError("decay threshold must be below 1 "
                             "(nontrivial equilibria have extrema of size >= 1)")
        if self.energy_floor >= 0.0:
            raise ValueError("energy floor must be negative")


@dataclass(frozen=True)
class Snapshot:
    t: float
    field: RadialField
    energy: float
    ut_norm: float
    nodal_count: int


@dataclass
class FlowTrajectory:
    """Stored snapshots, per-step history arrays, and the final verdict."""

    verdict: Verdict
    snapshots: list[Snapshot]
    final: Snapshot
    min_ut: Snapshot | None
    history_t: np.ndarray
    history_dt: np.ndarray
    history_energy: np.ndarray
    history_ut: np.ndarray
    history_count: np.ndarray
    rejected_steps: int = 0
    count_rejections: int = 0
    harvest: list[Snapshot] = field(default_factory=list)


def _step_matrix(grid: RadialGrid, dt: float) -> np.ndarray:
    """Banded form of ``I - dt (lap - 1)`` on the unknowns u_0 .. u_{n-2}."""
    sub, diag, sup = laplacian_rows(grid)
    m = grid.n - 1
    ab = np.zeros((3, m))
    ab[1, :] = 1.0 - dt * (diag[:m] - 1.0)
    ab[0, 1:] = -dt * sup[:m - 1]
    ab[2, :-1] = -dt * sub[1:m]
    return ab


def _step_values(grid: RadialGrid, values: np.ndarray, phi: np.ndarray,
                 q: float, dt: float) -> np.ndarray:
    forcing = np.abs(values) ** (q - 1.0) * values - phi * values
    rhs = values[:-1] + dt * forcing[:-1]
    out = np.empty(grid.n)
    out[-1] = 0.0
    out[:-1] = solve_banded((1, 1), _step_matrix(grid, dt), rhs)
    return out


def step(u: RadialField, q: float, dt: float) -> RadialField:
    """One IMEX step of size dt from a trace-zero field."""
    q = check_exponent(q)
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    phi = potential_values(u.grid, u.values)
    return RadialField(u.grid, _step_values(u.grid, u.values, phi, q, dt))


def integrate(u0: RadialField, q: float, cfg: FlowConfig | None = None,
              collect_harvest: bool = False) -> FlowTrajectory:
    """Advance the flow until a verdict fires or the horizon is reached.

    Adaptive dt: halved (and the step retried) whenever the accept checks
    fail, grown by ``dt_growth`` after ``growth_after`` clean steps up to
    ``dt_max_factor * dt0``.  The sign-change threshold is frozen from the
    initial state so the monotonicity audit compares like with like.  With
    ``collect_harvest`` the trajectory keeps an energy-stratified reservoir
    of states whose count matches the initial count (omega-limit seeding).
    """
    q = check_exponent(q)
    cfg = cfg or FlowConfig()
    grid = u0.grid
    u = u0.values.copy()
    phi = potential_values(grid, u)
    energy_now = sum(energy_parts(grid, u, q, phi))
    eps0 = 1e-8 * float(np.abs(u).max())
    count_now = sign_change_count(u, eps0)
    count0 = count_now
    eta = cfg.stagnation_rel * l2_norm(grid, u)
    dt = cfg.dt0
    dt_max = cfg.dt_max_factor * cfg.dt0

    hist_t, hist_dt, hist_E, hist_ut, hist_c = [], [], [], [], []
    snapshots: list[Snapshot] = []
    harvest: list[Snapshot] = []
    harvest_last_energy = None
    min_ut: Snapshot | None = None
    rejected = 0
    count_rejected = 0

    def snap(t: float, vals: np.ndarray, E: float, utn: float, c: int) -> Snapshot:
        return Snapshot(t=t, field=RadialField(grid, vals), energy=E,
                        ut_norm=utn, nodal_count=c)

    def finish(verdict: Verdict, t: float, vals: np.ndarray, E: float,
               utn: float, c: int) -> FlowTrajectory:
        final = snap(t, vals, E, utn, c)
        if not snapshots or snapshots[-1].t != t:
            snapshots.append(final)
        return FlowTrajectory(
            verdict=verdict, snapshots=snapshots, final=final, min_ut=min_ut,
            history_t=np.array(hist_t), history_dt=np.array(hist_dt),
            history_energy=np.array(hist_E), history_ut=np.array(hist_ut),
            history_count=np.array(hist_c, dtype=int), rejected_steps=rejected,
            count_rejections=count_rejected, harvest=harvest)

    sup = float(np.abs(u).max())
    if sup < cfg.decay_threshold:
        return finish(Verdict.DECAYS_TO_ZERO, 0.0, u, energy_now, 0.0, count_now)
    if sup > cfg.blowup_cap or energy_now < cfg.energy_floor:
        return finish(Verdict.BLOWS_UP, 0.0, u, energy_now, 0.0, count_now)
    snapshots.append(snap(0.0, u, energy_now, 0.0, count_now))

    t = 0.0
    clean = 0
    accepted = 0
    while t < cfg.t_max:
        u_new = _step_values(grid, u, phi, q, dt)
        ok = bool(np.isfinite(u_new).all())
        if ok:
            phi_new = potential_values(grid, u_new)
            energy_new = sum(energy_parts(grid, u_new, q, phi_new))
            ut = (u_new - u) / dt
            ut_norm = l2_norm(grid, ut)
            count_new = sign_change_count(u_new, eps0)
            ok = energy_new <= energy_now + ENERGY_SLACK
            dissipated = dt * ut_norm**2
            if ok and dissipated > DISSIPATION_FLOOR * (1.0 + abs(energy_now)):
                ok = abs((energy_new - energy_now) + dissipated) \
                    <= DISSIPATION_REL * dissipated
            if ok and count_new > count_now:
                ok = False
                count_rejected += 1
        if not ok:
            rejected += 1
            clean = 0
            dt *= 0.5
            if dt < cfg.dt_min:
                raise TimeStepUnderflow(
                    f"dt underflow at t = {t:.6g} (energy {energy_now:.6g})")
            continue

        t += dt
        u, phi, energy_now, count_now = u_new, phi_new, energy_new, count_new
        accepted += 1
        hist_t.append(t); hist_dt.append(dt); hist_E.append(energy_now)
        hist_ut.append(ut_norm); hist_c.append(count_now)

        sup = float(np.abs(u).max())
        if min_ut is None or ut_norm < min_ut.ut_norm:
            if sup >= cfg.decay_threshold:
                min_ut = snap(t, u, energy_now, ut_norm, count_now)
        if collect_harvest and count_now == count0 and sup >= 0.5:
            if harvest_last_energy is None or energy_now < harvest_last_energy / 1.13:
                harvest.append(snap(t, u, energy_now, ut_norm, count_now))
                harvest_last_energy = energy_now
        if accepted % cfg.snapshot_stride == 0:
            snapshots.append(snap(t, u, energy_now, ut_norm, count_now))

        if sup < cfg.decay_threshold:
            return finish(Verdict.DECAYS_TO_ZERO, t, u, energy_now, ut_norm, count_now)
        if sup > cfg.blowup_cap or energy_now < cfg.energy_floor:
            return finish(Verdict.BLOWS_UP, t, u, energy_now, ut_norm, count_now)
        if ut_norm < eta:
            return finish(Verdict.STAGNATES, t, u, energy_now, ut_norm, count_now)

        clean += 1
        if clean >= cfg.growth_after and dt < dt_max:
            dt = min(dt * cfg.dt_growth, dt_max)
            clean = 0

    return finish(Verdict.HORIZON_REACHED, t, u, energy_now,
                  hist_ut[-1] if hist_ut else 0.0, count_now)
