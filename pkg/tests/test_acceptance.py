"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Heavy artifacts (the radius sweep and the two extra equilibrium cases) are
computed once per session and shared.  Run with ``pytest -s`` to see the
per-criterion lines.
"""

import time

import numpy as np
import pytest

from spsflow.basis import energy_upper_bound
from spsflow.energy import bound_identity, energy, gradient, gradient_values
from spsflow.flow import FlowConfig, integrate, step
from spsflow.grid import RadialField, build_uniform, h1_norm_sq
from spsflow.poisson import potential
from spsflow.search import find_nodal, jacobian_apply, refine_newton
from spsflow.sweep import profile_convergence, run_sweep

from conftest import smooth_field

DENSITY = 200.0


def _report(criterion, passed, detail, budget, elapsed):
    status = "PASS" if passed else "FAIL"
    print(f"\n[{status}] criterion {criterion}: {detail} "
          f"({elapsed:.1f}s of {budget:.0f}s budget)")
    assert passed, f"criterion {criterion}: {detail}"
    assert elapsed < budget, f"criterion {criterion} exceeded its runtime budget"


# ---------------------------------------------------------------------------
# shared heavy artifacts (wall time recorded for the budget checks)

FIXTURE_SECONDS = {}


@pytest.fixture(scope="module")
def sweep200():
    t0 = time.time()
    report = run_sweep(2, 3.5, [5.0, 10.0, 20.0], density=DENSITY, seed=0)
    FIXTURE_SECONDS["sweep200"] = time.time() - t0
    return report


@pytest.fixture(scope="module")
def case_k3():
    t0 = time.time()
    result = find_nodal(3, 3.5, 5.0, density=DENSITY, seed=0)
    FIXTURE_SECONDS["case_k3"] = time.time() - t0
    return result


@pytest.fixture(scope="module")
def case_q3():
    t0 = time.time()
    result = find_nodal(2, 3.0, 5.0, density=DENSITY, seed=0)
    FIXTURE_SECONDS["case_q3"] = time.time() - t0
    return result


@pytest.fixture(scope="module")
def random_trajectories():
    grid = build_uniform(5.0, 512)
    rng = np.random.default_rng(2024)
    amplitudes = [0.3, 0.8, 1.5, 2.5, 4.0]
    trajectories = []
    for amp in amplitudes:
        u0 = smooth_field(grid, rng, amplitude=amp, modes=6)
        trajectories.append(integrate(u0, 3.5, FlowConfig(t_max=20.0)))
    return trajectories


# ---------------------------------------------------------------------------

def test_criterion_1_kernel_oracle():
    t0 = time.time()

    def rel_error(n):
        g = build_uniform(2.0, n)
        vals = np.where(g.r <= 1.0, 1.0, 0.0)
        vals[-1] = 0.0
        phi = potential(RadialField(g, vals)).values
        exact = np.where(g.r <= 1.0, 0.5 - g.r**2 / 6.0,
                         1.0 / (3.0 * np.maximum(g.r, 1e-300)))
        exact[0] = 0.5
        return np.abs((phi - exact) / exact).max()

    err = rel_error(2048)
    order = np.log2(rel_error(2048) / rel_error(4096))
    elapsed = time.time() - t0
    _report(1, err <= 1e-5 and order >= 1.8,
            f"indicator kernel max rel err {err:.2e} (<= 1e-5), "
            f"order {order:.2f} (>= 1.8)", 1.0, elapsed)


def test_criterion_2_gradient_consistency():
    t0 = time.time()
    grid = build_uniform(3.0, 257)
    rng = np.random.default_rng(7)
    eps = 1e-5
    qs = [3.0, 3.5, 4.0, 4.9]
    worst_grad = worst_jac = 0.0
    for trial in range(20):
        q = qs[trial % 4]
        u = smooth_field(grid, rng)
        v = smooth_field(grid, rng)
        e_plus = energy(RadialField(grid, u.values + eps * v.values), q).total
        e_minus = energy(RadialField(grid, u.values - eps * v.values), q).total
        fd = (e_plus - e_minus) / (2.0 * eps)
        ip = float(np.dot(grid.weights, gradient(u, q).values * v.values))
        worst_grad = max(worst_grad, abs(fd - ip) / abs(ip))
        gfd = (gradient_values(grid, u.values + eps * v.values, q)
               - gradient_values(grid, u.values - eps * v.values, q)) / (2 * eps)
        jv = jacobian_apply(u, v, q).values
        worst_jac = max(worst_jac, np.abs(gfd - jv).max() / np.abs(jv).max())
    elapsed = time.time() - t0
    _report(2, worst_grad <= 1e-6 and worst_jac <= 1e-6,
            f"gradient FD rel err {worst_grad:.2e}, Jacobian FD rel err "
            f"{worst_jac:.2e} (both <= 1e-6, 20 pairs)", 10.0, elapsed)


def test_criterion_3_bound_identity():
    t0 = time.time()
    grid = build_uniform(2.0, 129)
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        u = smooth_field(grid, rng, amplitude=rng.uniform(0.2, 4.0))
        for q in (3.0, 3.5, 4.0, 4.9):
            rep = energy(u, q)
            scale = max(1.0, abs(rep.total), 2.0 * (rep.kinetic + rep.mass),
                        abs(rep.power) * (q + 1.0))
            worst = max(worst, abs(bound_identity(u, q)) / scale)
    elapsed = time.time() - t0
    _report(3, worst <= 1e-12,
            f"stationarity-energy identity defect {worst:.2e} "
            f"(<= 1e-12, 100 fields x 4 exponents)", 5.0, elapsed)


def test_criterion_4_dissipation(random_trajectories):
    t0 = time.time()
    worst_increase = -np.inf
    worst_identity = 0.0
    checked = 0
    for traj in random_trajectories:
        E = np.concatenate([[traj.snapshots[0].energy], traj.history_energy])
        dE = np.diff(E)
        worst_increase = max(worst_increase, dE.max() if dE.size else -np.inf)
        dissipated = traj.history_dt * traj.history_ut**2
        floor = 1e3 * np.finfo(float).eps * (1.0 + np.abs(E[:-1]))
        active = dissipated > floor
        checked += int(active.sum())
        if active.any():
            rel = np.abs(dE[active] + dissipated[active]) / dissipated[active]
            worst_identity = max(worst_identity, rel.max())
    elapsed = time.time() - t0
    _report(4, worst_increase <= 1e-10 and worst_identity <= 0.2,
            f"5 random trajectories (n=512, R=5): max energy increase "
            f"{worst_increase:.2e} (<= 1e-10), dissipation identity defect "
            f"{worst_identity:.3f} (<= 0.2 on {checked} steps)", 60.0, elapsed)


def test_criterion_5_zero_count_monotonicity(random_trajectories, sweep200,
                                             case_k3, case_q3):
    t0 = time.time()
    trajectories = list(random_trajectories)
    trajectories += [e.result.trajectory for e in sweep200.entries
                     if e.result is not None]
    trajectories += [case_k3.trajectory, case_q3.trajectory]
    violations = 0
    snapshots = 0
    for traj in trajectories:
        counts = traj.history_count
        violations += int((np.diff(counts) > 0).sum())
        snapshots += counts.size
        snap_counts = np.array([s.nodal_count for s in traj.snapshots])
        violations += int((np.diff(snap_counts) > 0).sum())
    elapsed = time.time() - t0
    _report(5, violations == 0,
            f"sign-change count nonincreasing across {len(trajectories)} "
            f"trajectories / {snapshots} steps: {violations} violations",
            60.0, elapsed)


def _check_candidate(result, k, q, radius):
    cand = result.candidate
    sup = float(np.abs(cand.field.values).max())
    checks = {
        "count": cand.nodal.count == k - 1,
        "residual": cand.residual_inf <= 1e-8 * (1.0 + sup),
        "nehari": abs(cand.nehari) <= 1e-6 * h1_norm_sq(cand.field),
        "extrema": all(abs(v) >= 0.99 for _, v in cand.nodal.extrema),
        "energy_bound": cand.energy.total <= energy_upper_bound(result.basis),
    }
    return checks, sup


def test_criterion_6_nodal_existence(sweep200, case_k3, case_q3):
    t0 = time.time()
    cases = []
    for entry in sweep200.entries[:2]:  # R = 5 and R = 10 at (k, q) = (2, 3.5)
        assert entry.result is not None, entry.error
        cases.append(((2, 3.5, entry.radius), entry.result, entry.seconds))
    cases.append(((3, 3.5, 5.0), case_k3, FIXTURE_SECONDS["case_k3"]))
    cases.append(((2, 3.0, 5.0), case_q3, FIXTURE_SECONDS["case_q3"]))
    lines = []
    ok = True
    for (k, q, radius), result, seconds in cases:
        checks, sup = _check_candidate(result, k, q, radius)
        ok = ok and all(checks.values()) and seconds < 600.0
        failed = [name for name, good in checks.items() if not good]
        lines.append(f"(k={k}, q={q}, R={radius:g}): "
                     + ("all certificates hold" if not failed
                        else f"FAILED {failed}")
                     + f" [E={result.candidate.energy.total:.3f}, "
                       f"count={result.candidate.nodal.count}, "
                       f"density={result.density:g}, {seconds:.0f}s of 600s]")
    # threshold ordering heuristic: the k=2 and k=3 thresholds along the
    # alternating ray differ (distinct solutions); logged, not enforced
    t2 = sweep200.entries[0].result.bracket.midpoint
    t3 = case_k3.bracket.midpoint
    print(f"\n  threshold amplitudes along the alternating ray: "
          f"k=2 -> {t2:.6f}, k=3 -> {t3:.6f} "
          f"({'distinct' if abs(t2 - t3) > 1e-3 else 'coincide'} at 1e-3)")
    elapsed = time.time() - t0 + sum(c[2] for c in cases)
    _report(6, ok, "; ".join(lines), 4 * 600.0, elapsed)


def test_criterion_7_radius_uniformity(sweep200):
    t0 = time.time()
    assert all(e.error is None for e in sweep200.entries), \
        [e.error for e in sweep200.entries]
    bound = sweep200.energy_bound
    energies_ok = sweep200.max_energy <= bound
    norms_ok = sweep200.max_norm_sq <= 4.0 * bound
    crossings_ok = sweep200.crossing_spread <= 0.05
    distances = profile_convergence(sweep200, 5.0)
    cauchy_ok = distances[1] <= distances[0]
    elapsed = time.time() - t0 + FIXTURE_SECONDS["sweep200"]
    _report(7, energies_ok and norms_ok and crossings_ok and cauchy_ok,
            f"radii (5, 10, 20): max E {sweep200.max_energy:.2f} <= bound, "
            f"max norm^2 {sweep200.max_norm_sq:.2f} <= 4*bound, crossing "
            f"spread {sweep200.crossing_spread:.2%} (<= 5%), profile "
            f"distances {distances[0]:.2e} -> {distances[1]:.2e} (Cauchy)",
            2700.0, elapsed)


def test_criterion_8_parabolic_persistence(sweep200):
    t0 = time.time()
    result = sweep200.entries[0].result
    cand = result.candidate
    w1 = result.basis.bumps[0]
    u0 = RadialField(cand.field.grid, cand.field.values + 1e-6 * w1.values)
    traj = integrate(u0, cand.q, FlowConfig(t_max=50.0))
    counts = traj.history_count
    snap_counts = [s.nodal_count for s in traj.snapshots]
    all_one = bool((counts == 1).all()) and all(c == 1 for c in snap_counts)
    elapsed = time.time() - t0
    _report(8, all_one,
            f"perturbed k=2 candidate holds count 1 at every one of "
            f"{counts.size} steps (verdict {traj.verdict.value} at "
            f"t={traj.final.t:.3g}; the saddle's instability rate ~1e3 ends "
            f"the trajectory well before t=50)", 300.0, elapsed)


def test_criterion_9_symmetry(sweep200, rng):
    t0 = time.time()
    grid = build_uniform(5.0, 401)
    u = smooth_field(grid, rng, amplitude=1.3)
    step_odd = np.array_equal(step(-u, 3.5, 1e-3).values,
                              -step(u, 3.5, 1e-3).values)
    energy_even = energy(-u, 3.5).total == energy(u, 3.5).total
    cfg = FlowConfig(t_max=1.0)
    ta, tb = integrate(u, 3.5, cfg), integrate(-u, 3.5, cfg)
    mirror = np.abs(ta.final.field.values + tb.final.field.values).max() <= 1e-10

    cand = sweep200.entries[0].result.candidate
    paired = refine_newton(-cand.field, cand.q, k=cand.k)
    pairing = np.abs(paired.field.values + cand.field.values).max() <= 1e-10
    elapsed = time.time() - t0
    _report(9, step_odd and energy_even and mirror and pairing,
            f"odd step: {step_odd}, even energy: {energy_even}, mirrored "
            f"trajectories: {mirror}, negated candidate re-converges to the "
            f"negation: {pairing}", 60.0, elapsed)
