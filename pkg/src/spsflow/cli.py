"""Batch driver: verify, flow, find-nodal, and sweep subcommands.

Configuration comes from flags, optionally overlaid on a flat-key JSON file
(flags win).  Artifacts per run directory: ``summary.json``, ``profile.csv``
(columns r,u,phi), ``energy_history.csv`` (columns t,E,ut_norm,nodal_count).
Exit codes: 0 success, 2 configuration error, 3 search failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SEARCH = 3
EXIT_VERIFY = 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config plumbing

def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a flat JSON object")
    return data


def _merged(args: argparse.Namespace, key: str, default=None):
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    return getattr(args, "_config", {}).get(key, default)


def _parse_direction(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad direction {text!r}: {exc}") from exc


def _validated_run(args) -> dict:
    from .energy import Q_HIGH, Q_LOW

    k = _merged(args, "k", 2)
    q = _merged(args, "q", 3.5)
    density = _merged(args, "density", 200.0)
    if int(k) != k or k < 2:
        raise ConfigError(f"k must be an integer >= 2, got {k}")
    if not (Q_LOW <= q < Q_HIGH):
        raise ConfigError(
            f"q = {q} unsupported; this solver covers q in [{Q_LOW}, {Q_HIGH})")
    if density <= 0:
        raise ConfigError("density must be positive")
    return {"k": int(k), "q": float(q), "density": float(density),
            "seed": int(_merged(args, "seed", 0)),
            "jobs": int(_merged(args, "jobs", os.cpu_count() or 1)),
            "direction": _parse_direction(_merged(args, "direction")),
            "out": _merged(args, "out", "run_out")}


def _flow_config(args):
    from .flow import FlowConfig

    kwargs = {}
    dt = _merged(args, "dt")
    if dt is not None:
        kwargs["dt0"] = float(dt)
    t_max = _merged(args, "t-max")
    if t_max is not None:
        kwargs["t_max"] = float(t_max)
    try:
        return FlowConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _check_grid_size(radius: float, density: float) -> None:
    from .grid import MIN_NODES

    if radius < 1.0:
        raise ConfigError(f"radius must be >= 1, got {radius}")
    n = int(round(density * radius)) + 1
    if n < MIN_NODES:
        raise ConfigError(
            f"density {density} gives only {n} nodes on radius {radius}; "
            f"need at least {MIN_NODES}")


# ---------------------------------------------------------------------------
# artifact writers

def _write_profile(path: Path, grid, values, phi) -> None:
    with open(path, "w") as fh:
        fh.write("r,u,phi\n")
        for r, u, p in zip(grid.r, values, phi):
            fh.write(f"{float(r)!r},{float(u)!r},{float(p)!r}\n")


def _write_history(path: Path, trajectory) -> None:
    with open(path, "w") as fh:
        fh.write("t,E,ut_norm,nodal_count\n")
        for t, E, ut, c in zip(trajectory.history_t, trajectory.history_energy,
                               trajectory.history_ut, trajectory.history_count):
            fh.write(f"{float(t)!r},{float(E)!r},{float(ut)!r},{int(c)}\n")


def candidate_summary(result) -> dict:
    """summary.json payload for a search result (stable key order)."""
    cand = result.candidate
    return {
        "k": cand.k,
        "q": cand.q,
        "radius": cand.radius,
        "energy": cand.energy.as_dict(),
        "nodal": cand.nodal.as_dict(),
        "residual_inf": cand.residual_inf,
        "residual_l2": cand.residual_l2,
        "threshold": {"t_low": result.bracket.t_low,
                      "t_high": result.bracket.t_high,
                      "direction": list(result.direction)},
        "newton_iterations": cand.newton_iterations,
        "nehari_value": cand.nehari,
        "density": result.density,
        "requested_density": result.requested_density,
        "route": result.route,
        "probe_count": result.probe_count,
        "basis": result.basis.as_dict(),
    }


SUMMARY_KEYS = {"k", "q", "radius", "energy", "nodal", "residual_inf",
                "residual_l2", "threshold", "newton_iterations"}


def _validate_artifacts(out: Path) -> None:
    summary = json.loads((out / "summary.json").read_text())
    missing = SUMMARY_KEYS - set(summary)
    if missing:
        raise RuntimeError(f"summary.json missing keys: {sorted(missing)}")
    if (out / "profile.csv").read_text().splitlines()[0] != "r,u,phi":
        raise RuntimeError("profile.csv header mismatch")
    header = (out / "energy_history.csv").read_text().splitlines()[0]
    if header != "t,E,ut_norm,nodal_count":
        raise RuntimeError("energy_history.csv header mismatch")


def write_candidate_artifacts(result, out_dir: str | Path) -> Path:
    from .poisson import potential

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cand = result.candidate
    phi = potential(cand.field).values
    _write_profile(out / "profile.csv", cand.field.grid, cand.field.values, phi)
    _write_history(out / "energy_history.csv", result.trajectory)
    with open(out / "summary.json", "w") as fh:
        json.dump(candidate_summary(result), fh, indent=2)
        fh.write("\n")
    _validate_artifacts(out)
    return out


# ---------------------------------------------------------------------------
# subcommands

def cmd_verify(args) -> int:
    from .verify import run_all

    results = run_all()
    for res in results:
        status = "pass" if res["passed"] else "FAIL"
        print(f"[{status}] {res['name']}: {res['value']:.3e} "
              f"(threshold {res['threshold']:.1e}) {res['detail']}")
    out = _merged(args, "out", "verify_report.json")
    parent = Path(out).parent
    if str(parent) not in ("", "."):
        parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        json.dump({"checks": results,
                   "passed": all(r["passed"] for r in results)}, fh, indent=2)
        fh.write("\n")
    print(f"report written to {out}")
    if all(r["passed"] for r in results):
        return EXIT_OK
    failing = next(r["name"] for r in results if not r["passed"])
    print(f"verification failed; first failing property: {failing}", file=sys.stderr)
    return EXIT_VERIFY


def cmd_find_nodal(args) -> int:
    from .search import NewtonDiverged, NoStagnationFound, SeedBracketFailed, find_nodal

    run = _validated_run(args)
    radius = float(_merged(args, "radius", 5.0))
    _check_grid_size(radius, run["density"])
    cfg = _flow_config(args)
    try:
        result = find_nodal(run["k"], run["q"], radius, run["density"], cfg=cfg,
                            direction=run["direction"], seed=run["seed"])
    except (SeedBracketFailed, NoStagnationFound, NewtonDiverged) as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    out = write_candidate_artifacts(result, run["out"])
    cand = result.candidate
    print(f"found {cand.k - 1}-sign-change equilibrium at R={radius}: "
          f"E={cand.energy.total:.6g}, residual={cand.residual_inf:.2e}, "
          f"route={result.route}, artifacts in {out}")
    return EXIT_OK


def cmd_flow(args) -> int:
    from .basis import combine
    from .flow import integrate
    from .grid import RadialField, build_uniform
    from .poisson import potential
    from .search import _cached_basis  # same cache as the driver

    run = _validated_run(args)
    radius = float(_merged(args, "radius", 5.0))
    _check_grid_size(radius, run["density"])
    cfg = _flow_config(args)
    grid = build_uniform(radius, int(round(run["density"] * radius)) + 1)

    profile_path = _merged(args, "profile")
    amplitude = _merged(args, "amplitude")
    if (profile_path is None) == (amplitude is None):
        raise ConfigError("specify exactly one of --profile or --amplitude")
    if profile_path is not None:
        data = np.loadtxt(profile_path, delimiter=",", skiprows=1)
        vals = np.interp(grid.r, data[:, 0], data[:, 1])
        vals[-1] = 0.0
        u0 = RadialField(grid, vals)
    else:
        basis = _cached_basis(run["k"], run["q"], grid)
        d = run["direction"] or [(-1.0) ** j for j in range(run["k"])]
        u0 = combine(basis, float(amplitude) * np.asarray(d))
    perturb = _merged(args, "perturb")
    if perturb is not None:
        basis = _cached_basis(run["k"], run["q"], grid)
        u0 = RadialField(grid, u0.values + float(perturb) * basis.bumps[0].values)

    traj = integrate(u0, run["q"], cfg)
    out = Path(run["out"])
    out.mkdir(parents=True, exist_ok=True)
    _write_history(out / "energy_history.csv", traj)
    phi = potential(traj.final.field).values
    _write_profile(out / "profile.csv", grid, traj.final.field.values, phi)
    counts = traj.history_count
    monotone = bool((counts[1:] <= counts[:-1]).all()) if counts.size else True
    with open(out / "summary.json", "w") as fh:
        json.dump({"verdict": traj.verdict.value, "final_time": traj.final.t,
                   "final_energy": traj.final.energy,
                   "nodal_monotone": monotone,
                   "accepted_steps": int(counts.size),
                   "rejected_steps": traj.rejected_steps}, fh, indent=2)
        fh.write("\n")
    print(f"verdict {traj.verdict.value} at t={traj.final.t:.4g}; "
          f"nodal count audit {'clean' if monotone else 'VIOLATED'}; "
          f"artifacts in {out}")
    return EXIT_OK if monotone else EXIT_SEARCH


def cmd_sweep(args) -> int:
    from .sweep import profile_convergence, run_sweep

    run = _validated_run(args)
    radii_text = _merged(args, "radii", "5,10,20")
    try:
        radii = [float(x) for x in str(radii_text).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad radii {radii_text!r}: {exc}") from exc
    for R in radii:
        _check_grid_size(R, run["density"])
    cfg = _flow_config(args)
    report = run_sweep(run["k"], run["q"], radii, run["density"], cfg=cfg,
                       seed=run["seed"], jobs=run["jobs"],
                       warm_start=bool(_merged(args, "warm-start", False)))
    out = Path(run["out"])
    out.mkdir(parents=True, exist_ok=True)
    for entry in report.entries:
        if entry.result is not None:
            write_candidate_artifacts(entry.result, out / f"R{entry.radius:g}")
    probe = min(report.radii)
    distances = profile_convergence(report, probe) if len(report.candidates()) > 1 else []
    payload = {
        "k": report.k, "q": report.q, "radii": list(report.radii),
        "energy_bound": report.energy_bound,
        "max_energy": report.max_energy,
        "max_norm_sq": report.max_norm_sq,
        "energies_bounded": report.energies_bounded,
        "norms_bounded": report.norms_bounded,
        "outermost_crossings": report.outermost_crossings,
        "crossing_spread": report.crossing_spread,
        "strauss_constants": report.strauss_constants,
        "profile_distances": distances,
        "failures": [{"radius": e.radius, "error": e.error}
                     for e in report.entries if e.error],
    }
    with open(out / "sweep_report.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    with open(out / "crossings.csv", "w") as fh:
        fh.write("radius,outermost_crossing\n")
        for entry in report.entries:
            if entry.candidate is not None and entry.candidate.nodal.crossings:
                fh.write(f"{float(entry.radius)!r},"
                         f"{float(entry.candidate.nodal.crossings[-1])!r}\n")
    ok = all(e.error is None for e in report.entries)
    print(f"sweep over {radii}: bounds "
          f"{'hold' if report.energies_bounded and report.norms_bounded else 'FAIL'}, "
          f"crossing spread {report.crossing_spread:.3%}; artifacts in {out}")
    return EXIT_OK if ok else EXIT_SEARCH


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat-key JSON config file (flags override)")
    p.add_argument("--k", type=int, help="number of bumps (>= 2)")
    p.add_argument("--q", type=float, help="power exponent in [3, 5)")
    p.add_argument("--density", type=float, help="grid nodes per unit radius")
    p.add_argument("--dt", type=float, help="initial time step")
    p.add_argument("--t-max", type=float, help="flow horizon")
    p.add_argument("--direction", help="comma-separated ray coefficients")
    p.add_argument("--seed", type=int, help="seed for fallback direction sampling")
    p.add_argument("--jobs", type=int, help="parallel workers (sweep)")
    p.add_argument("--out", help="output file or directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spsflow",
        description="Sign-changing radial equilibria of the Schrodinger-"
                    "Poisson-Slater equation on balls, by threshold dynamics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the oracle property suites")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("find-nodal", help="find a k-1 sign-change equilibrium")
    _add_common(p)
    p.add_argument("--radius", type=float, help="ball radius (>= 1)")
    p.set_defaults(func=cmd_find_nodal)

    p = sub.add_parser("flow", help="integrate one trajectory and audit it")
    _add_common(p)
    p.add_argument("--radius", type=float, help="ball radius (>= 1)")
    p.add_argument("--amplitude", type=float,
                   help="initial datum = amplitude * combine(direction)")
    p.add_argument("--profile", help="initial datum from a profile.csv")
    p.add_argument("--perturb", type=float,
                   help="add this multiple of the first bump to the datum")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("sweep", help="search over a list of radii")
    _add_common(p)
    p.add_argument("--radii", help="comma-separated radii, increasing")
    p.add_argument("--warm-start", action="store_true", default=None,
                   help="seed each radius from the previous candidate")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config = _load_config(getattr(args, "config", None))
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
