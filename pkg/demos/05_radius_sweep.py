"""Sweep over growing radii: the radius-uniform bounds at desk scale.

Solves the k = 2 problem on balls of radius 2, 3, and 4 with a fixed mesh
width, then reports the uniform energy bound, the squared-norm bound, the
stability of the crossing radii, and the Cauchy trend of the profiles.
"""

from spsflow import profile_convergence, run_sweep


def main():
    report = run_sweep(k=2, q=3.5, radii=[2.0, 3.0, 4.0], density=160.0, seed=0)
    print(f"energy bound over the bump span: {report.energy_bound:.3e}")
    for entry in report.entries:
        cand = entry.candidate
        if cand is None:
            print(f"R = {entry.radius:g}: failed ({entry.error})")
            continue
        print(f"R = {entry.radius:g}: E = {cand.energy.total:9.4f}, "
              f"outermost crossing = {cand.nodal.crossings[-1]:.4f}, "
              f"count = {cand.nodal.count}")
    print(f"energies within the bound: {report.energies_bounded}")
    print(f"norms within 4x the bound: {report.norms_bounded}")
    print(f"crossing spread: {report.crossing_spread:.2%}")
    distances = profile_convergence(report, probe_radius=2.0)
    print(f"consecutive profile distances on [0, 2]: "
          f"{[f'{d:.2e}' for d in distances]}")


if __name__ == "__main__":
    main()
