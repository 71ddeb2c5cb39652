"""Full pipeline run: one sign-changing equilibrium on the ball of radius 5.

Bisects the attraction threshold along the alternating ray, harvests the
near-threshold trajectory, refines to a certified equilibrium, and prints
the certificates.  Writes the profile to equilibrium_profile.csv.
"""

import numpy as np

from spsflow import find_nodal, h1_norm_sq, potential


def main():
    result = find_nodal(k=2, q=3.5, radius=5.0, density=160.0, seed=0)
    cand = result.candidate
    print(f"threshold bracket: [{result.bracket.t_low:.8f}, "
          f"{result.bracket.t_high:.8f}] after {result.probe_count} probes")
    print(f"refinement route: {result.route} (grid density {result.density:g})")
    print(f"sign changes: {cand.nodal.count}")
    print(f"crossing radii: {[round(c, 4) for c in cand.nodal.crossings]}")
    print(f"extrema: {[(round(r, 3), round(v, 3)) for r, v in cand.nodal.extrema]}")
    print(f"energy: {cand.energy.total:.6f}  (kinetic {cand.energy.kinetic:.3f}, "
          f"mass {cand.energy.mass:.3f}, coulomb {cand.energy.coulomb:.3f}, "
          f"power {cand.energy.power:.3f})")
    print(f"residual: {cand.residual_inf:.2e}   "
          f"stationarity value: {cand.nehari:.2e} "
          f"(scale {1e-6 * h1_norm_sq(cand.field):.2e})")
    phi = potential(cand.field).values
    with open("equilibrium_profile.csv", "w") as fh:
        fh.write("r,u,phi\n")
        for row in zip(cand.field.grid.r, cand.field.values, phi):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    print("profile written to equilibrium_profile.csv")


if __name__ == "__main__":
    main()
