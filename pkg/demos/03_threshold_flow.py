"""Decay versus blow-up across the amplitude threshold.

Integrates the parabolic flow from small and large multiples of the
alternating bump combination, prints the verdicts and the energy decay, and
writes plot-ready CSV histories (t, E, ut_norm, nodal_count).
"""

import numpy as np

from spsflow import FlowConfig, build_basis, build_uniform, combine, integrate


def describe(tag, traj):
    E = traj.history_energy
    print(f"{tag}: verdict {traj.verdict.value} at t = {traj.final.t:.3f}, "
          f"E from {E[0]:.3f} to {E[-1]:.3f}, "
          f"{traj.history_t.size} accepted steps, "
          f"{traj.rejected_steps} rejected")
    name = f"trajectory_{tag}.csv"
    with open(name, "w") as fh:
        fh.write("t,E,ut_norm,nodal_count\n")
        for row in zip(traj.history_t, E, traj.history_ut, traj.history_count):
            fh.write(",".join(repr(float(x)) for x in row[:3])
                     + f",{int(row[3])}\n")
    print(f"  history written to {name}")


def main():
    grid = build_uniform(5.0, 801)
    basis = build_basis(2, 3.5, grid)
    cfg = FlowConfig(t_max=30.0)
    for tag, amplitude in (("subcritical", 0.2), ("supercritical", 1.2)):
        u0 = combine(basis, [amplitude, -amplitude])
        describe(tag, integrate(u0, basis.q, cfg))


if __name__ == "__main__":
    main()
