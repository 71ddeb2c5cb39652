"""Energy along rays of the bump span.

Builds the two-bump basis on a ball of radius 5, evaluates the energy along
the alternating ray t * (w1 - w2), and shows the mountain-pass geometry:
positive near zero, a barrier, then divergence to minus infinity.
"""

import numpy as np

from spsflow import build_basis, build_uniform, combine, energy
from spsflow.basis import energy_upper_bound


def main():
    grid = build_uniform(5.0, 801)
    basis = build_basis(2, 3.5, grid)
    print(f"bump norms^2: {[round(x, 1) for x in basis.norms_sq]}")
    print(f"coercivity margin (Coulomb vs power): {basis.coercivity_margin:.3f}")
    print(f"ray-independent energy bound: {energy_upper_bound(basis):.3e}")
    print()
    print("  t      E(t * (w1 - w2))")
    for t in (0.0, 0.2, 0.5, 0.8, 1.0, 1.5, 2.0, 5.0, 10.0, 20.0, 40.0):
        E = energy(combine(basis, [t, -t]), basis.q).total
        print(f"{t:5.1f}   {E:14.4f}")


if __name__ == "__main__":
    main()
