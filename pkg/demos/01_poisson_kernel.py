"""Poisson kernel accuracy against the closed form for a uniform ball density.

For u^2 = 1 on [0, a] the potential is a^2/2 - r^2/6 inside the support and
a^3/(3r) outside.  The script prints the max relative error of the kernel
quadrature at a few resolutions and the observed convergence order.
"""

import numpy as np

from spsflow import RadialField, build_uniform, potential


def kernel_error(n, radius=2.0, a=1.0):
    grid = build_uniform(radius, n)
    vals = np.where(grid.r <= a, 1.0, 0.0)
    vals[-1] = 0.0
    phi = potential(RadialField(grid, vals)).values
    exact = np.where(grid.r <= a, a**2 / 2 - grid.r**2 / 6,
                     a**3 / (3 * np.maximum(grid.r, 1e-300)))
    exact[0] = a**2 / 2
    return np.abs((phi - exact) / exact).max()


def main():
    print("resolution   max relative error   order")
    prev = None
    for n in (256, 512, 1024, 2048, 4096):
        err = kernel_error(n)
        order = "" if prev is None else f"{np.log2(prev / err):8.3f}"
        print(f"n = {n:5d}    {err:12.3e}       {order}")
        prev = err


if __name__ == "__main__":
    main()
