"""Sign-change counting in the radial variable and nodal diagnostics.

The count of a nodal profile is the length of the longest alternating
subsequence of strictly-signed node values: values with ``|u_i| <= eps``
are treated as zero and skipped, and touching zero is not a sign change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import RadialField

__all__ = ["NodalProfile", "sign_changes", "sign_change_count",
           "extrema_amplitudes"]

DEFAULT_EPS_REL = 1e-8


@dataclass(frozen=True)
class NodalProfile:
    """Sign-change count, interpolated crossing radii, and signed extrema."""

    count: int
    crossings: tuple[float, ...]
    extrema: tuple[tuple[float, float], ...]

    def as_dict(self) -> dict:
        return {"count": self.count,
                "crossings": list(self.crossings),
                "extrema": [list(e) for e in self.extrema]}


def _threshold(values: np.ndarray, eps: float | None) -> float:
    if eps is None:
        peak = float(np.abs(values).max())
        return DEFAULT_EPS_REL * peak
    if eps < 0.0:
        raise ValueError("threshold must be nonnegative")
    return float(eps)


def sign_change_count(values: np.ndarray, eps: float) -> int:
    """Count of strict sign alternations among thresholded values (array form)."""
    s = np.sign(values) * (np.abs(values) > eps)
    s = s[s != 0.0]
    if s.size < 2:
        return 0
    return int(np.count_nonzero(s[1:] * s[:-1] < 0.0))


def sign_changes(u: RadialField, eps: float | None = None) -> NodalProfile:
    """Nodal profile of a field: count, crossings, and signed extrema.

    ``eps`` defaults to ``1e-8 * max|u|``.  Crossing radii are located by
    linear interpolation between the bracketing nodes of opposite
    thresholded sign (reporting only; the count never uses them).
    """
    vals = u.values
    r = u.grid.r
    e = _threshold(vals, eps)
    signed = np.nonzero(np.abs(vals) > e)[0]
    count = 0
    crossings: list[float] = []
    for a, b in zip(signed[:-1], signed[1:]):
        if vals[a] * vals[b] < 0.0:
            count += 1
            root = r[a] + (r[b] - r[a]) * vals[a] / (vals[a] - vals[b])
            crossings.append(float(root))
    return NodalProfile(count=count, crossings=tuple(crossings),
                        extrema=extrema_amplitudes(u))


def extrema_amplitudes(u: RadialField) -> tuple[tuple[float, float], ...]:
    """Positive local maxima and negative local minima as (radius, value).

    The center node counts as an extremum when it dominates its neighbor
    (its mirror neighbor is itself by radial symmetry).
    """
    vals = u.values
    r = u.grid.r
    out: list[tuple[float, float]] = []
    if vals[0] > 0.0 and vals[0] > vals[1]:
        out.append((0.0, float(vals[0])))
    elif vals[0] < 0.0 and vals[0] < vals[1]:
        out.append((0.0, float(vals[0])))
    v = vals
    interior = np.arange(1, u.grid.n - 1)
    up = (v[interior] > 0.0) & (v[interior] > v[interior - 1]) & (v[interior] > v[interior + 1])
    down = (v[interior] < 0.0) & (v[interior] < v[interior - 1]) & (v[interior] < v[interior + 1])
    for i in interior[up | down]:
        out.append((float(r[i]), float(v[i])))
    return tuple(out)
