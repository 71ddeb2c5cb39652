import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spsflow.grid import RadialField, build_uniform
from spsflow.nodal import extrema_amplitudes, sign_changes

from conftest import smooth_field


def field_from(grid, head):
    vals = np.zeros(grid.n)
    vals[:len(head)] = head
    return RadialField(grid, vals)


class TestSignChanges:
    def test_alternating_example(self, grid_unit):
        u = field_from(grid_unit, [1.0, 1.0, -1.0, 2.0, -3.0])
        assert sign_changes(u).count == 3

    def test_touching_zero_is_not_a_change(self, grid_unit):
        u = field_from(grid_unit, [1.0, 0.0, 1.0])
        assert sign_changes(u).count == 0

    def test_zero_field(self, grid_unit):
        prof = sign_changes(RadialField(grid_unit, np.zeros(grid_unit.n)))
        assert prof.count == 0
        assert prof.crossings == ()

    def test_crossings_strictly_increasing(self, grid_r2, rng):
        for _ in range(10):
            u = smooth_field(grid_r2, rng, modes=7)
            prof = sign_changes(u)
            assert prof.count == len(prof.crossings)
            assert all(b > a for a, b in zip(prof.crossings, prof.crossings[1:]))
            assert all(0.0 < c < grid_r2.radius for c in prof.crossings)

    def test_crossing_location_linear_interpolation(self):
        g = build_uniform(1.0, 101)
        # u = (1 - r)(0.5 - r): zero trace, one interior crossing at r = 0.5
        u = RadialField(g, (1.0 - g.r) * (0.5 - g.r))
        prof = sign_changes(u)
        assert prof.count == 1
        assert prof.crossings[0] == pytest.approx(0.5, abs=g.h)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 9999), c=st.floats(0.01, 100.0),
           flip=st.booleans())
    def test_scaling_and_negation_invariance(self, seed, c, flip):
        g = build_uniform(1.0, 64)
        u = smooth_field(g, np.random.default_rng(seed), modes=6)
        scaled = RadialField(g, (-c if flip else c) * u.values)
        assert sign_changes(scaled).count == sign_changes(u).count

    def test_explicit_threshold(self, grid_unit):
        u = field_from(grid_unit, [1.0, -1e-10, 1.0])
        assert sign_changes(u, eps=1e-6).count == 0
        assert sign_changes(u, eps=0.0).count == 2
        with pytest.raises(ValueError):
            sign_changes(u, eps=-1.0)


class TestExtrema:
    def test_dome_has_center_extremum(self, grid_r2):
        R = grid_r2.radius
        u = RadialField(grid_r2, R**2 - grid_r2.r**2)
        ext = extrema_amplitudes(u)
        assert len(ext) == 1
        assert ext[0][0] == 0.0
        assert ext[0][1] == pytest.approx(R**2)

    def test_zero_field_empty(self, grid_unit):
        u = RadialField(grid_unit, np.zeros(grid_unit.n))
        assert extrema_amplitudes(u) == ()

    def test_interior_max_and_min(self):
        g = build_uniform(1.0, 201)
        vals = np.sin(2.0 * np.pi * g.r)
        vals[-1] = 0.0
        u = RadialField(g, vals)
        ext = extrema_amplitudes(u)
        radii = [e[0] for e in ext]
        values = [e[1] for e in ext]
        assert len(ext) == 2
        assert radii[0] == pytest.approx(0.25, abs=g.h)
        assert values[0] == pytest.approx(1.0, abs=1e-3)
        assert radii[1] == pytest.approx(0.75, abs=g.h)
        assert values[1] == pytest.approx(-1.0, abs=1e-3)

    def test_negative_center(self, grid_unit):
        u = RadialField(grid_unit, -(1.0 - grid_unit.r**2))
        ext = extrema_amplitudes(u)
        assert ext[0] == (0.0, -1.0)
