import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spsflow.energy import bound_identity, energy, gradient, nehari_value
from spsflow.grid import RadialField, build_uniform

from conftest import smooth_field

# u = 1 - r^2 on the unit ball at q = 3: the four parts in closed form
# (verified against a 1e5-point quadrature of the analytic integrands using
# phi(r) = r^2/3 - 2 r^4/5 + r^6/7 + (1 - r^2)^3 / 6)
DOME_KINETIC = 8.0 / 5.0 * np.pi
DOME_MASS = 16.0 / 105.0 * np.pi
DOME_COULOMB = 256.0 / 27027.0 * np.pi
DOME_POWER = -128.0 / 3465.0 * np.pi
DOME_TOTAL = DOME_KINETIC + DOME_MASS + DOME_COULOMB + DOME_POWER


def quadrature_oracle(samples=100_001):
    """Independent high-resolution 1-D quadrature of the four dome integrals."""
    r = np.linspace(0.0, 1.0, samples)
    u = 1.0 - r**2
    du = -2.0 * r
    phi = r**2 / 3.0 - 2.0 * r**4 / 5.0 + r**6 / 7.0 + (1.0 - r**2) ** 3 / 6.0
    kin = 0.5 * 4.0 * np.pi * np.trapezoid(du**2 * r**2, r)
    mass = 0.5 * 4.0 * np.pi * np.trapezoid(u**2 * r**2, r)
    coul = 0.25 * 4.0 * np.pi * np.trapezoid(phi * u**2 * r**2, r)
    power = -0.25 * 4.0 * np.pi * np.trapezoid(np.abs(u) ** 4 * r**2, r)
    return kin, mass, coul, power


class TestEnergy:
    def test_zero_field(self, grid_unit):
        rep = energy(RadialField(grid_unit, np.zeros(grid_unit.n)), 3.5)
        assert rep.total == rep.kinetic == rep.mass == rep.coulomb == rep.power == 0.0

    def test_even_in_u(self, grid_r2, rng):
        u = smooth_field(grid_r2, rng)
        assert energy(-u, 3.7).total == energy(u, 3.7).total

    def test_total_is_sum_of_parts(self, grid_r2, rng):
        rep = energy(smooth_field(grid_r2, rng), 4.2)
        parts = rep.kinetic + rep.mass + rep.coulomb + rep.power
        assert rep.total == pytest.approx(parts, rel=1e-12)

    def test_exponent_range_enforced(self, grid_unit):
        u = RadialField(grid_unit, np.zeros(grid_unit.n))
        for q in (2.5, 5.0, 6.0):
            with pytest.raises(ValueError):
                energy(u, q)

    def test_oracle_sanity(self):
        # the frozen closed forms agree with the independent quadrature
        for frozen, oracle in zip(
                (DOME_KINETIC, DOME_MASS, DOME_COULOMB, DOME_POWER),
                quadrature_oracle()):
            assert frozen == pytest.approx(oracle, rel=1e-8)

    def test_dome_against_oracle(self):
        g = build_uniform(1.0, 8193)
        rep = energy(RadialField(g, 1.0 - g.r**2), 3.0)
        assert rep.kinetic == pytest.approx(DOME_KINETIC, rel=1e-6)
        assert rep.mass == pytest.approx(DOME_MASS, rel=1e-6)
        assert rep.coulomb == pytest.approx(DOME_COULOMB, rel=1e-6)
        assert rep.power == pytest.approx(DOME_POWER, rel=1e-6)
        assert rep.total == pytest.approx(DOME_TOTAL, rel=1e-6)

    def test_small_amplitude_positive(self, grid_r2, rng):
        # E(c u) = c^2/2 |u|^2 + O(c^4) > 0 for small c
        for _ in range(5):
            u = smooth_field(grid_r2, rng)
            small = RadialField(grid_r2, 1e-3 * u.values)
            assert energy(small, 3.5).total > 0.0

    def test_coulomb_part_nonnegative(self, grid_r2, rng):
        assert energy(smooth_field(grid_r2, rng), 3.0).coulomb >= 0.0


class TestGradient:
    def test_zero_field(self, grid_unit):
        g = gradient(RadialField(grid_unit, np.zeros(grid_unit.n)), 3.5)
        assert np.abs(g.values).max() == 0.0

    def test_odd(self, grid_r2, rng):
        u = smooth_field(grid_r2, rng)
        assert np.array_equal(gradient(-u, 3.5).values, -gradient(u, 3.5).values)

    def test_boundary_row_zero(self, grid_r2, rng):
        assert gradient(smooth_field(grid_r2, rng), 3.5).values[-1] == 0.0

    @pytest.mark.parametrize("q", [3.0, 3.5, 4.9])
    def test_directional_derivative(self, q, rng):
        g = build_uniform(3.0, 257)
        eps = 1e-5
        for _ in range(5):
            u = smooth_field(g, rng)
            v = smooth_field(g, rng)
            e_plus = energy(RadialField(g, u.values + eps * v.values), q).total
            e_minus = energy(RadialField(g, u.values - eps * v.values), q).total
            fd = (e_plus - e_minus) / (2.0 * eps)
            ip = float(np.dot(g.weights, gradient(u, q).values * v.values))
            assert fd == pytest.approx(ip, rel=1e-6)


class TestNehari:
    def test_zero_field(self, grid_unit):
        assert nehari_value(RadialField(grid_unit, np.zeros(grid_unit.n)), 3.0) == 0.0

    def test_equals_gradient_pairing(self, grid_r2, rng):
        # exact identity of the compatible discretization
        u = smooth_field(grid_r2, rng)
        q = 3.5
        ip = float(np.dot(grid_r2.weights, gradient(u, q).values * u.values))
        scale = max(abs(ip), 1.0)
        assert abs(nehari_value(u, q) - ip) <= 1e-11 * scale

    def test_reduces_to_coulomb_term_after_rescaling(self):
        # on a Nehari-rescaled bump the local terms cancel, leaving the
        # Coulomb integral up to the O(h^2) gap between the norm families
        from spsflow.basis import build_basis
        from spsflow.grid import build_uniform, h1_norm_sq
        from spsflow.poisson import self_interaction

        g = build_uniform(5.0, 801)
        basis = build_basis(2, 3.5, g)
        for w in basis.bumps:
            gap = abs(nehari_value(w, basis.q) - self_interaction(w))
            assert gap <= 1e-2 * h1_norm_sq(w)


class TestBoundIdentity:
    @pytest.mark.parametrize("q", [3.0, 3.5, 4.0, 4.9])
    def test_vanishes_on_random_fields(self, q, rng):
        g = build_uniform(2.0, 129)
        for _ in range(20):
            u = smooth_field(g, rng, amplitude=rng.uniform(0.1, 5.0))
            rep = energy(u, q)
            scale = max(1.0, abs(rep.total), 2.0 * (rep.kinetic + rep.mass))
            assert abs(bound_identity(u, q)) <= 1e-12 * scale

    @settings(max_examples=20, deadline=None)
    @given(q=st.floats(3.0, 4.99), seed=st.integers(0, 9999))
    def test_vanishes_property(self, q, seed):
        g = build_uniform(1.5, 64)
        u = smooth_field(g, np.random.default_rng(seed))
        rep = energy(u, q)
        scale = max(1.0, abs(rep.total), 2.0 * (rep.kinetic + rep.mass))
        assert abs(bound_identity(u, q)) <= 1e-12 * scale
