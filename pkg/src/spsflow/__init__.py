"""Sign-changing radial equilibria of the Schrodinger-Poisson-Slater
equation on balls, computed by parabolic threshold dynamics.

The stationary problem on the ball of radius R in three dimensions is

    -lap u + u + phi_u u = |u|^{q-1} u,   u = 0 on the boundary,
    phi_u(x) = int u(y)^2 / |x - y| dy,   q in [3, 5).

The library discretizes the radial problem (``grid``, ``poisson``,
``energy``), integrates the associated gradient flow (``flow``), selects
initial data on the boundary of the basin of attraction of zero inside a
span of disjoint bumps (``basis``, ``search``), and refines the harvested
states to certified equilibria with a prescribed number of sign changes.
``sweep`` repeats the search over growing radii and checks the
radius-uniform bounds.  The ``spsflow`` command line wraps it all.
"""

from .grid import (RadialField, RadialGrid, build_uniform, h1_norm_sq,
                   h1_inner, laplacian, lp_norm)
from .poisson import Potential, poisson_residual, potential, self_interaction
from .energy import (EnergyReport, bound_identity, energy, gradient,
                     nehari_value)
from .nodal import NodalProfile, extrema_amplitudes, sign_changes
from .basis import (BumpBasis, build_basis, combine, energy_upper_bound,
                    rescale_to_nehari)
from .flow import FlowConfig, FlowTrajectory, Verdict, integrate, step
from .search import (EquilibriumCandidate, NewtonDiverged, NoStagnationFound,
                     SeedBracketFailed, ThresholdBracket, bisect_threshold,
                     classify, extract_candidate, find_nodal, jacobian_apply,
                     refine_newton)
from .sweep import SweepReport, profile_convergence, run_sweep, strauss_envelope

__version__ = "0.1.0"

__all__ = [
    "RadialGrid", "RadialField", "build_uniform", "laplacian", "h1_norm_sq",
    "h1_inner", "lp_norm",
    "Potential", "potential", "poisson_residual", "self_interaction",
    "EnergyReport", "energy", "gradient", "nehari_value", "bound_identity",
    "NodalProfile", "sign_changes", "extrema_amplitudes",
    "BumpBasis", "build_basis", "rescale_to_nehari", "combine",
    "energy_upper_bound",
    "FlowConfig", "FlowTrajectory", "Verdict", "step", "integrate",
    "ThresholdBracket", "EquilibriumCandidate", "classify", "bisect_threshold",
    "extract_candidate", "refine_newton", "jacobian_apply", "find_nodal",
    "SeedBracketFailed", "NoStagnationFound", "NewtonDiverged",
    "SweepReport", "run_sweep", "profile_convergence", "strauss_envelope",
]
