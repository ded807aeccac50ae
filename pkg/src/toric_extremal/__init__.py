"""Extremal Kähler metrics on toric fibrations: exact polytope integrals, the
extremal affine function, the weighted Abreu operator, stability probes and
the explicit CP^2-bundle ansatz."""

from .abreu import (
    HMatrix,
    SymplecticPotential,
    abreu_scalar,
    boundary_check,
    face_positivity,
    guillemin_hmatrix,
    integrability_check,
    p_lambda,
)
from .calabi import BaseFactor, BundleSummand, FibrationData, csc_slope_obstruction, make_fibration, shift_class
from .cp2bundle import CP2BundleParams, AnsatzCoeffs, analyze, crease_F, distinguished_solution
from .extremal import solve_extremal_affine
from .poly import MultiPoly, RatFunc
from .polytope import (
    DelzantPolytope,
    PLConvexFunction,
    build_polytope,
    crease,
    interval,
    moment,
    boundary_moment,
    standard_simplex,
)
from .quadrature import quadrature, boundary_quadrature
from .report import VERSION as __version__
from .stability import futaki_F, futaki_via_H, k_energy, nonexistence_scan
