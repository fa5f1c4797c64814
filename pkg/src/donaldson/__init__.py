"""Symplectic forms on the flat 4-torus: Donaldson's metric, energy and flows.

Submodules
----------
fields4         grid, forms, vector fields, spectral exterior calculus
spectral_hodge  flat Hodge theory: Laplacian inverse, primitives, projections
rho_geometry    pointwise geometry of a nondegenerate 2-form
metric          associated vector fields, the metric and its connection
energy          energy functional, gradient and Hessian
hyperkahler     the flat hyperKaehler triple and its formulas
dynamics        geodesics and the negative gradient flow
io              binary field dumps
checks          invariant suite used by the command line
"""
from .dynamics import (
    FlowRecord,
    GeodesicState,
    LeftSpaceError,
    StepSizeCollapse,
    gradient_flow,
    integrate_geodesic,
)
from .energy import grad_energy, hessian_form, hessian_operator, theta, x_grad_energy
from .fields4 import Form, Grid4, VectorField, exterior_d, interior, omega_std, star, wedge
from .metric import (
    SolverError,
    SolverOptions,
    TangentVector,
    associated_vector_field,
    christoffel,
    inner,
)
from .rho_geometry import DegenerateStateError, SymplecticState
from .spectral_hodge import NotExactError

__version__ = "0.1.0"

__all__ = [
    "DegenerateStateError",
    "FlowRecord",
    "Form",
    "GeodesicState",
    "Grid4",
    "LeftSpaceError",
    "NotExactError",
    "SolverError",
    "SolverOptions",
    "StepSizeCollapse",
    "SymplecticState",
    "TangentVector",
    "VectorField",
    "associated_vector_field",
    "christoffel",
    "exterior_d",
    "grad_energy",
    "gradient_flow",
    "hessian_form",
    "hessian_operator",
    "inner",
    "integrate_geodesic",
    "interior",
    "omega_std",
    "star",
    "theta",
    "wedge",
    "x_grad_energy",
]
