"""
The metric on exact 2-forms
===========================

A tangent vector at a symplectic form rho is an exact 2-form.  Solving for
its associated vector field is the one elliptic problem in the package.
"""
import numpy as np

from donaldson.fields4 import exterior_d, interior, omega_std
from donaldson.metric import SolverOptions, associated_vector_field, christoffel, inner
from donaldson.rho_geometry import SymplecticState
from donaldson.sampling import random_exact, random_state

n = 8
rng = np.random.default_rng(1)

# a point of the space: omega_std plus a small exact perturbation
state = random_state(n, rng, size=0.2)
print(state, "class residual", state.class_residual())

# its metric g_rho has the background volume form
print("det g_rho ranges over", np.ptp(np.linalg.det(state.g)), "around 1")

# a tangent vector and its associated field
rhohat = random_exact(n, rng)
opts = SolverOptions(rel_tol=1e-12)
a = associated_vector_field(state, rhohat, opts)
print("CG iterations:", a.report.iterations)
print("residual history (first five):", np.array(a.report.residual_history[:5]))
print("|-d iota(X) rho - rhohat| =", (-exterior_d(interior(a.X, state.rho)) - rhohat).max_abs())

# switching off the preconditioner shows what it buys
plain = associated_vector_field(state, rhohat, SolverOptions(rel_tol=1e-12, preconditioner="none"))
print("without preconditioner:", plain.report.iterations, "iterations")

# inner products are symmetric and positive
b = associated_vector_field(state, random_exact(n, rng), opts)
print("<a,b> =", inner(state, a, b), " <b,a> =", inner(state, b, a))
print("<a,a> =", inner(state, a, a))

# the Christoffel term is symmetric in its arguments
gam = christoffel(state, a, b) - christoffel(state, b, a)
print("Christoffel asymmetry:", gam.max_abs())

# at omega_std the metric is simple: for lam = sin(2 pi x1) dx2 the norm is 1/2
flat = SymplecticState(omega_std(n))
rh = flat.grid.zeros(2)
rh.c[0] = 2 * np.pi * np.cos(2 * np.pi * flat.grid.coords()[0])
t = associated_vector_field(flat, rh)
print("norm^2 at omega_std:", inner(flat, t, t))
