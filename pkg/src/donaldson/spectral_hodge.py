"""Hodge theory for the flat metric on the grid torus, done in Fourier space.

Harmonic forms on the flat torus are the constant forms.  On an even grid the
spectral derivative also annihilates modes whose wavevector components are all
0 or N/2; these behave exactly like harmonic modes (closed, coclosed, not
exact) and are grouped with the constants.  Band-limited fields have no such
content, so for them ``harmonic_part`` is the componentwise mean.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .fields4 import DIM, Form, exterior_d, interior, coordinate_field

DEFAULT_EXACT_TOL = 1e-10


class NotExactError(ValueError):
    pass


class Exactness(NamedTuple):
    ok: bool
    closed_residual: float
    harmonic_residual: float

    def __bool__(self):
        return self.ok


class HodgeDecomposition(NamedTuple):
    exact_part: Form
    coexact_part: Form
    harmonic_part: Form
    potential: Form


def harmonic_part(a: Form) -> Form:
    return Form(a.degree, a.grid.null_part(a.c))


def codifferential(a: Form) -> Form:
    """Flat codifferential ``delta a = -sum_i iota(e_i) d_i a``."""
    if a.degree == 0:
        raise ValueError("codifferential of a 0-form is not defined")
    grid = a.grid
    out = None
    for i in range(DIM):
        term = interior(coordinate_field(a.n, i), Form(a.degree, grid.deriv(a.c, i)))
        out = term if out is None else out + term
    return -out


def hodge_laplacian_inverse(a: Form) -> Form:
    """Inverse of ``d delta + delta d`` on the non-harmonic part."""
    return Form(a.degree, -a.grid.inverse_laplacian(a.c))


def solve_laplace(f: Form, tol=1e-12) -> Form:
    """Mean-zero ``p`` with ``sum_i d_i d_i p = f``."""
    if f.degree != 0:
        raise ValueError("solve_laplace takes a 0-form")
    obstruction = np.max(np.abs(f.grid.null_part(f.c)))
    if obstruction > tol * max(1.0, f.max_abs()):
        raise ValueError(f"not in range of Laplacian (harmonic content {obstruction:.3e})")
    return Form(0, f.grid.inverse_laplacian(f.c))


def is_exact(a: Form, tol=DEFAULT_EXACT_TOL) -> Exactness:
    """Closed with vanishing harmonic part, both in the max norm."""
    if a.degree == 0:
        raise ValueError("0-forms are never exact")
    closed = exterior_d(a).max_abs() if a.degree < DIM else 0.0
    harm = harmonic_part(a).max_abs()
    return Exactness(closed <= tol and harm <= tol, closed, harm)


def primitive_of_exact(rh: Form, tol=DEFAULT_EXACT_TOL) -> Form:
    """Coexact, harmonic-free ``lam`` with ``d lam = rh``.

    Raises :class:`NotExactError` if ``rh`` is not closed or has a harmonic
    component.
    """
    if rh.degree == 0:
        raise ValueError("0-forms have no primitive")
    if not np.isfinite(tol):
        return codifferential(hodge_laplacian_inverse(rh))
    chk = is_exact(rh, tol)
    if chk.closed_residual > tol:
        raise NotExactError(f"form is not closed: |d rh| = {chk.closed_residual:.3e}")
    if chk.harmonic_residual > tol:
        raise NotExactError(f"form has a harmonic part of size {chk.harmonic_residual:.3e}")
    return codifferential(hodge_laplacian_inverse(rh))


def hodge_decompose(a: Form) -> HodgeDecomposition:
    harm = harmonic_part(a)
    pot = hodge_laplacian_inverse(a)
    if a.degree == 0:
        exact = a.grid.zeros(0)
    else:
        exact = exterior_d(codifferential(pot))
    if a.degree == DIM:
        coexact = a.grid.zeros(DIM)
    else:
        coexact = codifferential(exterior_d(pot))
    return HodgeDecomposition(exact, coexact, harm, pot)
