"""Pointwise geometry of a nondegenerate 2-form rho.

Given rho with ``rho ^ rho > 0`` there is a unique metric ``g_rho`` with the
background volume form whose Hodge star on 1-forms is
``lam -> rho ^ *(rho ^ lam) / u`` and on 2-forms is ``R * R`` with the
reflection ``R w = w - (w ^ rho / dvol_rho) rho``.  Here ``2 u dvol = rho ^ rho``
and ``dvol_rho = u dvol``.

Pointwise linear maps are held as explicit matrix fields of shape
``(N, N, N, N, m, m)``.
"""
from __future__ import annotations

import numpy as np

from .fields4 import (
    BASIS,
    DIM,
    Form,
    VectorField,
    exterior_d,
    interior,
    omega_std,
    star,
    volume_form,
    wedge,
)
from .spectral_hodge import harmonic_part

U_FLOOR = 1e-6
_PAIRS = BASIS[2]


class DegenerateStateError(ValueError):
    """Raised when ``rho ^ rho`` fails to be positive (or above the floor)."""


def _mv(m, v):
    """Pointwise matrix field (grid..., i, j) times component field (j, grid...)."""
    return np.einsum("abcdij,jabcd->iabcd", m, v)


def two_form_matrix(w: Form):
    """Antisymmetric matrix field ``W[..., i, j] = w(e_i, e_j)``."""
    grid_shape = w.c.shape[1:]
    W = np.zeros(grid_shape + (DIM, DIM))
    for a, (i, j) in enumerate(_PAIRS):
        W[..., i, j] = w.c[a]
        W[..., j, i] = -w.c[a]
    return W


def matrix_two_form(W):
    """Inverse of :func:`two_form_matrix` (antisymmetric part only)."""
    return Form(2, np.stack([0.5 * (W[..., i, j] - W[..., j, i]) for i, j in _PAIRS]))


def pfaffian(c):
    return c[0] * c[5] - c[1] * c[4] + c[2] * c[3]


def u_of(rho: Form) -> Form:
    """The function u with ``2 u dvol = rho ^ rho``."""
    if rho.degree != 2:
        raise ValueError("u is defined for 2-forms")
    u = pfaffian(rho.c)
    if np.min(u) <= 0.0:
        raise DegenerateStateError(
            f"degenerate or wrongly oriented 2-form: min u = {np.min(u):.3e}"
        )
    return Form(0, u)


# Constant structures of the standard Kaehler form omega_std = dx12 + dx34.
W_STD = two_form_matrix(omega_std(4)).reshape(-1, DIM, DIM)[0]
J_STD = -W_STD  # g = omega_std(., J .)

# pairing (1-form) ^ (3-form) -> coefficient of dvol
_ONE_THREE = np.zeros((DIM, DIM))
for _i in range(DIM):
    for _a in range(DIM):
        _e = np.zeros((DIM,) + (1,) * DIM)
        _e[_i] = 1.0
        _t = np.zeros((DIM,) + (1,) * DIM)
        _t[_a] = 1.0
        _ONE_THREE[_i, _a] = wedge(Form(1, _e), Form(3, _t)).c[0].item()


class SymplecticState:
    """A nondegenerate closed 2-form with its cached pointwise geometry.

    Attributes
    ----------
    rho : Form
    u : ndarray
        ``rho ^ rho / (2 dvol)``.
    P, P_inv : ndarray
        Matrix of rho as a bilinear form and its inverse.
    S1 : ndarray
        Matrix of ``*rho`` on 1-forms (3-form components by 1-form components).
    S3 : ndarray
        Matrix of ``*rho`` on 3-forms; the true Hodge star, ``S3 = -S1^{-1}``.
    M : ndarray
        ``lam ^ *rho mu = lam^T M mu dvol``; equals the inverse of ``g_rho``.
    g : ndarray
        The metric ``g_rho`` built from ``omega_rho(., J_rho .)``.
    """

    def __init__(self, rho: Form, u_floor=U_FLOOR, check_closed=True, closed_tol=1e-9):
        if rho.degree != 2:
            raise ValueError("a symplectic state needs a 2-form")
        if not np.all(np.isfinite(rho.c)):
            raise ValueError("non-finite entries in rho")
        self.rho = rho
        self.u_floor = u_floor
        u = pfaffian(rho.c)
        self.min_u = float(np.min(u))
        if self.min_u <= u_floor:
            raise DegenerateStateError(
                f"degenerate or wrongly oriented 2-form: min u = {self.min_u:.3e} "
                f"(floor {u_floor:.1e})"
            )
        if check_closed:
            res = exterior_d(rho).max_abs()
            if res > closed_tol * max(1.0, rho.max_abs()):
                raise ValueError(f"rho is not closed: |d rho| = {res:.3e}")
        self.u = u
        self.n = rho.n
        self.grid = rho.grid
        self.P = two_form_matrix(rho)
        # a 4x4 antisymmetric matrix is inverted by its dual over the Pfaffian
        c = rho.c
        dual = Form(2, np.stack([c[5], -c[4], c[3], c[2], -c[1], c[0]]))
        self.P_inv = -two_form_matrix(dual) / u[..., None, None]
        self.S1 = self._star1_matrix()
        self.M = _ONE_THREE @ self.S1
        self.g = self._metric()
        # S1 = Q^-1 g^-1 with Q the 1-3 pairing, so -S1^-1 = -g Q
        self.S3 = -(self.g @ _ONE_THREE)

    def _star1_matrix(self):
        n = self.n
        cols = []
        for j in range(DIM):
            e = np.zeros((DIM,) + (n,) * DIM)
            e[j] = 1.0
            lam = Form(1, e)
            cols.append((wedge(self.rho, star(wedge(self.rho, lam))) / self.u).c)
        return np.moveaxis(np.stack(cols, axis=0), (0, 1), (-1, -2))

    def _metric(self):
        # J_rho defined by rho(J_rho v, w) = rho(v, J w), i.e. J_rho = P^-1 J^T P
        J_rho = self.J_rho(J_STD)
        W_rho = two_form_matrix(self.R(omega_std(self.n)))
        g = W_rho @ J_rho
        return 0.5 * (g + np.swapaxes(g, -1, -2))

    # --- pointwise operators ---------------------------------------------

    @property
    def dvol_rho(self):
        return Form(4, self.u)

    def R(self, w: Form) -> Form:
        """Reflection ``w - (w ^ rho / dvol_rho) rho``."""
        coef = wedge(w, self.rho).c[0] / self.u
        return w - self.rho * coef

    def star2(self, w: Form) -> Form:
        return self.R(star(self.R(w)))

    def star1(self, lam: Form) -> Form:
        return Form(3, _mv(self.S1, lam.c))

    def star3(self, t: Form) -> Form:
        return Form(1, _mv(self.S3, t.c))

    def star_rho(self, a: Form) -> Form:
        """Hodge star of ``g_rho`` on 1-, 2- and 3-forms."""
        if a.degree == 1:
            return self.star1(a)
        if a.degree == 2:
            return self.star2(a)
        if a.degree == 3:
            return self.star3(a)
        # volume forms agree, so the 0/4 stars are the background ones
        return star(a)

    def contract(self, lam: Form) -> VectorField:
        """The vector field X with ``iota(X) rho = lam``."""
        return VectorField(-_mv(self.P_inv, lam.c))

    def g_inner(self, X: VectorField, Y: VectorField):
        """Background ``g(X, Y)`` as a grid array."""
        return np.sum(X.c * Y.c, axis=0)

    def metric_inner_1form(self, a: Form, b: Form):
        """Density of ``a ^ *rho b`` with respect to dvol."""
        return np.sum(a.c * _mv(self.M, b.c), axis=0)

    def J_rho(self, J=J_STD):
        """Matrix field of ``J_rho`` with ``rho(J_rho ., .) = rho(., J .)``."""
        return self.P_inv @ np.asarray(J).T @ self.P

    def omega_rho(self, omega=None) -> Form:
        return self.R(omega_std(self.n) if omega is None else omega)

    def class_residual(self) -> float:
        """Max deviation of the harmonic part of rho from omega_std."""
        return (harmonic_part(self.rho) - omega_std(self.n)).max_abs()

    def __repr__(self):
        return f"SymplecticState(n={self.n}, min_u={self.min_u:.4g})"


def R_rho(state: SymplecticState, w: Form) -> Form:
    return state.R(w)


def star_rho_1(state: SymplecticState, lam: Form) -> Form:
    return state.star1(lam)


def star_rho_2(state: SymplecticState, w: Form) -> Form:
    return state.star2(w)


def star_rho_3(state: SymplecticState, t: Form) -> Form:
    return state.star3(t)


def metric_g_rho(state: SymplecticState):
    g = state.g
    eig = np.linalg.eigvalsh(g)
    if np.min(eig) <= 0.0:
        raise ArithmeticError("g_rho is not positive definite: index convention mismatch")
    return g


def rho_contract(state: SymplecticState, lam: Form) -> VectorField:
    return state.contract(lam)


def hodge_star_from_metric(g, lam: Form) -> Form:
    """Hodge star on 1-forms of a unimodular metric field: ``iota(g^-1 lam) dvol``."""
    X = VectorField(_mv(np.linalg.inv(g), lam.c))
    return interior(X, volume_form(lam.n))
