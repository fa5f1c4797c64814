"""The flat hyperKaehler triple on T^4 and the formulas it specialises.

    omega_1 = dx12 + dx34,  omega_2 = dx13 + dx42,  omega_3 = dx14 + dx23

with complex structures ``g = omega_i(., J_i .)``; these satisfy
``J_1 J_2 = J_3``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields4 import (
    DIM,
    Form,
    Grid4,
    VectorField,
    covariant_derivative,
    exterior_d,
    interior,
    wedge,
)
from .metric import TangentVector, _same_state
from .rho_geometry import SymplecticState, _mv, two_form_matrix

OMEGA_COMPONENTS = (
    (1, 0, 0, 0, 0, 1),
    (0, 1, 0, 0, -1, 0),
    (0, 0, 1, 1, 0, 0),
)


def omegas(n):
    g = Grid4.of(n)
    return tuple(g.constant_form(2, c) for c in OMEGA_COMPONENTS)


def _constant_matrix(w: Form):
    return two_form_matrix(w).reshape(-1, DIM, DIM)[0]


W_MATS = tuple(_constant_matrix(w) for w in omegas(4))
J_MATS = tuple(-W for W in W_MATS)


@dataclass
class HKReport:
    K: tuple
    X_K: tuple
    H_hat: tuple
    K_hat: tuple


def apply_J(J, X: VectorField) -> VectorField:
    return VectorField(np.einsum("ij,jabcd->iabcd", J, X.c))


def k_functions(state: SymplecticState):
    """``K_i = omega_i ^ rho / dvol_rho``."""
    return tuple(wedge(w, state.rho).c[0] / state.u for w in omegas(state.n))


def hamiltonian_vector_field(state: SymplecticState, K) -> VectorField:
    """X_K with ``iota(X_K) rho = dK``."""
    K = K if isinstance(K, Form) else Form(0, K)
    return state.contract(exterior_d(K))


def x_grad_energy_hk(state: SymplecticState) -> VectorField:
    """``X_gradE = -sum_i J_i X_{K_i}``."""
    out = None
    for J, K in zip(J_MATS, k_functions(state)):
        term = apply_J(J, hamiltonian_vector_field(state, K))
        out = term if out is None else out + term
    return -out


def grad_energy_hk(state: SymplecticState) -> Form:
    """``d sum_i dK_i o J_i^rho`` with ``rho(J_i^rho ., .) = rho(., J_i .)``."""
    acc = np.zeros((DIM,) + state.grid.shape)
    for J, K in zip(J_MATS, k_functions(state)):
        dK = exterior_d(Form(0, K))
        Jr = state.J_rho(J)
        # (dK o Jr)_b = sum_a dK_a Jr[a, b]
        acc += np.einsum("wxyzab,awxyz->bwxyz", Jr, dK.c)
    return exterior_d(Form(1, acc))


def h_hat(state: SymplecticState, X: VectorField):
    """``Hhat_i = (d iota(X) omega_i) ^ rho / dvol_rho``."""
    return tuple(
        wedge(exterior_d(interior(X, w)), state.rho).c[0] / state.u for w in omegas(state.n)
    )


def k_hat(state: SymplecticState, rhohat: Form):
    """``Khat_i = omega_i^rho ^ rhohat / dvol_rho`` with ``omega_i^rho = omega_i - K_i rho``."""
    out = []
    for w, K in zip(omegas(state.n), k_functions(state)):
        w_rho = w - state.rho * K
        out.append(wedge(w_rho, rhohat).c[0] / state.u)
    return tuple(out)


def theta_hat_pairing_hk(state: SymplecticState, rhohat: Form) -> float:
    """``integral sum_i (Khat_i^2 dvol_rho - 1/2 K_i^2 rhohat ^ rhohat)``."""
    rr = wedge(rhohat, rhohat).c[0]
    dens = sum(kh ** 2 * state.u - 0.5 * K ** 2 * rr
               for kh, K in zip(k_hat(state, rhohat), k_functions(state)))
    return float(np.mean(dens))


def hessian_form_hk(state: SymplecticState, a: TangentVector) -> float:
    """``integral sum_i (Hhat_i^2 + omega_i(X, nabla_{X_{K_i}} X)) dvol_rho``."""
    _same_state(state, a)
    X = a.X
    dens = np.zeros(state.grid.shape)
    for W, K, H in zip(W_MATS, k_functions(state), h_hat(state, X)):
        XK = hamiltonian_vector_field(state, K)
        V = covariant_derivative(XK, X)
        dens += H ** 2 + np.einsum("iabcd,ij,jabcd->abcd", X.c, W, V.c)
    return float(np.mean(dens * state.u))


def hk_report(state: SymplecticState, a: TangentVector | None = None) -> HKReport:
    Ks = k_functions(state)
    XK = tuple(hamiltonian_vector_field(state, K) for K in Ks)
    if a is None:
        return HKReport(Ks, XK, (), ())
    return HKReport(Ks, XK, h_hat(state, a.X), k_hat(state, a.rhohat))


__all__ = [
    "HKReport",
    "J_MATS",
    "W_MATS",
    "apply_J",
    "grad_energy_hk",
    "h_hat",
    "hamiltonian_vector_field",
    "hessian_form_hk",
    "hk_report",
    "k_functions",
    "k_hat",
    "omegas",
    "theta_hat_pairing_hk",
    "x_grad_energy_hk",
]
