"""Donaldson's energy functional, its gradient and covariant Hessian.

    E(rho) = integral 2|rho+|^2 / (|rho+|^2 - |rho-|^2) dvol
           = integral |rho+|^2 / u dvol,

using ``|rho+|^2 - |rho-|^2 = 2u``.  Norms and stars without a rho are those
of the flat background metric.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields4 import (
    Form,
    VectorField,
    covariant_derivative,
    exterior_d,
    integrate,
    interior,
    pointwise_norm2,
    sd_split,
    star,
    wedge,
)
from .metric import (
    SolveReport,
    TangentVector,
    _same_state,
    gauge_residuals,
    inner_with_form,
)
from .rho_geometry import SymplecticState


@dataclass
class EnergyReport:
    value: float
    theta: Form
    grad: Form
    x_grad: VectorField
    grad_norm: float


@dataclass
class HessianReport:
    operator_value: Form
    form_value: float
    theta_hat: Form
    operator_paired: float  # <H rhohat, rhohat>_rho, for comparison with form_value


def energy_density(state: SymplecticState):
    plus, _ = sd_split(state.rho)
    return pointwise_norm2(plus) / state.u


def energy(state: SymplecticState) -> float:
    return float(np.mean(energy_density(state)))


def theta(state: SymplecticState) -> Form:
    """``*(rho/u) - 1/2 |rho/u|^2 rho``; its integral against rhohat is dE(rhohat)."""
    rho, u = state.rho, state.u
    return star(rho) / u - rho * (0.5 * pointwise_norm2(rho) / u ** 2)


def x_grad_energy(state: SymplecticState, th=None) -> VectorField:
    """Associated field of grad E: ``iota(X) rho = *rho d Theta``."""
    th = theta(state) if th is None else th
    return state.contract(state.star3(exterior_d(th)))


def x_grad_residuals(state: SymplecticState, X: VectorField, th=None):
    """Residuals of the two equivalent characterisations of X_gradE."""
    th = theta(state) if th is None else th
    dth = exterior_d(th)
    first = (state.star3(dth) - interior(X, state.rho)).max_abs()
    second = (dth - wedge(state.rho, X.flat())).max_abs()
    return first, second


def grad_energy(state: SymplecticState, opts=None) -> TangentVector:
    """``grad E = -d *rho d Theta`` with its associated field (no solve needed)."""
    X = x_grad_energy(state)
    lam = -interior(X, state.rho)
    report = SolveReport()
    report.closed_residual, report.harmonic_residual = gauge_residuals(state, lam)
    return TangentVector(state, exterior_d(lam), lam, X, report)


def grad_norm(state: SymplecticState, grad=None) -> float:
    grad = grad_energy(state) if grad is None else grad
    return float(np.sqrt(max(np.mean(state.metric_inner_1form(grad.lam, grad.lam)), 0.0)))


def energy_report(state: SymplecticState) -> EnergyReport:
    th = theta(state)
    g = grad_energy(state)
    return EnergyReport(energy(state), th, g.rhohat, g.X, grad_norm(state, g))


def theta_hat(state: SymplecticState, rhohat: Form) -> Form:
    """Derivative of Theta along rhohat:
    ``(rhohat + *rho rhohat)/u - |rho+/u|^2 rhohat``."""
    u = state.u
    plus, _ = sd_split(state.rho)
    return (rhohat + state.star2(rhohat)) / u - rhohat * (pointwise_norm2(plus) / u ** 2)


def _xg(state, xg):
    return x_grad_energy(state) if xg is None else xg


def hessian_operator(state: SymplecticState, a: TangentVector, xg=None) -> Form:
    """Covariant Hessian ``nabla_rhohat grad E``:

        -d *rho d Thetahat + d *rho (rhohat ^ iota(X_gradE) g)
        - d iota(nabla_X X_gradE) rho
    """
    _same_state(state, a)
    xg = _xg(state, xg)
    th = theta_hat(state, a.rhohat)
    t1 = -exterior_d(state.star3(exterior_d(th)))
    t2 = exterior_d(state.star3(wedge(a.rhohat, xg.flat())))
    t3 = -exterior_d(interior(covariant_derivative(a.X, xg), state.rho))
    return t1 + t2 + t3


def hessian_form(state: SymplecticState, a: TangentVector, xg=None) -> float:
    """Hessian quadratic form evaluated without forming the operator."""
    _same_state(state, a)
    xg = _xg(state, xg)
    rh, X, rho = a.rhohat, a.X, state.rho
    first = integrate(wedge(theta_hat(state, rh), rh))
    left = interior(X, rh) - interior(covariant_derivative(X, X), rho)
    second = integrate(wedge(left, state.star1(interior(xg, rho))))
    return first + second


def hessian_report(state: SymplecticState, a: TangentVector) -> HessianReport:
    xg = x_grad_energy(state)
    op = hessian_operator(state, a, xg)
    return HessianReport(op, hessian_form(state, a, xg), theta_hat(state, a.rhohat),
                         inner_with_form(state, a, op))


def leading_term_decomposition(state: SymplecticState, rhohat: Form):
    """Split ``-d *rho d Thetahat`` into its three displayed pieces.

    Returns ``(second_order, du_term, dphi_term, total)`` where
    ``second_order = -2 d (*rho d rhohat^{+rho}) / u``.
    """
    u = state.u
    u0 = Form(0, u)
    plus, _ = sd_split(state.rho)
    phi = Form(0, pointwise_norm2(plus) / u ** 2)
    sd_part = 0.5 * (rhohat + state.star2(rhohat))
    second_order = -2.0 * exterior_d(state.star3(exterior_d(sd_part)) / u)
    du = exterior_d(u0) / u ** 2
    du_term = exterior_d(state.star3(wedge(du, rhohat + state.star2(rhohat))))
    dphi_term = exterior_d(state.star3(wedge(exterior_d(phi), rhohat)))
    total = -exterior_d(state.star3(exterior_d(theta_hat(state, rhohat))))
    return second_order, du_term, dphi_term, total
