"""Geodesics of the Donaldson metric and the negative gradient flow of E."""
from __future__ import annotations

import logging
from dataclasses import dataclass

from .energy import energy, grad_energy, grad_norm
from .fields4 import Form, covariant_derivative, exterior_d, interior
from .metric import SolverError, SolverOptions, associated_vector_field, norm
from .rho_geometry import U_FLOOR, DegenerateStateError, SymplecticState

log = logging.getLogger(__name__)


class LeftSpaceError(DegenerateStateError):
    """The trajectory left the space of symplectic forms (min u hit the floor).

    ``records`` holds the output produced so far and ``last_state`` the last
    valid state.
    """

    def __init__(self, msg, records, last_state):
        super().__init__(msg)
        self.records = records
        self.last_state = last_state


class StepSizeCollapse(RuntimeError):
    def __init__(self, msg, records, last_state):
        super().__init__(msg)
        self.records = records
        self.last_state = last_state


@dataclass
class GeodesicState:
    rho: Form
    rhodot: Form
    t: float = 0.0


@dataclass
class FlowRecord:
    step: int
    t: float
    energy: float
    grad_norm: float
    min_u: float
    speed: float | None
    solver_iters: int
    max_residual: float

    CSV_HEADER = "step,t,energy,grad_norm,min_u,speed,solver_iters,max_residual"

    def csv_row(self):
        speed = "" if self.speed is None else repr(self.speed)
        return ",".join([
            str(self.step), repr(self.t), repr(self.energy), repr(self.grad_norm),
            repr(self.min_u), speed, str(self.solver_iters), repr(self.max_residual),
        ])


def _state(rho, u_floor):
    return SymplecticState(rho, u_floor=u_floor)


def geodesic_acceleration(state: SymplecticState, tangent):
    """``d iota(X) d iota(X) rho + d iota(nabla_X X) rho`` for the field X of rhodot."""
    X = tangent.X
    first = exterior_d(interior(X, exterior_d(interior(X, state.rho))))
    second = exterior_d(interior(covariant_derivative(X, X), state.rho))
    return first + second


def geodesic_rhs(gs: GeodesicState, opts=None, x0=None, u_floor=U_FLOOR):
    """Second time derivative of rho along the geodesic through ``gs``.

    Returns ``(acceleration, tangent)`` where ``tangent`` carries the
    associated field of ``gs.rhodot``.
    """
    state = _state(gs.rho, u_floor)
    tangent = associated_vector_field(state, gs.rhodot, opts, x0=x0)
    return geodesic_acceleration(state, tangent), tangent


def _residual(tangent, state):
    r = tangent.report
    return max(r.closed_residual, r.harmonic_residual, state.class_residual())


def integrate_geodesic(initial: GeodesicState, dt, steps, opts=None, u_floor=U_FLOOR):
    """Classical RK4 on ``(rho, rhodot)``.

    ``dt`` may be negative (backward integration).  Returns
    ``(records, final_state)``; one record per step including step 0.
    """
    if dt == 0:
        raise ValueError("dt must be nonzero")
    opts = opts or SolverOptions()
    records = []
    rho, vel, t = initial.rho, initial.rhodot, initial.t
    warm = None
    for step in range(steps + 1):
        try:
            state = _state(rho, u_floor)
            tan = associated_vector_field(state, vel, opts, x0=warm)
        except DegenerateStateError as exc:
            raise LeftSpaceError(f"left S_a at t={t:.6g}: {exc}", records,
                                 GeodesicState(rho, vel, t)) from exc
        except SolverError as exc:
            exc.records = records
            raise
        k1 = geodesic_acceleration(state, tan)
        iters = tan.report.iterations
        resid = _residual(tan, state)
        records.append(FlowRecord(step, t, energy(state), grad_norm(state), state.min_u,
                                  norm(state, tan), iters, resid))
        if step == steps:
            break
        warm = tan
        try:
            r2, v2 = rho + vel * (dt / 2), vel + k1 * (dt / 2)
            k2, tan2 = geodesic_rhs(GeodesicState(r2, v2), opts, warm, u_floor)
            r3, v3 = rho + v2 * (dt / 2), vel + k2 * (dt / 2)
            k3, tan3 = geodesic_rhs(GeodesicState(r3, v3), opts, tan2, u_floor)
            r4, v4 = rho + v3 * dt, vel + k3 * dt
            k4, tan4 = geodesic_rhs(GeodesicState(r4, v4), opts, tan3, u_floor)
        except DegenerateStateError as exc:
            raise LeftSpaceError(f"left S_a during step {step + 1}: {exc}", records,
                                 GeodesicState(rho, vel, t)) from exc
        except SolverError as exc:
            exc.records = records
            raise
        records[-1].solver_iters += sum(x.report.iterations for x in (tan2, tan3, tan4))
        rho = rho + (vel + v2 * 2 + v3 * 2 + v4) * (dt / 6)
        vel = vel + (k1 + k2 * 2 + k3 * 2 + k4) * (dt / 6)
        t += dt
    return records, GeodesicState(rho, vel, t)


def _flow_velocity(rho, u_floor, dealias):
    state = _state(rho, u_floor)
    v = -grad_energy(state).rhohat
    if dealias:
        v = Form(2, state.grid.dealias(v.c))
    return v


def _rk4_gradient_step(rho, dt, u_floor, dealias):
    k1 = _flow_velocity(rho, u_floor, dealias)
    k2 = _flow_velocity(rho + k1 * (dt / 2), u_floor, dealias)
    k3 = _flow_velocity(rho + k2 * (dt / 2), u_floor, dealias)
    k4 = _flow_velocity(rho + k3 * dt, u_floor, dealias)
    return rho + (k1 + k2 * 2 + k3 * 2 + k4) * (dt / 6)


def _flow_record(step, t, state):
    resid = max(state.class_residual(), exterior_d(state.rho).max_abs())
    return FlowRecord(step, t, energy(state), grad_norm(state), state.min_u, None, 0, resid)


def gradient_flow(initial: SymplecticState, dt, steps, opts=None, dealias=True,
                  max_retries=30, u_floor=U_FLOOR):
    """Integrate ``d rho/dt = -grad E(rho) = d *rho d Theta`` with RK4.

    A step that would raise the energy (or leave the space) is rejected and
    retried with half the step size; the reduced step is kept afterwards.
    ``opts`` is accepted for interface symmetry; the gradient needs no solve.

    Returns ``(records, final_state)``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    state = initial
    t = 0.0
    E = energy(state)
    records = [_flow_record(0, t, state)]
    step = 0
    retries = 0
    while step < steps:
        try:
            rho_new = _rk4_gradient_step(state.rho, dt, u_floor, dealias)
            new = _state(rho_new, u_floor)
            E_new = energy(new)
            ok, degenerate = E_new <= E, False
        except DegenerateStateError:
            ok, degenerate = False, True
        if not ok:
            retries += 1
            if retries > max_retries:
                if degenerate:
                    raise LeftSpaceError(f"left S_a at t={t:.6g}", records, state)
                raise StepSizeCollapse(
                    f"step-size collapse at t={t:.6g} after {max_retries} rejections",
                    records, state)
            dt *= 0.5
            log.info("gradient flow: rejected step %d, dt -> %.3e", step + 1, dt)
            continue
        retries = 0
        step += 1
        t += dt
        state, E = new, E_new
        records.append(_flow_record(step, t, state))
    return records, state
