"""The Donaldson metric on exact 2-forms and its Levi-Civita connection.

A tangent vector at rho is an exact 2-form ``rhohat``.  Its gauge-fixed
primitive is the 1-form ``lam`` with ``d lam = rhohat`` and ``*rho lam`` exact;
the associated vector field X solves ``iota(X) rho = -lam``.  The metric is

    <rhohat_1, rhohat_2>_rho = integral lam_1 ^ *rho lam_2.

Gauge fixing writes ``lam = lam0 + d f + h`` with ``lam0`` the flat coexact
primitive, f a function and h harmonic.  ``*rho lam`` exact is the
stationarity condition of ``integral lam ^ *rho lam`` over that affine space,
so (f, h) solves a symmetric positive definite system, handled by conjugate
gradients preconditioned with the flat inverse Laplacian.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .fields4 import (
    DIM,
    Form,
    VectorField,
    covariant_derivative,
    exterior_d,
    interior,
)
from .rho_geometry import SymplecticState, _mv
from .spectral_hodge import DEFAULT_EXACT_TOL, NotExactError, is_exact, primitive_of_exact

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    def __init__(self, msg, history):
        super().__init__(msg)
        self.history = history


@dataclass
class SolverOptions:
    rel_tol: float = 1e-10
    max_iter: int = 2000
    preconditioner: str = "background_laplacian"
    exact_tol: float = DEFAULT_EXACT_TOL

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.preconditioner not in ("none", "background_laplacian"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class SolveReport:
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    closed_residual: float = 0.0
    harmonic_residual: float = 0.0


@dataclass
class TangentVector:
    """An exact 2-form with its gauge-fixed primitive and associated field."""

    state: SymplecticState
    rhohat: Form
    lam: Form
    X: VectorField
    report: SolveReport = field(default_factory=SolveReport)
    f: np.ndarray | None = None
    h: np.ndarray | None = None


def _gradient(grid, f):
    return np.stack([grid.deriv(f, i) for i in range(DIM)])


def _divergence(grid, v):
    out = grid.deriv(v[0], 0)
    for i in range(1, DIM):
        out += grid.deriv(v[i], i)
    return out


class _GaugeSystem:
    """Normal equations of ``min integral (lam0 + df + h) ^ *rho (lam0 + df + h)``."""

    def __init__(self, state: SymplecticState):
        self.state = state
        self.grid = state.grid
        self.npt = self.grid.npoints

    def pack(self, f, h):
        return np.concatenate([f.ravel(), h.ravel()])

    def unpack(self, z):
        shape = self.grid.shape
        return z[: self.npt].reshape(shape), z[self.npt:].reshape((DIM,) + shape)

    def adjoint(self, mu):
        g = self.grid
        rf = -_divergence(g, mu)
        rf -= g.null_part(rf)
        return self.pack(rf, g.null_part(mu))

    def lam(self, z):
        f, h = self.unpack(z)
        return _gradient(self.grid, f) + h

    def apply(self, z):
        return self.adjoint(_mv(self.state.M, self.lam(z)))

    def precondition(self, r):
        rf, rh = self.unpack(r)
        return self.pack(-self.grid.inverse_laplacian(rf), rh)


def _pcg(A, b, x0, M, rel_tol, max_iter):
    x = x0.copy()
    r = b - A(x)
    bnorm = np.linalg.norm(b)
    history = [float(np.linalg.norm(r) / bnorm)]
    if history[-1] <= rel_tol:
        return x, 0, history
    z = M(r)
    p = z.copy()
    rz = r @ z
    for it in range(1, max_iter + 1):
        Ap = A(p)
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        history.append(float(np.linalg.norm(r) / bnorm))
        if history[-1] <= rel_tol:
            return x, it, history
        z = M(r)
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(
        f"gauge solve did not converge in {max_iter} iterations "
        f"(relative residual {history[-1]:.3e})",
        history,
    )


def gauge_residuals(state: SymplecticState, lam: Form):
    """``(|d *rho lam|, |harmonic part of *rho lam|)`` in the max norm."""
    mu = _mv(state.M, lam.c)
    closed = float(np.max(np.abs(_divergence(state.grid, mu))))
    harm = float(np.max(np.abs(state.grid.null_part(mu))))
    return closed, harm


def associated_vector_field(state: SymplecticState, rhohat: Form, opts=None, x0=None):
    """Solve ``-d iota(X) rho = rhohat`` with ``*rho iota(X) rho`` exact.

    Parameters
    ----------
    state : SymplecticState
    rhohat : Form
        Exact 2-form.
    opts : SolverOptions, optional
    x0 : TangentVector, optional
        Previous solution whose gauge data warm-starts the iteration.

    Returns
    -------
    TangentVector
    """
    opts = opts or SolverOptions()
    chk = is_exact(rhohat, opts.exact_tol * max(1.0, rhohat.max_abs()))
    if not chk.ok:
        raise NotExactError(
            f"tangent vector must be exact (|d|={chk.closed_residual:.2e}, "
            f"harmonic={chk.harmonic_residual:.2e})"
        )
    lam0 = primitive_of_exact(rhohat, np.inf)
    sysm = _GaugeSystem(state)
    b = -sysm.adjoint(_mv(state.M, lam0.c))
    if x0 is not None and x0.f is not None:
        z0 = sysm.pack(x0.f, x0.h)
    else:
        z0 = np.zeros_like(b)
    report = SolveReport()
    if np.linalg.norm(b) == 0.0:
        z = np.zeros_like(b)
        report.residual_history = [0.0]
    else:
        precond = sysm.precondition if opts.preconditioner == "background_laplacian" else (lambda r: r)
        z, its, hist = _pcg(sysm.apply, b, z0, precond, opts.rel_tol, opts.max_iter)
        report.iterations, report.residual_history = its, hist
    lam = Form(1, lam0.c + sysm.lam(z))
    report.closed_residual, report.harmonic_residual = gauge_residuals(state, lam)
    log.debug("gauge solve: %d iterations, residuals %.2e / %.2e",
              report.iterations, report.closed_residual, report.harmonic_residual)
    f, h = sysm.unpack(z)
    X = state.contract(-lam)
    return TangentVector(state, rhohat, lam, X, report, f.copy(), h.copy())


def tangent_from_field(state: SymplecticState, Y: VectorField) -> TangentVector:
    """Package ``-d iota(Y) rho`` with primitive ``-iota(Y) rho``.

    No gauge solve is done; the caller is responsible for ``*rho iota(Y) rho``
    being exact (the report records how far off it is).
    """
    lam = -interior(Y, state.rho)
    report = SolveReport()
    report.closed_residual, report.harmonic_residual = gauge_residuals(state, lam)
    return TangentVector(state, exterior_d(lam), lam, Y, report)


def _same_state(state, *tangents):
    for t in tangents:
        if t.state is not state and not np.array_equal(t.state.rho.c, state.rho.c):
            raise ValueError("tangent vectors were solved on a different state")


def inner(state: SymplecticState, a: TangentVector, b: TangentVector) -> float:
    """Donaldson inner product ``integral lam_a ^ *rho lam_b``."""
    _same_state(state, a, b)
    return float(np.mean(state.metric_inner_1form(a.lam, b.lam)))


def inner_with_form(state: SymplecticState, a: TangentVector, rhohat: Form) -> float:
    """``<rhohat, a>`` where only ``a`` carries a gauge-fixed primitive.

    Any primitive of ``rhohat`` gives the same value because ``*rho a.lam``
    is exact; the flat coexact one is used.
    """
    _same_state(state, a)
    lam = primitive_of_exact(rhohat, np.inf)
    return float(np.mean(state.metric_inner_1form(lam, a.lam)))


def norm(state: SymplecticState, a: TangentVector) -> float:
    return float(np.sqrt(max(inner(state, a, a), 0.0)))


def christoffel(state: SymplecticState, a: TangentVector, b: TangentVector) -> Form:
    """Symmetric part of the connection: ``Gamma(rhohat, sigmahat)``.

    ``1/2 d iota(Y) rhohat + 1/2 d iota(X) sigmahat
    - 1/2 d iota(nabla_Y X + nabla_X Y) rho``
    with X, Y the associated fields of ``a`` and ``b``.
    """
    _same_state(state, a, b)
    X, Y = a.X, b.X
    sym = covariant_derivative(Y, X) + covariant_derivative(X, Y)
    return 0.5 * (
        exterior_d(interior(Y, a.rhohat))
        + exterior_d(interior(X, b.rhohat))
        - exterior_d(interior(sym, state.rho))
    )


def covariant_derivative_along_path(states, sigmas, delta, method="A", opts=None,
                                    tangents=None):
    """Covariant derivative of ``sigmahat_t`` along ``rho_t`` at the middle sample.

    Parameters
    ----------
    states : sequence of 3 SymplecticState
        ``rho_t`` at ``t = -delta, 0, +delta``.
    sigmas : sequence of 3 Form
        Exact 2-forms ``sigmahat_t`` at the same times.
    delta : float
    method : {"A", "B"}
        "A": ``d/dt sigmahat + Gamma(rhohat, sigmahat)``.
        "B": ``-d iota(Yhat + nabla_X Y) rho`` with ``Y_t`` the associated
        fields of ``sigmahat_t``.
    tangents : sequence of 3 TangentVector, optional
        Precomputed associated data for ``sigmas``.

    Returns
    -------
    Form
        Exact 2-form at ``rho_0``.
    """
    if len(states) != 3 or len(sigmas) != 3:
        raise ValueError("need samples at -delta, 0, +delta")
    n = states[1].n
    if any(s.n != n for s in states) or any(s.n != n for s in sigmas):
        raise ValueError("samples live on mismatched grids")
    opts = opts or SolverOptions()
    mid = states[1]
    rhohat = (states[2].rho - states[0].rho) / (2.0 * delta)
    a = associated_vector_field(mid, rhohat, opts)
    if tangents is None:
        b = associated_vector_field(mid, sigmas[1], opts)
    else:
        b = tangents[1]
    if method == "A":
        dsig = (sigmas[2] - sigmas[0]) / (2.0 * delta)
        return dsig + christoffel(mid, a, b)
    if method == "B":
        if tangents is None:
            tm = associated_vector_field(states[0], sigmas[0], opts, x0=b)
            tp = associated_vector_field(states[2], sigmas[2], opts, x0=b)
        else:
            tm, tp = tangents[0], tangents[2]
        Yhat = (tp.X - tm.X) / (2.0 * delta)
        V = Yhat + covariant_derivative(a.X, b.X)
        return -exterior_d(interior(V, mid.rho))
    raise ValueError(f"unknown method {method!r}")
