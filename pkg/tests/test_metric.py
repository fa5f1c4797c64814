import numpy as np
import pytest

import _oracles as orc
from donaldson.fields4 import (
    DIM,
    Form,
    exterior_d,
    interior,
    l2_inner,
    omega_std,
)
from donaldson.metric import (
    SolverError,
    SolverOptions,
    associated_vector_field,
    christoffel,
    covariant_derivative_along_path,
    gauge_residuals,
    inner,
    inner_with_form,
    norm,
    tangent_from_field,
)
from donaldson.rho_geometry import SymplecticState
from donaldson.sampling import random_exact, random_form, random_state, random_vector_field
from donaldson.spectral_hodge import NotExactError

TWO_PI = 2 * np.pi


def _sinusoid(n):
    rh = Form(2, np.zeros((6,) + (n,) * 4))
    rh.c[0] = TWO_PI * np.cos(TWO_PI * orc.coords(n)[0])
    return rh


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(rel_tol=0.0)
    with pytest.raises(ValueError):
        SolverOptions(preconditioner="jacobi")


class TestAssociatedField:
    def test_closed_form(self):
        s = SymplecticState(omega_std(8))
        a = associated_vector_field(s, _sinusoid(8))
        expect = np.zeros((DIM,) + (8,) * 4)
        expect[0] = -np.sin(TWO_PI * orc.coords(8)[0])
        assert np.max(np.abs(a.X.c - expect)) <= 1e-10

    def test_zero(self):
        s = random_state(8, np.random.default_rng(0), 0.1)
        a = associated_vector_field(s, Form(2, np.zeros((6,) + (8,) * 4)))
        assert a.X.max_abs() == 0.0 and a.lam.max_abs() == 0.0

    @pytest.mark.parametrize("seed", range(3))
    def test_residuals(self, seed):
        rng = np.random.default_rng(seed)
        s = random_state(8, rng, 0.1)
        rh = random_exact(8, rng)
        a = associated_vector_field(s, rh)
        assert max(a.report.closed_residual, a.report.harmonic_residual) <= 1e-9
        assert (exterior_d(a.lam) - rh).max_abs() <= 1e-9
        assert (interior(a.X, s.rho) + a.lam).max_abs() <= 1e-11
        assert (-exterior_d(interior(a.X, s.rho)) - rh).max_abs() <= 1e-9
        hist = a.report.residual_history
        assert hist[-1] <= 1e-10 and len(hist) == a.report.iterations + 1

    @pytest.mark.parametrize("seed", range(3))
    def test_dense_direct_solve(self, seed):
        rng = np.random.default_rng(100 + seed)
        s = random_state(4, rng, 0.3)
        mu = random_form(4, 1, rng)
        a = associated_vector_field(s, exterior_d(mu))
        assert (a.lam - orc.dense_gauge_solve(s.rho, mu)).max_abs() <= 1e-8

    def test_warm_start_uniqueness(self):
        rng = np.random.default_rng(7)
        s = random_state(8, rng, 0.1)
        rh = random_exact(8, rng)
        opts = SolverOptions(rel_tol=1e-12)
        cold = associated_vector_field(s, rh, opts)
        other = associated_vector_field(s, random_exact(8, rng), opts)
        warm = associated_vector_field(s, rh, opts, x0=other)
        assert (cold.X - warm.X).max_abs() <= 10 * opts.rel_tol * cold.X.max_abs()

    def test_unpreconditioned_agrees(self):
        rng = np.random.default_rng(8)
        s = random_state(8, rng, 0.1)
        rh = random_exact(8, rng)
        a = associated_vector_field(s, rh)
        b = associated_vector_field(s, rh, SolverOptions(preconditioner="none", max_iter=5000))
        assert (a.X - b.X).max_abs() <= 1e-8
        assert b.report.iterations > a.report.iterations

    def test_not_exact(self):
        s = SymplecticState(omega_std(4))
        with pytest.raises(NotExactError):
            associated_vector_field(s, omega_std(4))

    def test_no_convergence(self):
        rng = np.random.default_rng(9)
        s = random_state(8, rng, 0.3)
        with pytest.raises(SolverError) as err:
            associated_vector_field(s, random_exact(8, rng), SolverOptions(max_iter=1))
        assert len(err.value.history) == 2


class TestInner:
    def setup_method(self):
        rng = np.random.default_rng(11)
        self.s = random_state(8, rng, 0.1)
        self.a = associated_vector_field(self.s, random_exact(8, rng))
        self.b = associated_vector_field(self.s, random_exact(8, rng))
        self.rng = rng

    def test_positive(self):
        s = SymplecticState(omega_std(8))
        a = associated_vector_field(s, _sinusoid(8))
        # lam = sin(2 pi x1) dx2, so the norm is the mean of sin^2
        assert inner(s, a, a) == pytest.approx(0.5, abs=1e-14)
        assert norm(self.s, self.a) > 0

    def test_symmetric(self):
        ab, ba = inner(self.s, self.a, self.b), inner(self.s, self.b, self.a)
        assert abs(ab - ba) <= 1e-10 * abs(ab)

    def test_with_form(self):
        ab = inner(self.s, self.a, self.b)
        assert inner_with_form(self.s, self.a, self.b.rhohat) == pytest.approx(ab, rel=1e-9)

    def test_vector_field_formula(self):
        # <-d iota(X) rho, -d iota(Y) rho> = int g(X, Y) dvol_rho for Y associated
        X = random_vector_field(8, self.rng)
        lhs = inner_with_form(self.s, self.b, -exterior_d(interior(X, self.s.rho)))
        rhs = float(np.mean(np.sum(X.c * self.b.X.c, axis=0) * self.s.u))
        assert abs(lhs - rhs) <= 1e-8

    def test_positivity_constant(self):
        ratios = []
        for _ in range(4):
            rh = random_exact(8, self.rng)
            t = associated_vector_field(self.s, rh)
            ratios.append(inner(self.s, t, t) / l2_inner(rh, rh))
        assert min(ratios) > 0

    def test_mismatched_states(self):
        other = random_state(8, np.random.default_rng(12), 0.1)
        with pytest.raises(ValueError, match="different state"):
            inner(other, self.a, self.b)


class TestChristoffel:
    def test_symmetric(self):
        rng = np.random.default_rng(13)
        s = random_state(8, rng, 0.1)
        a = associated_vector_field(s, random_exact(8, rng))
        b = associated_vector_field(s, random_exact(8, rng))
        assert (christoffel(s, a, b) - christoffel(s, b, a)).max_abs() <= 1e-10

    def test_zero(self):
        rng = np.random.default_rng(14)
        s = random_state(8, rng, 0.1)
        z = associated_vector_field(s, Form(2, np.zeros((6,) + (8,) * 4)))
        b = associated_vector_field(s, random_exact(8, rng))
        assert christoffel(s, z, b).max_abs() <= 1e-12

    def test_standard_sinusoid(self):
        # terms by hand: d iota(X) rhohat = -4 pi^2 cos(4 pi x1) dx12 each half,
        # nabla_X X = pi sin(4 pi x1) d1, so the total is -8 pi^2 cos(4 pi x1) dx12
        s = SymplecticState(omega_std(8))
        a = associated_vector_field(s, _sinusoid(8))
        got = christoffel(s, a, a)
        expect = np.zeros((6,) + (8,) * 4)
        expect[0] = -8 * np.pi ** 2 * np.cos(4 * np.pi * orc.coords(8)[0])
        assert np.max(np.abs(got.c - expect)) <= 1e-10

    def test_output_exact(self):
        rng = np.random.default_rng(15)
        s = random_state(8, rng, 0.1)
        a = associated_vector_field(s, random_exact(8, rng))
        b = associated_vector_field(s, random_exact(8, rng))
        gam = christoffel(s, a, b)
        assert exterior_d(gam).max_abs() <= 1e-9
        assert np.max(np.abs(gam.c.mean(axis=(1, 2, 3, 4)))) <= 1e-12


class TestPathDerivative:
    def test_constant_path(self):
        rng = np.random.default_rng(16)
        s = random_state(8, rng, 0.1)
        sig = random_exact(8, rng)
        got = covariant_derivative_along_path([s, s, s], [sig] * 3, 1e-3)
        zero = associated_vector_field(s, Form(2, np.zeros_like(sig.c)))
        b = associated_vector_field(s, sig)
        assert (got - christoffel(s, zero, b)).max_abs() <= 1e-12

    def test_zero_sigma(self):
        rng = np.random.default_rng(17)
        rh = random_exact(8, rng, 0.1)
        states = [SymplecticState(omega_std(8) + rh * (1 + t)) for t in (-1e-3, 0, 1e-3)]
        zero = Form(2, np.zeros((6,) + (8,) * 4))
        for method in "AB":
            assert covariant_derivative_along_path(states, [zero] * 3, 1e-3, method).max_abs() == 0.0

    def test_method_b_matches_explicit(self):
        rng = np.random.default_rng(18)
        s = random_state(8, rng, 0.1)
        sig = random_exact(8, rng)
        b = associated_vector_field(s, sig)
        got = covariant_derivative_along_path([s, s, s], [sig] * 3, 1e-3, "B")
        # constant path and fields: only the nabla_0 Y term survives and X = 0
        assert got.max_abs() <= 1e-9 * max(1.0, b.X.max_abs())

    def test_errors(self):
        s4, s8 = SymplecticState(omega_std(4)), SymplecticState(omega_std(8))
        z8 = Form(2, np.zeros((6,) + (8,) * 4))
        with pytest.raises(ValueError, match="mismatched"):
            covariant_derivative_along_path([s8, s4, s8], [z8] * 3, 1e-3)
        with pytest.raises(ValueError):
            covariant_derivative_along_path([s8, s8], [z8] * 2, 1e-3)
        with pytest.raises(ValueError, match="method"):
            covariant_derivative_along_path([s8] * 3, [z8] * 3, 1e-3, "C")


def test_tangent_from_field():
    rng = np.random.default_rng(19)
    s = random_state(8, rng, 0.1)
    a = associated_vector_field(s, random_exact(8, rng))
    t = tangent_from_field(s, a.X)
    assert (t.rhohat - a.rhohat).max_abs() <= 1e-9
    assert max(gauge_residuals(s, t.lam)) <= 1e-9
    assert abs(inner(s, t, t) - inner(s, a, a)) <= 1e-10
