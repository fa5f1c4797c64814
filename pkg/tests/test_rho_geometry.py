import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import _oracles as orc
from donaldson.fields4 import Form, Grid4, basis_form, exterior_d, interior, omega_std, star, wedge
from donaldson.rho_geometry import (
    J_STD,
    DegenerateStateError,
    SymplecticState,
    hodge_star_from_metric,
    metric_g_rho,
    u_of,
)
from donaldson.sampling import random_exact, random_form, random_state, random_vector_field

seeds = st.integers(0, 2**32 - 1)


def _constant_state(n, coeffs):
    return SymplecticState(Grid4.of(n).constant_form(2, coeffs))


CONSTANT_RHOS = [
    [1, 0, 0, 0, 0, 1],
    [1, 0.3, -0.2, 0.1, 0.4, 1],
    [2.0, 0, 0, 0, 0, 0.5],
    [0.7, -0.5, 0.25, 0.6, 0.1, 1.3],
]


def test_u_of():
    assert np.allclose(u_of(omega_std(4)).c, 1.0)
    rho = omega_std(4) + random_exact(4, np.random.default_rng(1), 0.2)
    assert np.allclose(2 * u_of(rho).c[0], wedge(rho, rho).c[0], atol=1e-14)


def test_degenerate_rejected():
    with pytest.raises(DegenerateStateError):
        SymplecticState(basis_form(4, 1, 2))
    with pytest.raises(DegenerateStateError):
        SymplecticState(basis_form(4, 1, 2) - basis_form(4, 3, 4))
    with pytest.raises(DegenerateStateError, match="floor"):
        SymplecticState(basis_form(4, 1, 2) + basis_form(4, 3, 4) * 1e-8)


def test_not_closed_rejected():
    rho = omega_std(8).copy()
    rho.c[0] += 0.1 * orc.wave(8, (0, 0, 1, 0))
    with pytest.raises(ValueError, match="not closed"):
        SymplecticState(rho)
    SymplecticState(rho, check_closed=False)


def test_wrong_degree():
    with pytest.raises(ValueError):
        SymplecticState(basis_form(4, 1))


class TestStandardPoint:
    def test_metric_is_flat(self):
        s = SymplecticState(omega_std(4))
        assert np.allclose(s.g, np.eye(4), atol=1e-15)
        # rho(J_rho v, w) = rho(v, J w) with J compatible forces J_rho = -J here
        assert np.allclose(s.J_rho(), -J_STD)

    def test_stars_agree(self):
        s = SymplecticState(omega_std(8))
        rng = np.random.default_rng(0)
        for k in range(5):
            a = random_form(8, k, rng)
            assert (s.star_rho(a) - star(a)).max_abs() < 1e-14

    def test_omega_rho(self):
        s = SymplecticState(omega_std(4))
        assert (s.omega_rho() + omega_std(4)).max_abs() == 0.0


class TestConstantOracle:
    @pytest.mark.parametrize("coeffs", CONSTANT_RHOS)
    def test_metric(self, coeffs):
        s = _constant_state(4, coeffs)
        g = metric_g_rho(s)[0, 0, 0, 0]
        assert np.max(np.abs(g - orc.constant_metric_from_rho(coeffs))) < 1e-12
        assert abs(np.linalg.det(g) - 1.0) < 1e-12

    @pytest.mark.parametrize("coeffs", CONSTANT_RHOS)
    def test_star2_is_metric_star(self, coeffs):
        s = _constant_state(4, coeffs)
        g = s.g[0, 0, 0, 0]
        w = random_form(4, 2, np.random.default_rng(3))
        assert (s.star2(w) - orc.metric_star(g, w)).max_abs() < 1e-12

    @pytest.mark.parametrize("coeffs", CONSTANT_RHOS)
    def test_odd_stars_are_metric_star(self, coeffs):
        s = _constant_state(4, coeffs)
        g = s.g[0, 0, 0, 0]
        rng = np.random.default_rng(4)
        lam, t = random_form(4, 1, rng), random_form(4, 3, rng)
        assert (s.star1(lam) - orc.metric_star(g, lam)).max_abs() < 1e-12
        assert (s.star3(t) - orc.metric_star(g, t)).max_abs() < 1e-12


@given(seeds)
def test_pointwise_algebra(seed):
    rng = np.random.default_rng(seed)
    s = random_state(8, rng, 0.3)
    I = np.eye(4)
    assert np.max(np.abs(s.P_inv @ s.P - I)) < 1e-12
    J = s.J_rho()
    assert np.max(np.abs(J @ J + I)) < 1e-11
    assert np.max(np.abs(s.M @ s.g - I)) < 1e-11
    assert np.max(np.abs(s.S3 @ s.S1 + I)) < 1e-11
    assert np.min(np.linalg.eigvalsh(s.g)) > 0
    # rho(J_rho v, w) = rho(v, J w)
    lhs = np.swapaxes(J, -1, -2) @ s.P
    assert np.max(np.abs(lhs - s.P @ J_STD)) < 1e-11


@given(seeds)
def test_star_identities(seed):
    rng = np.random.default_rng(seed)
    s = random_state(8, rng, 0.3)
    lam, w = random_form(8, 1, rng), random_form(8, 2, rng)
    assert (s.star2(s.star2(w)) - w).max_abs() < 1e-11
    assert (s.star3(s.star1(lam)) + lam).max_abs() < 1e-11
    assert (s.star1(lam) - hodge_star_from_metric(s.g, lam)).max_abs() < 1e-10
    # lam ^ *rho lam is the g_rho norm
    dens = wedge(lam, s.star1(lam)).c[0]
    assert np.max(np.abs(dens - s.metric_inner_1form(lam, lam))) < 1e-11
    assert np.min(dens) >= 0


@given(seeds)
def test_contract(seed):
    rng = np.random.default_rng(seed)
    s = random_state(8, rng, 0.3)
    lam = random_form(8, 1, rng)
    assert (interior(s.contract(lam), s.rho) - lam).max_abs() < 1e-11
    X = random_vector_field(8, rng)
    assert (s.contract(interior(X, s.rho)) - X).max_abs() < 1e-11


def test_class_residual():
    s = random_state(8, np.random.default_rng(5), 0.3)
    assert s.class_residual() < 1e-14
    shifted = SymplecticState(s.rho + basis_form(8, 1, 3) * 0.1)
    assert shifted.class_residual() == pytest.approx(0.1)


def test_caches_are_consistent():
    rng = np.random.default_rng(6)
    s = random_state(8, rng, 0.2)
    rh = random_exact(8, rng, 0.05)
    t = SymplecticState(s.rho + rh)
    assert t.min_u == pytest.approx(float(np.min(t.u)))
    assert "n=8" in repr(t)
