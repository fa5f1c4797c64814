"""Seeded band-limited random fields and symplectic states for identity checks."""
from __future__ import annotations

from math import comb

import numpy as np

from .fields4 import DIM, Form, Grid4, VectorField, exterior_d, omega_std
from .rho_geometry import SymplecticState


def _wave(grid, k, phase):
    x = grid.coords()
    arg = sum(k[j] * x[j] for j in range(DIM))
    return np.sin(2.0 * np.pi * arg + phase)


def random_field(n, ncomp, rng, kmax=1, terms=3, mean=True):
    """Sum of ``terms`` random plane waves (|k_i| <= kmax) per component."""
    grid = Grid4.of(n)
    out = np.zeros((ncomp,) + grid.shape)
    for c in range(ncomp):
        for _ in range(terms):
            k = rng.integers(-kmax, kmax + 1, DIM)
            out[c] += rng.standard_normal() * _wave(grid, k, rng.uniform(0, 2 * np.pi))
        if mean:
            out[c] += rng.standard_normal()
    return out


def random_form(n, degree, rng, kmax=1, terms=3, mean=True) -> Form:
    return Form(degree, random_field(n, comb(DIM, degree), rng, kmax, terms, mean))


def random_vector_field(n, rng, kmax=1, terms=3) -> VectorField:
    return VectorField(random_field(n, DIM, rng, kmax, terms))


def random_exact(n, rng, size=1.0, kmax=1, terms=3) -> Form:
    """``d`` of a random band-limited 1-form, scaled to max-norm ``size``."""
    rh = exterior_d(random_form(n, 1, rng, kmax, terms, mean=False))
    return rh * (size / rh.max_abs())


def random_state(n, rng, size=0.05, kmax=1, terms=3) -> SymplecticState:
    """``omega_std + d lam`` with ``|d lam|_inf = size``; stays in the class."""
    return SymplecticState(omega_std(n) + random_exact(n, rng, size, kmax, terms))


def mode_potential(n, modes) -> Form:
    """1-form potential built from mode descriptors.

    Each mode is a mapping with ``component`` (1..4, the dx^i slot),
    ``wavevector`` (4 ints), ``amplitude`` and ``phase``; it contributes
    ``amplitude * sin(2 pi k.x + phase) dx^i``.
    """
    grid = Grid4.of(n)
    c = np.zeros((DIM,) + grid.shape)
    for m in modes:
        i = int(m["component"]) - 1
        if not 0 <= i < DIM:
            raise ValueError(f"mode component must be 1..4, got {m['component']}")
        k = [int(v) for v in m["wavevector"]]
        if len(k) != DIM:
            raise ValueError("wavevector needs 4 integers")
        c[i] += float(m["amplitude"]) * _wave(grid, k, float(m.get("phase", 0.0)))
    return Form(1, c)
