"""
Differential forms on a periodic grid
=====================================

Forms on the flat 4-torus are stored as component arrays, one grid-sized
block per increasing multi-index.  Derivatives are spectral.
"""
import numpy as np

from donaldson.fields4 import Form, Grid4, exterior_d, integrate, omega_std, star, wedge
from donaldson.sampling import random_form
from donaldson.spectral_hodge import hodge_decompose, primitive_of_exact

n = 8
grid = Grid4.of(n)
x1, x2, x3, x4 = grid.coords()

# the standard symplectic form dx12 + dx34
omega = omega_std(n)
print(omega)

# omega ^ omega is twice the volume form, and omega is self-dual
print("integral of omega^omega:", integrate(wedge(omega, omega)))
print("|*omega - omega| =", (star(omega) - omega).max_abs())

# a 1-form sin(2 pi x1) dx2 and its derivative 2 pi cos(2 pi x1) dx12
lam = grid.zeros(1)
lam.c[1] = np.sin(2 * np.pi * x1)
dlam = exterior_d(lam)
print("d lam, dx12 component at x1 = 0:", dlam.c[0, 0, 0, 0, 0], "expected", 2 * np.pi)

# d is nilpotent up to round-off
rng = np.random.default_rng(0)
a = random_form(n, 1, rng)
print("|dd a| =", exterior_d(exterior_d(a)).max_abs())

# Hodge decomposition of a random 2-form
w = random_form(n, 2, rng)
h = hodge_decompose(w)
print("reassembly error:", (h.exact_part + h.coexact_part + h.harmonic_part - w).max_abs())
print("harmonic part (constant coefficients):", np.round(h.harmonic_part.c[:, 0, 0, 0, 0], 4))

# recover a primitive of an exact form; the coexact one is returned
mu = primitive_of_exact(dlam)
print("|mu - lam| =", (mu - lam).max_abs())

# the Hodge star squares to +1 on even degrees and -1 on odd ones
for k in range(5):
    b = random_form(n, k, rng)
    print(f"degree {k}: ** = {(star(star(b)).c[0] / b.c[0]).flat[0]:+.0f}")
