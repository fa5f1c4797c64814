"""
Energy, gradient and Hessian
============================

The energy is 2 at the standard form and larger everywhere else in the
class.  Its gradient needs no elliptic solve; the Hessian does.
"""
import numpy as np

from donaldson import energy as en
from donaldson import hyperkahler as hk
from donaldson.fields4 import l2_inner, omega_std, sd_split
from donaldson.metric import associated_vector_field, inner_with_form
from donaldson.rho_geometry import SymplecticState
from donaldson.sampling import random_exact, random_state

n = 8
rng = np.random.default_rng(2)

flat = SymplecticState(omega_std(n))
print("E(omega_std) =", en.energy(flat))

state = random_state(n, rng, size=0.1)
print("E(perturbed) =", en.energy(state))

# directional derivative against central differences
g = en.grad_energy(state)
rhohat = random_exact(n, rng) + g.rhohat * (1 / g.rhohat.max_abs())
exact = inner_with_form(state, g, rhohat)
for h in (1e-2, 1e-3, 1e-4):
    fd = (en.energy(SymplecticState(state.rho + rhohat * h))
          - en.energy(SymplecticState(state.rho - rhohat * h))) / (2 * h)
    print(f"step {h:.0e}: relative FD error {abs(fd - exact) / abs(exact):.2e}")

# Hessian: two formulas, one number (equal up to grid truncation,
# which at this perturbation size is around 1e-7)
a = associated_vector_field(state, rhohat)
rep = en.hessian_report(state, a)
print("quadratic form:", rep.form_value, " paired operator:", rep.operator_paired)

# at omega_std the Hessian is twice the squared anti-self-dual norm
t = associated_vector_field(flat, rhohat)
_, minus = sd_split(rhohat)
print("H at omega_std:", en.hessian_form(flat, t), " 2|rhohat-|^2:", 2 * l2_inner(minus, minus))

# the flat hyperKaehler triple gives independent formulas for the same objects
small = random_state(n, rng, size=5e-4)
diff = (hk.grad_energy_hk(small) - en.grad_energy(small).rhohat).max_abs()
print("hyperKaehler gradient vs generic:", diff / en.grad_energy(small).rhohat.max_abs())
t = associated_vector_field(state, random_exact(n, rng))
print("hyperKaehler Hessian:", hk.hessian_form_hk(state, t), " generic:", en.hessian_form(state, t))
