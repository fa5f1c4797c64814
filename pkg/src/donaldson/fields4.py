"""Differential forms and vector fields on the flat torus T^4 = R^4/Z^4.

Fields are sampled on a uniform periodic N^4 grid over [0, 1)^4.  A k-form is
stored as an array of shape ``(C(4, k), N, N, N, N)``; components are ordered
lexicographically by increasing multi-index (for 2-forms: 12, 13, 14, 23, 24,
34) and within each component block x1 varies slowest and x4 fastest.

Derivatives are spectral.  The Nyquist wavenumber is differentiated to zero,
which keeps the discrete derivative real and skew-adjoint, so ``d(d a) = 0`` and
summation by parts hold to round-off.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations
from math import comb

import numpy as np
from scipy import fft as sfft

DIM = 4
BASIS = {k: tuple(combinations(range(DIM), k)) for k in range(DIM + 1)}
_INDEX = {k: {I: n for n, I in enumerate(BASIS[k])} for k in BASIS}


def _perm_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _complement(I):
    return tuple(i for i in range(DIM) if i not in I)


@lru_cache(maxsize=None)
def _wedge_table(k, l):
    table = []
    for a, I in enumerate(BASIS[k]):
        for b, J in enumerate(BASIS[l]):
            if set(I) & set(J):
                continue
            K = tuple(sorted(I + J))
            table.append((a, b, _INDEX[k + l][K], _perm_sign(I + J)))
    return tuple(table)


@lru_cache(maxsize=None)
def _interior_table(k):
    # iota(e_i) e_I = sum_p (-1)^p [I_p == i] e_{I minus I_p}
    table = []
    for a, I in enumerate(BASIS[k]):
        for p, i in enumerate(I):
            rest = I[:p] + I[p + 1:]
            table.append((a, i, _INDEX[k - 1][rest], (-1) ** p))
    return tuple(table)


@lru_cache(maxsize=None)
def _star_table(k):
    return tuple(
        (a, _INDEX[DIM - k][_complement(I)], _perm_sign(I + _complement(I)))
        for a, I in enumerate(BASIS[k])
    )


@lru_cache(maxsize=None)
def _d_table(k):
    # (d a)_K = sum_p (-1)^p d_{K_p} a_{K minus K_p}
    table = []
    for c, K in enumerate(BASIS[k + 1]):
        for p, i in enumerate(K):
            rest = K[:p] + K[p + 1:]
            table.append((c, i, _INDEX[k][rest], (-1) ** p))
    return tuple(table)


class Grid4:
    """Uniform periodic grid with ``n`` points per axis on the unit 4-torus."""

    def __init__(self, n: int):
        n = int(n)
        if n < 4 or n % 2:
            raise ValueError(f"grid size must be even and >= 4, got {n}")
        self.n = n
        self.spacing = 1.0 / n
        self.shape = (n,) * DIM
        m = np.fft.fftfreq(n, d=1.0 / n)
        m[n // 2] = 0.0
        # angular wavenumbers, Nyquist zeroed for first derivatives
        self.k = 2.0 * np.pi * m
        self.k_r = 2.0 * np.pi * np.fft.rfftfreq(n, d=1.0 / n)
        self.k_r[-1] = 0.0
        full = np.meshgrid(*([self.k] * 3 + [self.k_r]), indexing="ij")
        self._k2_half = sum(q ** 2 for q in full)
        self._null_half = self._k2_half == 0.0
        # the same derivative as a dense real matrix: on short axes a
        # tensordot beats an rfft/irfft pair by a wide margin
        eye = np.eye(n)
        self.diff_matrix = sfft.irfft(1j * self.k_r[:, None] * sfft.rfft(eye, axis=0),
                                      n=n, axis=0)

    @staticmethod
    @lru_cache(maxsize=None)
    def of(n):
        return Grid4(n)

    @property
    def npoints(self):
        return self.n ** DIM

    def coords(self):
        x = np.arange(self.n) * self.spacing
        return np.meshgrid(x, x, x, x, indexing="ij")

    def zeros(self, degree):
        return Form(degree, np.zeros((comb(DIM, degree),) + self.shape))

    def constant_form(self, degree, values):
        values = np.asarray(values, dtype=float).reshape(-1, 1, 1, 1, 1)
        return Form(degree, np.broadcast_to(values, (comb(DIM, degree),) + self.shape).copy())

    def deriv(self, f, axis):
        """Spectral partial derivative along grid axis ``axis`` (0..3).

        ``f`` may carry leading component axes; the last four are spatial.
        """
        ax = f.ndim - DIM + axis
        out = np.tensordot(self.diff_matrix, f, axes=([1], [ax]))
        return np.moveaxis(out, 0, ax)

    def inverse_laplacian(self, f):
        """Solve ``sum_i d_i d_i p = f`` on the non-null Fourier modes.

        Null modes (every wavenumber component 0 or Nyquist) are dropped from
        both the data and the result.
        """
        axes = tuple(range(f.ndim - DIM, f.ndim))
        fh = sfft.rfftn(f, axes=axes)
        k2 = np.where(self._null_half, 1.0, self._k2_half)
        fh = -fh / k2
        fh[..., self._null_half] = 0.0
        return sfft.irfftn(fh, s=self.shape, axes=axes)

    def laplacian(self, f):
        axes = tuple(range(f.ndim - DIM, f.ndim))
        fh = sfft.rfftn(f, axes=axes)
        fh *= -self._k2_half
        return sfft.irfftn(fh, s=self.shape, axes=axes)

    def null_part(self, f):
        """Orthogonal projection onto the derivative-free Fourier modes.

        Those are the modes whose wavevector components are all 0 or N/2,
        i.e. functions depending only on the parity of each grid index.  For
        fields without Nyquist content this is the mean.
        """
        lead = f.shape[: f.ndim - DIM]
        h = self.n // 2
        g = f.reshape(lead + (h, 2) * DIM)
        # summing the outermost axis first is far cheaper than one strided mean
        for i in range(DIM):
            g = g.sum(axis=len(lead) + 2 * i, keepdims=True)
        avg = g / h ** DIM
        return np.broadcast_to(avg, lead + (h, 2) * DIM).reshape(f.shape).copy()

    def dealias(self, f):
        """2/3-rule filter: zero every mode with some |wavenumber| > n/3."""
        axes = tuple(range(f.ndim - DIM, f.ndim))
        fh = sfft.rfftn(f, axes=axes)
        m = np.abs(np.fft.fftfreq(self.n, d=1.0 / self.n))
        mr = np.fft.rfftfreq(self.n, d=1.0 / self.n)
        keep = [m <= self.n / 3.0] * 3 + [mr <= self.n / 3.0]
        mask = np.ones(fh.shape[-DIM:], dtype=bool)
        for i, kp in enumerate(keep):
            shape = [1] * DIM
            shape[i] = kp.size
            mask = mask & kp.reshape(shape)
        fh[..., ~mask] = 0.0
        return sfft.irfftn(fh, s=self.shape, axes=axes)


def _grid_of(arr):
    return Grid4.of(arr.shape[-1])


class Form:
    """A k-form on the grid.

    Supports ``+``, ``-``, negation and multiplication/division by scalars,
    by grid-shaped arrays (pointwise functions) and by 0-forms.
    """

    __slots__ = ("degree", "c")
    __array_priority__ = 100

    def __init__(self, degree: int, c):
        if not 0 <= degree <= DIM:
            raise ValueError(f"form degree must be in 0..4, got {degree}")
        c = np.asarray(c, dtype=float)
        if c.ndim == DIM and comb(DIM, degree) == 1:
            c = c[None]
        if c.ndim != DIM + 1 or c.shape[0] != comb(DIM, degree):
            raise ValueError(
                f"a {degree}-form needs {comb(DIM, degree)} components, got array {c.shape}"
            )
        if not np.isfinite(c).all():
            raise ValueError("form has non-finite entries")
        self.degree = degree
        self.c = c

    @property
    def grid(self):
        return _grid_of(self.c)

    @property
    def n(self):
        return self.c.shape[-1]

    @property
    def scalar(self):
        """The single coefficient array of a 0- or 4-form."""
        if self.c.shape[0] != 1:
            raise ValueError("only 0- and 4-forms have a scalar coefficient")
        return self.c[0]

    def component(self, *index):
        """Coefficient of dx^{i1} ^ ... ^ dx^{ik} with 1-based increasing indices."""
        return self.c[_INDEX[self.degree][tuple(i - 1 for i in index)]]

    def copy(self):
        return Form(self.degree, self.c.copy())

    def max_abs(self):
        return float(np.max(np.abs(self.c))) if self.c.size else 0.0

    def _check(self, other):
        if not isinstance(other, Form) or other.degree != self.degree:
            raise ValueError("forms of different degree")
        if other.c.shape != self.c.shape:
            raise ValueError("forms live on different grids")

    def __add__(self, other):
        self._check(other)
        return Form(self.degree, self.c + other.c)

    def __sub__(self, other):
        self._check(other)
        return Form(self.degree, self.c - other.c)

    def __neg__(self):
        return Form(self.degree, -self.c)

    def __mul__(self, f):
        if isinstance(f, Form):
            if f.degree != 0:
                raise TypeError("use wedge() for products of positive-degree forms")
            f = f.scalar
        if np.ndim(f) == 0:
            return Form(self.degree, self.c * f)
        return Form(self.degree, self.c * np.asarray(f)[None])

    __rmul__ = __mul__

    def __truediv__(self, f):
        if isinstance(f, Form):
            f = f.scalar
        if np.ndim(f) == 0:
            return Form(self.degree, self.c / f)
        return Form(self.degree, self.c / np.asarray(f)[None])

    def __repr__(self):
        return f"Form(degree={self.degree}, n={self.n})"


class VectorField:
    """Four real components per grid point, stored as ``(4, N, N, N, N)``."""

    __slots__ = ("c",)
    __array_priority__ = 100

    def __init__(self, c):
        c = np.asarray(c, dtype=float)
        if c.ndim != DIM + 1 or c.shape[0] != DIM:
            raise ValueError(f"vector field needs shape (4, N, N, N, N), got {c.shape}")
        if not np.isfinite(c).all():
            raise ValueError("vector field has non-finite entries")
        self.c = c

    @property
    def grid(self):
        return _grid_of(self.c)

    def max_abs(self):
        return float(np.max(np.abs(self.c)))

    def __add__(self, other):
        return VectorField(self.c + other.c)

    def __sub__(self, other):
        return VectorField(self.c - other.c)

    def __neg__(self):
        return VectorField(-self.c)

    def __mul__(self, f):
        if isinstance(f, Form):
            f = f.scalar
        if np.ndim(f) == 0:
            return VectorField(self.c * f)
        return VectorField(self.c * np.asarray(f)[None])

    __rmul__ = __mul__

    def __truediv__(self, f):
        return self * (1.0 / f)

    def flat(self):
        """Lower the index with the Euclidean metric: ``iota(X) g``."""
        return Form(1, self.c.copy())

    def __repr__(self):
        return f"VectorField(n={self.c.shape[-1]})"


def coordinate_field(n, axis, f=1.0):
    """``f * d/dx^{axis+1}`` as a vector field."""
    c = np.zeros((DIM,) + (n,) * DIM)
    c[axis] = f
    return VectorField(c)


def basis_form(n, *index):
    """The constant form dx^{i1} ^ ... ^ dx^{ik} (1-based indices)."""
    k = len(index)
    I = tuple(sorted(i - 1 for i in index))
    if len(set(I)) < k:
        return Grid4.of(n).zeros(k)
    out = Grid4.of(n).zeros(k)
    out.c[_INDEX[k][I]] = _perm_sign([i - 1 for i in index])
    return out


def volume_form(n):
    return Grid4.of(n).constant_form(4, [1.0])


def omega_std(n):
    """dx1^dx2 + dx3^dx4, the fixed cohomology class representative."""
    return Grid4.of(n).constant_form(2, [1, 0, 0, 0, 0, 1])


def wedge(a: Form, b: Form) -> Form:
    """Pointwise exterior product ``a ^ b``."""
    k, l = a.degree, b.degree
    if k + l > DIM:
        raise ValueError("degree > 4")
    if a.c.shape[1:] != b.c.shape[1:]:
        raise ValueError("forms live on different grids")
    out = np.zeros((comb(DIM, k + l),) + a.c.shape[1:])
    for i, j, o, s in _wedge_table(k, l):
        if s > 0:
            out[o] += a.c[i] * b.c[j]
        else:
            out[o] -= a.c[i] * b.c[j]
    return Form(k + l, out)


def exterior_d(a: Form) -> Form:
    """Exterior derivative, differentiated spectrally."""
    k = a.degree
    if k >= DIM:
        raise ValueError("exterior derivative of a 4-form is not defined here")
    grid = a.grid
    partial = [grid.deriv(a.c, i) for i in range(DIM)]
    out = np.zeros((comb(DIM, k + 1),) + a.c.shape[1:])
    for o, i, src, s in _d_table(k):
        out[o] += s * partial[i][src]
    return Form(k + 1, out)


d = exterior_d


def interior(X: VectorField, a: Form) -> Form:
    """Contraction ``iota(X) a`` in the first slot."""
    k = a.degree
    if k == 0:
        raise ValueError("cannot contract a 0-form")
    out = np.zeros((comb(DIM, k - 1),) + a.c.shape[1:])
    for src, i, o, s in _interior_table(k):
        out[o] += s * X.c[i] * a.c[src]
    return Form(k - 1, out)


def star(a: Form) -> Form:
    """Hodge star of the Euclidean metric with orientation dx1^dx2^dx3^dx4.

    Satisfies ``a ^ *b = <a, b> dvol``; in four dimensions ``**`` equals
    ``(-1)**(k*(4-k))``, i.e. +1 on even and -1 on odd degrees.
    """
    k = a.degree
    out = np.empty((comb(DIM, DIM - k),) + a.c.shape[1:])
    for src, o, s in _star_table(k):
        out[o] = s * a.c[src]
    return Form(DIM - k, out)


star_background = star


def sd_split(w: Form):
    """Return ``(w+, w-)`` with ``w± = (w ± *w)/2``."""
    if w.degree != 2:
        raise ValueError("self-dual splitting needs a 2-form")
    sw = star(w)
    return Form(2, 0.5 * (w.c + sw.c)), Form(2, 0.5 * (w.c - sw.c))


def pointwise_norm2(a: Form):
    """``|a|^2`` for the Euclidean metric, as a grid array."""
    return np.sum(a.c ** 2, axis=0)


def lie_derivative(X: VectorField, a: Form) -> Form:
    """Cartan's formula ``L_X a = d iota(X) a + iota(X) d a``."""
    out = None
    if a.degree > 0:
        out = exterior_d(interior(X, a))
    if a.degree < DIM:
        term = interior(X, exterior_d(a))
        out = term if out is None else out + term
    return out


def covariant_derivative(X: VectorField, Y: VectorField) -> VectorField:
    """Flat Levi-Civita connection: ``(nabla_X Y)^j = X^i d_i Y^j``."""
    grid = Y.grid
    out = np.zeros_like(Y.c)
    for i in range(DIM):
        out += X.c[i][None] * grid.deriv(Y.c, i)
    return VectorField(out)


def bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Standard commutator ``[X, Y] f = X(Y f) - Y(X f)``."""
    return covariant_derivative(X, Y) - covariant_derivative(Y, X)


def integrate(a: Form) -> float:
    """Integral of a 4-form over the unit torus (mean of its density)."""
    if a.degree != DIM:
        raise ValueError("only 4-forms can be integrated")
    return float(np.mean(a.c[0]))


def pairing(a: Form, b: Form) -> float:
    """``integral of a ^ b`` for complementary degrees."""
    return integrate(wedge(a, b))


def l2_inner(a: Form, b: Form) -> float:
    """Euclidean L2 inner product ``integral <a, b> dvol``."""
    return float(np.mean(np.sum(a.c * b.c, axis=0)))
