"""Independent reference implementations used by the tests.

Forms are expanded into fully antisymmetric tensors and the algebra is done
by brute-force sums over permutations, sharing no code with the lookup
tables in the library.
"""
from itertools import combinations, permutations
from math import factorial

import numpy as np

from donaldson.fields4 import Form


def perm_sign(p):
    p = list(p)
    sign = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def levi_civita():
    eps = np.zeros((4,) * 4)
    for p in permutations(range(4)):
        eps[p] = perm_sign(p)
    return eps


def to_tensor(a: Form):
    k = a.degree
    grid = a.c.shape[1:]
    T = np.zeros((4,) * k + grid)
    for n, I in enumerate(combinations(range(4), k)):
        for p in permutations(range(k)):
            T[tuple(I[q] for q in p)] = perm_sign(p) * a.c[n]
    return T


def from_tensor(T, k):
    return Form(k, np.stack([T[I] for I in combinations(range(4), k)]))


def wedge(a: Form, b: Form) -> Form:
    k, l = a.degree, b.degree
    A, B = to_tensor(a), to_tensor(b)
    grid = a.c.shape[1:]
    out = np.zeros((4,) * (k + l) + grid)
    for idx in np.ndindex(*((4,) * (k + l))):
        acc = 0.0
        for p in permutations(range(k + l)):
            j = tuple(idx[q] for q in p)
            acc = acc + perm_sign(p) * A[j[:k]] * B[j[k:]]
        out[idx] = acc / (factorial(k) * factorial(l))
    return from_tensor(out, k + l)


def interior(X, a: Form) -> Form:
    T = to_tensor(a)
    return from_tensor(np.einsum("i...,i...->...", X.c, T), a.degree - 1)


def star(a: Form) -> Form:
    k = a.degree
    T = to_tensor(a)
    eps = levi_civita()
    grid = a.c.shape[1:]
    out = np.zeros((4,) * (4 - k) + grid)
    for J in np.ndindex(*((4,) * (4 - k))):
        acc = 0.0
        for I in np.ndindex(*((4,) * k)):
            e = eps[I + J]
            if e:
                acc = acc + e * T[I]
        out[J] = acc / factorial(k)
    return from_tensor(out, 4 - k)


def wave(n, k, phase=0.0):
    """sin(2 pi k.x + phase) on the grid, evaluated directly."""
    x = np.arange(n) / n
    X = np.meshgrid(x, x, x, x, indexing="ij")
    return np.sin(2 * np.pi * sum(ki * xi for ki, xi in zip(k, X)) + phase)


def coords(n):
    x = np.arange(n) / n
    return np.meshgrid(x, x, x, x, indexing="ij")


def dense_derivative(n):
    """Spectral derivative matrix built from explicit Fourier sums (Nyquist dropped)."""
    D = np.zeros((n, n))
    for j in range(n):
        for l in range(n):
            acc = 0.0
            for m in range(-(n // 2) + 1, n // 2):
                acc += (2j * np.pi * m * np.exp(2j * np.pi * m * (j - l) / n)).real
            D[j, l] = acc / n
    return D


def metric_star(g, a: Form) -> Form:
    """Hodge star of a constant metric ``g`` (4x4) on a k-form, via raised indices."""
    k = a.degree
    ginv = np.linalg.inv(g)
    T = to_tensor(a)
    for slot in range(k):
        T = np.moveaxis(np.tensordot(ginv, T, axes=([1], [slot])), 0, slot)
    eps = levi_civita() * np.sqrt(np.linalg.det(g))
    grid = a.c.shape[1:]
    out = np.zeros((4,) * (4 - k) + grid)
    for J in np.ndindex(*((4,) * (4 - k))):
        acc = 0.0
        for I in np.ndindex(*((4,) * k)):
            e = eps[I + J]
            if e:
                acc = acc + e * T[I]
        out[J] = acc / factorial(k)
    return from_tensor(out, 4 - k)


def constant_metric_from_rho(rho_coeffs):
    """g_rho for a constant 2-form, from the 1-form star condition alone.

    The star on 1-forms of a unimodular metric is ``lam -> iota(g^-1 lam) dvol``;
    solving ``K g^-1 = S1`` with ``K`` the matrix of ``e_j -> iota(e_j) dvol``
    recovers g.
    """
    rho = Form(2, np.asarray(rho_coeffs, float).reshape(6, 1, 1, 1, 1))
    vol = Form(4, np.ones((1, 1, 1, 1, 1)))
    u = rho.c[0] * rho.c[5] - rho.c[1] * rho.c[4] + rho.c[2] * rho.c[3]
    S1 = np.zeros((4, 4))
    K = np.zeros((4, 4))
    for j in range(4):
        e = np.zeros((4, 1, 1, 1, 1))
        e[j] = 1.0
        lam = Form(1, e)
        S1[:, j] = (wedge(rho, star(wedge(rho, lam))).c / u).ravel()

        class _X:
            c = e
        K[:, j] = interior(_X, vol).c.ravel()
    return np.linalg.inv(np.linalg.solve(K, S1))


def inverse_metric_field(rho: Form):
    """``g_rho^{-1}`` at every grid point from the 1-form star condition, grid-vectorised."""
    grid = rho.c.shape[1:]
    u = rho.c[0] * rho.c[5] - rho.c[1] * rho.c[4] + rho.c[2] * rho.c[3]
    S1 = np.zeros(grid + (4, 4))
    K = np.zeros((4, 4))
    for j in range(4):
        e = np.zeros((4,) + grid)
        e[j] = 1.0
        S1[..., :, j] = np.moveaxis(wedge(rho, star(wedge(rho, Form(1, e)))).c / u, 0, -1)
        ej = np.zeros((4, 1, 1, 1, 1))
        ej[j] = 1.0

        class _X:
            c = ej
        K[:, j] = interior(_X, Form(4, np.ones((1, 1, 1, 1, 1)))).c.ravel()
    return np.linalg.solve(K, S1)


def dense_gauge_solve(rho: Form, mu: Form):
    """Gauge-fixed primitive of ``d mu`` by a dense least-squares solve.

    Unknowns are a function f and a field h spanned by the per-axis
    {constant, alternating} products (the kernel of the spectral gradient);
    equations are ``div(g^-1 lam) = 0`` and ``g^-1 lam`` orthogonal to that
    kernel, with ``lam = mu + grad f + h``.
    """
    n = rho.c.shape[1]
    npt = n ** 4
    D1 = dense_derivative(n)
    I = np.eye(n)
    Ds = []
    for ax in range(4):
        mats = [I] * 4
        mats[ax] = D1
        K = mats[0]
        for m in mats[1:]:
            K = np.kron(K, m)
        Ds.append(K)
    G = np.vstack(Ds)  # (4 npt, npt)
    div = np.hstack(Ds)  # (npt, 4 npt)
    per_axis = [np.ones(n), (-1.0) ** np.arange(n)]
    null = []
    for idx in np.ndindex(2, 2, 2, 2):
        v = per_axis[idx[0]]
        for a in idx[1:]:
            v = np.kron(v, per_axis[a])
        null.append(v)
    Nb = np.stack(null, axis=1)  # (npt, 16)
    B = np.kron(np.eye(4), Nb)  # (4 npt, 64)
    Minv = inverse_metric_field(rho).reshape(npt, 4, 4)
    Mbig = np.zeros((4 * npt, 4 * npt))
    for i in range(4):
        for j in range(4):
            Mbig[i * npt:(i + 1) * npt, j * npt:(j + 1) * npt] = np.diag(Minv[:, i, j])
    E = np.vstack([div, B.T]) @ Mbig
    A = E @ np.hstack([G, B])
    rhs = -E @ mu.c.reshape(-1)
    z = np.linalg.lstsq(A, rhs, rcond=None)[0]
    lam = mu.c.reshape(-1) + G @ z[:npt] + B @ z[npt:]
    return Form(1, lam.reshape((4,) + (n,) * 4))
