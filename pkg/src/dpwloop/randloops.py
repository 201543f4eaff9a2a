"""Random twisted loops with known factors, for construct-then-split checks.

Every generator takes a numpy ``Generator`` so that runs are reproducible
from a seed.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .laurent import LaurentMatrix, lexp_nilpotent, lmul
from .roots import _torus

__all__ = [
    "random_algebra",
    "random_k",
    "random_real_k",
    "random_graded",
    "random_minus",
    "random_plus",
    "random_positive_constant",
    "random_real_loop",
    "random_nilpotent_potential",
]


def random_algebra(ctx, rng, scale=1.0):
    """Gaussian element of g^C."""
    basis = ctx.complex_basis()
    c = rng.normal(size=basis.shape[0]) + 1j * rng.normal(size=basis.shape[0])
    return scale * np.tensordot(c, basis, axes=(0, 0)) / np.sqrt(basis.shape[0])


def random_k(ctx, rng, scale=1.0):
    """Gaussian element of k^C (commutes with h)."""
    X = random_algebra(ctx, rng, scale)
    return 0.5 * (X + ctx.sigma(X))


def random_real_k(ctx, rng, scale=1.0):
    """Gaussian element of the real k inside the real form."""
    kb, _ = ctx.kp_real_bases()
    c = rng.normal(size=kb.shape[0])
    return scale * np.tensordot(c, kb, axes=(0, 0)) / np.sqrt(kb.shape[0])


def random_graded(ce, j, rng, scale=1.0):
    """Gaussian element of g^xi_j (zero matrix if the grade is empty)."""
    n = ce.ctx.n
    if j not in ce.grading:
        return np.zeros((n, n), dtype=complex)
    B = ce.grading[j]
    c = rng.normal(size=B.shape[0]) + 1j * rng.normal(size=B.shape[0])
    return scale * np.tensordot(c, B, axes=(0, 0)) / np.sqrt(B.shape[0])


def _graded_exp(ce, rng, sign, scale):
    n = ce.ctx.n
    terms = {sign * j: random_graded(ce, j, rng, scale) for j in range(1, ce.height + 1)}
    terms.setdefault(0, np.zeros((n, n), dtype=complex))
    return lexp_nilpotent(LaurentMatrix(terms))


def random_minus(ce, rng, scale=0.7):
    """exp(sum_j lam^-j X_j) conjugated by a constant in K^C; value e at infinity."""
    c = sla.expm(random_k(ce.ctx, rng, 0.5))
    m = _graded_exp(ce, rng, -1, scale)
    return m.conjugate_by(c)


def random_plus(ce, rng, scale=0.7, constant=True):
    """c0 * exp(sum_j lam^j Y_j) with c0 = exp(k^C element)."""
    c = sla.expm(random_k(ce.ctx, rng, 0.5))
    p = _graded_exp(ce, rng, 1, scale).conjugate_by(c)
    if constant:
        p = sla.expm(random_k(ce.ctx, rng, 0.6)) @ p
    return p


def random_positive_constant(ctx, rng, scale=0.4):
    """s = exp(iY), Y in the real k: the normalized value plus(0) of the Iwasawa gauge."""
    return sla.expm(1j * random_real_k(ctx, rng, scale))


def _real_torus(ctx):
    return [t for t in _torus(ctx) if ctx.real_residual(t) < 1e-12]


def _gamma(mu_coeffs, torus):
    n = torus[0].shape[0]
    xi = sum(m * t for m, t in zip(mu_coeffs, torus))
    ev, S = np.linalg.eig(-1j * xi)
    Sinv = np.linalg.inv(S)
    coeffs = {}
    for i, v in enumerate(np.round(ev.real).astype(int)):
        P = np.outer(S[:, i], Sinv[i])
        coeffs[v] = coeffs.get(v, 0) + P
    return LaurentMatrix(coeffs), sla.expm(np.pi * xi)


def random_real_loop(ctx, rng, pairs=1, max_power=2):
    """A twisted loop with values in the real form, built from k gamma_mu k^-1 with k in K.

    Each pair multiplies k1 gamma_a k1^-1 by k2 gamma_b^-1 k2^-1 where a and
    b share a parity pattern whose exp(pi mu) is +-e or +-h; those central
    or K-central factors cancel, so the product is twisted.  One more factor
    with even mu (exp(pi mu) = e) is appended.
    """
    torus = _real_torus(ctx)
    l = len(torus)
    n = ctx.n
    h = ctx.h
    out = LaurentMatrix.identity(n)

    def kconj(g):
        k = sla.expm(random_real_k(ctx, rng, 1.0))
        return g.conjugate_by(k)

    def pick(parity):
        half = max_power // 2
        m = parity + 2 * rng.integers(-half, half + 1, size=l)
        return np.where(np.abs(m) > max_power, m - 2 * np.sign(m), m)

    for _ in range(pairs):
        parity = rng.integers(0, 2, size=l)
        _, E = _gamma(parity, torus)
        if not any(np.abs(E - c * M).max() < 1e-12 for c in (1, -1) for M in (np.eye(n), h)):
            parity = np.zeros(l, dtype=int)
        ga, _ = _gamma(pick(parity), torus)
        gb, _ = _gamma(pick(parity), torus)
        out = lmul(out, kconj(ga))
        out = lmul(out, kconj(ctx.loop_inverse(gb)))
    gc, _ = _gamma(pick(np.zeros(l, dtype=int)), torus)
    out = lmul(out, kconj(gc))
    return out.trimmed(1e-14)


def random_nilpotent_potential(ce, rng, degree=2, scale=0.6):
    """Polynomial coefficients (list of matrices, lowest z power first) in g^xi_1 (+ g^xi_3...)."""
    odd = [j for j in range(1, ce.height + 1, 2)]
    coeffs = []
    for d in range(degree + 1):
        X = sum(random_graded(ce, j, rng, scale / (d + 1)) for j in odd)
        coeffs.append(X)
    return coeffs
