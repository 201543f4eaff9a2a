"""Birkhoff, Iwasawa and PR.Q factorizations of algebraic loops.

All loop splits are reduced to finite block-Toeplitz linear algebra on the
Fourier coefficients.  For an algebraic input whose factors are algebraic
(the finite uniton situation) the truncated systems are exact once the
truncation degree exceeds the true degree, and every result is checked
against an independent circle-sample residual.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import IwasawaCellBoundary, NonGenericCell, OutsideBigCell, TruncationOverflow
from .laurent import LaurentMatrix, circle_points, lmul
from .liectx import loop_real_residual

__all__ = [
    "BirkhoffResult",
    "IwasawaResult",
    "birkhoff",
    "iwasawa",
    "iwasawa_compact",
    "iwasawa_noncompact",
    "prq_split",
    "default_trunc",
]


def default_trunc(g):
    lo, hi = g.support
    return 2 * (hi - lo) + 4


def _shift_columns(g, K, lo, nd):
    """Stacked coefficient columns of g * lam**k for k = 0..K, shape (K+1, nd*n, n)."""
    n = g.dim
    cols = np.zeros((K + 1, nd, n, n), dtype=complex)
    A = g.array
    for k in range(K + 1):
        start = g.kmin + k - lo
        cols[k, start:start + A.shape[0]] = A
    return cols.reshape(K + 1, nd * n, n)


def _circle_residual(a, b, samples=64):
    pts = circle_points(samples, offset=0.0931)
    return float(np.abs(a(pts) - b(pts)).max())


# ---------------------------------------------------------------------------
# Birkhoff


@dataclass
class BirkhoffResult:
    minus: LaurentMatrix
    plus: LaurentMatrix
    in_big_cell: bool = True
    residual: float = 0.0
    trunc: int = 0


def birkhoff(g, ctx=None, trunc=None, tol=1e-10, max_trunc=128):
    """g = minus * plus with minus in Lambda^- (minus(inf) = e), plus in Lambda^+.

    A right factor q = plus^-1 of degree ``trunc`` is found from the
    conditions that g q has no positive powers and constant term e.  The
    overdetermined block-Toeplitz system is solved in the least-squares
    sense; inconsistency means the truncation is too small (the degree is
    then doubled) and rank deficiency means g is outside the big cell.
    """
    n = g.dim
    g = g.trimmed(0.0)
    a, b = g.support
    if b < 0:
        raise OutsideBigCell("loop has no nonnegative Fourier modes")
    if a >= 0 and b == 0:
        e = LaurentMatrix.identity(n)
        return BirkhoffResult(e, g, True, 0.0, 0)
    K = trunc if trunc is not None else default_trunc(g)
    scale = max(1.0, g.max_abs())
    last = None
    while True:
        rows = b + K + 1  # exponents 0..b+K of g q
        M = np.zeros((rows, n, K + 1, n), dtype=complex)
        for k in range(K + 1):
            for m in range(max(0, a + k), b + k + 1):
                M[m, :, k, :] = g.coeff(m - k)
        M = M.reshape(rows * n, (K + 1) * n)
        rhs = np.zeros((rows * n, n), dtype=complex)
        rhs[:n] = np.eye(n)
        sol, _, rank, sv = np.linalg.lstsq(M, rhs, rcond=None)
        if rank < (K + 1) * n or sv[-1] < 1e-13 * sv[0]:
            raise OutsideBigCell(f"Toeplitz system rank deficient (smallest singular value {sv[-1]:.2e})")
        q = LaurentMatrix(sol.reshape(K + 1, n, n).transpose(0, 1, 2), 0)
        gq = lmul(g, q)
        res = float(np.abs(M @ sol - rhs).max())
        if res < tol * scale:
            break
        last = res
        if 2 * K > max_trunc:
            raise TruncationOverflow(f"Birkhoff residual {res:.2e} at truncation {K}")
        K *= 2
    minus_arr = gq.window(min(gq.kmin, 0), 0).array.copy()
    minus_arr[-1] = np.eye(n)  # the normalization holds to the residual; make it exact
    minus = LaurentMatrix(minus_arr, min(gq.kmin, 0)).trimmed(0.0)
    if ctx is not None:
        minv = ctx.loop_inverse(minus)
    else:
        from .laurent import linv_truncated
        minv = linv_truncated(minus, max(4, 4 * (-minus.kmin) * n), tol=tol)
    plus_full = lmul(minv, g)
    neg = plus_full.outside_norm(0, plus_full.kmax)
    if neg > 1e3 * tol * scale:
        raise OutsideBigCell(f"plus factor has negative modes of size {neg:.2e}")
    plus = plus_full.window(0, max(plus_full.kmax, 0))
    recon = _circle_residual(lmul(minus, plus), g)
    return BirkhoffResult(minus, plus, True, recon, K)


# ---------------------------------------------------------------------------
# Iwasawa


@dataclass
class IwasawaResult:
    unitary: LaurentMatrix
    plus: LaurentMatrix
    singular: bool = False
    diagnostic: dict = field(default_factory=dict)


def _iwasawa_once(g, ctx, K, tol):
    n = g.dim
    H = ctx.H
    hd = ctx.hdiag
    lo, hi = g.kmin, g.kmax + K
    nd = hi - lo + 1
    cols = _shift_columns(g, K, lo, nd)
    G0 = cols[0]
    Gs = np.concatenate(list(cols[1:]), axis=1) if K > 0 else np.zeros((nd * n, 0))
    w = np.tile(hd, nd)
    if K > 0:
        if ctx.is_compact:
            c = np.linalg.lstsq(Gs, G0, rcond=None)[0]
            cond = 0.0
        else:
            T = Gs.conj().T @ (w[:, None] * Gs)
            rhs = Gs.conj().T @ (w[:, None] * G0)
            cond = np.linalg.cond(T)
            if not np.isfinite(cond) or cond > 1e13:
                raise IwasawaCellBoundary(f"indefinite Gram matrix is singular (cond {cond:.2e})")
            c = np.linalg.solve(T, rhs)
        Rf = G0 - Gs @ c
    else:
        Rf, cond = G0, 0.0
    R = LaurentMatrix(Rf.reshape(nd, n, n), lo)
    Gam = np.einsum("kji,j,kjl->il", R.array.conj(), hd, R.array)
    C = H @ Gam  # = H^-1 Gamma since H is diagonal +-1
    ev = np.linalg.eigvals(C)
    if np.any((ev.real <= 1e-12 * np.abs(ev).max()) & (np.abs(ev.imag) < 1e-9 * np.abs(ev).max())):
        raise IwasawaCellBoundary("normalization matrix has spectrum on the negative axis")
    s = sla.sqrtm(C)
    sinv = np.linalg.inv(s)
    u = (R @ sinv).trimmed(1e-14 * max(1.0, R.max_abs()))
    # u^{-1} = H^{-1} u^* H on the circle
    uinv = H @ u.star() @ H
    plus_full = lmul(uinv, g)
    return u, plus_full, s, cond


def iwasawa(g, ctx, trunc=None, tol=1e-10, max_trunc=128):
    """g = unitary * plus with unitary real in ``ctx`` on the circle.

    The plus factor is normalized by plus(0) = s with s^* H = H s and s the
    principal square root, i.e. a polar-type gauge (s is Hermitian positive
    definite when H = I).  Works for compact and non-compact real forms; in
    the non-compact case a singular indefinite Gram system or a square root
    that leaves the group signals the boundary of the open Iwasawa cell.
    """
    g = g.trimmed(0.0)
    K = trunc if trunc is not None else default_trunc(g)
    scale = max(1.0, g.max_abs())
    while True:
        u, plus_full, s, cond = _iwasawa_once(g, ctx, K, tol)
        neg = plus_full.outside_norm(0, max(plus_full.kmax, 0))
        real = loop_real_residual(u, ctx)
        if neg < tol * scale and real < tol * scale:
            break
        if 2 * K > max_trunc:
            msg = f"Iwasawa residuals (negative modes {neg:.2e}, reality {real:.2e}) at truncation {K}"
            if ctx.is_compact:
                raise TruncationOverflow(msg)
            raise IwasawaCellBoundary(msg)
        K = max(2 * K, 2)
    plus = plus_full.window(0, max(plus_full.kmax, 0)).trimmed(1e-14 * scale)
    recon = _circle_residual(lmul(u, plus), g)
    diag = {"trunc": K, "reality": real, "negative_modes": neg, "reconstruction": recon,
            "gram_condition": cond}
    return IwasawaResult(u, plus, False, diag)


def iwasawa_compact(g, ctx_U, trunc=None, tol=1e-10):
    if not ctx_U.is_compact:
        raise ValueError(f"{ctx_U.name} is not a compact real form")
    return iwasawa(g, ctx_U, trunc, tol)


def iwasawa_noncompact(g, ctx_G, trunc=None, tol=1e-10):
    if ctx_G.is_compact:
        raise ValueError(f"{ctx_G.name} is compact; use iwasawa_compact")
    return iwasawa(g, ctx_G, trunc, tol)


# ---------------------------------------------------------------------------
# PR . Q


def _graded_basis(ce):
    """Unitary S with S^* xi S diagonal, values -i*xi in decreasing order, and block sizes."""
    M = -1j * np.asarray(ce.xi, dtype=complex)
    herm = 0.5 * (M + M.conj().T)
    if np.abs(M - herm).max() > 1e-10:
        raise ValueError("xi must be skew-Hermitian (an element of the compact torus)")
    ev, S = np.linalg.eigh(herm)
    order = np.argsort(-ev, kind="stable")
    ev, S = ev[order], S[:, order]
    sizes = []
    for i, v in enumerate(ev):
        if i and abs(v - ev[i - 1]) < 1e-8:
            sizes[-1] += 1
        else:
            sizes.append(1)
    return S, sizes


def prq_split(V, ce, tol=1e-10):
    """V = R Q with R in PR (grades >= 0) and Q in the unipotent group of grades < 0.

    In an eigenbasis of xi ordered by decreasing eigenvalue, PR is block
    upper triangular and Q is block unit lower triangular, so the split is a
    block LU factorization.  A singular pivot block means V is not in the
    open cell PR.Q (the Weyl element is not the identity).
    """
    V = np.asarray(V, dtype=complex)
    S, sizes = _graded_basis(ce)
    W = S.conj().T @ V @ S
    edges = np.concatenate([[0], np.cumsum(sizes)])
    nb = len(sizes)
    blk = lambda i: slice(edges[i], edges[i + 1])
    R = np.zeros_like(W)
    Q = np.eye(W.shape[0], dtype=complex)
    # process blocks from the last one upward: W = R Q, R upper, Q unit lower
    for k in range(nb - 1, -1, -1):
        # diagonal block: W_kk = R_kk + sum_{m>k} R_km Q_mk
        acc = W[blk(k), blk(k)].copy()
        for m in range(k + 1, nb):
            acc -= R[blk(k), blk(m)] @ Q[blk(m), blk(k)]
        R[blk(k), blk(k)] = acc
        if np.linalg.cond(acc) > 1e12:
            raise NonGenericCell(f"pivot block {k} is singular")
        acc_inv = np.linalg.inv(acc)
        for j in range(k - 1, -1, -1):
            # row k, column j < k: W_kj = R_kk Q_kj + sum_{m>k} R_km Q_mj
            rhs = W[blk(k), blk(j)].copy()
            for m in range(k + 1, nb):
                rhs -= R[blk(k), blk(m)] @ Q[blk(m), blk(j)]
            Q[blk(k), blk(j)] = acc_inv @ rhs
        for i in range(k - 1, -1, -1):
            # row i < k, column k: W_ik = R_ik + sum_{m>k} R_im Q_mk
            rhs = W[blk(i), blk(k)].copy()
            for m in range(k + 1, nb):
                rhs -= R[blk(i), blk(m)] @ Q[blk(m), blk(k)]
            R[blk(i), blk(k)] = rhs
    Rm = S @ R @ S.conj().T
    Qm = S @ Q @ S.conj().T
    res = float(np.abs(Rm @ Qm - V).max())
    if res > 1e3 * tol * max(1.0, np.abs(V).max()) ** 2:
        raise NonGenericCell(f"PR.Q reconstruction residual {res:.2e}")
    return Rm, Qm
