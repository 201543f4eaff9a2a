"""Matrix realizations of G^C, its real forms, the involution and the compact dual.

Two families are supported.

``so``
    G^C = {A : A^T J A = J, det A = 1} for a diagonal +-1 matrix J, with real
    form G^C ∩ U(H).  Taking H = J gives the real group SO(p, q); taking
    H = I gives a compact group conjugate to SO(n).
``sl``
    G^C = SL(n, C) with real form SU(H).

The involution is sigma = Ad(h) for a diagonal +-1 matrix h that commutes
with J and H.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .errors import AlreadyCompact, NotInAlgebra
from .laurent import LaurentMatrix, circle_points, linv_truncated

__all__ = [
    "GroupContext",
    "GroupResidual",
    "orthogonal",
    "lorentz",
    "special_unitary",
    "willmore_context",
    "compact_dual",
    "dual",
    "project_kp",
    "in_group",
    "check_twisted",
    "loop_real_residual",
    "loop_algebra_residual",
    "adjoint_loop",
]


def _diag_pm(d, n=None):
    d = np.asarray(d, dtype=float)
    if d.ndim == 2:
        d = np.diag(d)
    if n is not None and d.size != n:
        raise ValueError(f"expected {n} diagonal entries, got {d.size}")
    return d


@dataclass(frozen=True, eq=False)
class GroupContext:
    """Immutable description of a matrix group with an inner involution.

    ``jdiag``, ``hdiag`` and ``sdiag`` are the diagonals of J, H and h.  For
    the ``sl`` family ``jdiag`` is None.  ``other_h`` remembers the Hermitian
    form of the dual partner so that taking the dual twice returns the
    original context.
    """

    name: str
    family: str
    n: int
    jdiag: np.ndarray | None
    hdiag: np.ndarray
    sdiag: np.ndarray
    tol: float = 1e-10
    other_h: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in ("so", "sl"):
            raise ValueError(f"unknown family {self.family!r}")
        for arr in (self.jdiag, self.hdiag, self.sdiag):
            if arr is not None and arr.size != self.n:
                raise ValueError("diagonal sizes must match n")
        if self.family == "so" and self.jdiag is None:
            raise ValueError("so family needs J")

    # matrices -------------------------------------------------------------
    @property
    def J(self):
        return None if self.jdiag is None else np.diag(self.jdiag).astype(complex)

    @property
    def H(self):
        return np.diag(self.hdiag).astype(complex)

    @property
    def h(self):
        return np.diag(self.sdiag).astype(complex)

    @property
    def hinv(self):
        return np.diag(1.0 / self.sdiag).astype(complex)

    @property
    def is_compact(self):
        return bool(np.all(self.hdiag > 0))

    @property
    def dim(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, GroupContext):
            return NotImplemented
        same = lambda a, b: (a is None and b is None) or (
            a is not None and b is not None and np.array_equal(a, b))
        return (self.family == other.family and self.n == other.n
                and same(self.jdiag, other.jdiag) and same(self.hdiag, other.hdiag)
                and same(self.sdiag, other.sdiag))

    def __hash__(self):
        return hash((self.family, self.n, tuple(self.hdiag), tuple(self.sdiag)))

    def with_tol(self, tol):
        return replace(self, tol=tol)

    # involution and algebra -----------------------------------------------
    def sigma(self, X):
        """Ad(h) X, vectorized over leading axes."""
        s = self.sdiag
        return X * (s[:, None] / s[None, :])

    def algebra_residual(self, X):
        """Distance of X from g^C (max abs entry)."""
        X = np.asarray(X, dtype=complex)
        if self.family == "so":
            j = self.jdiag
            r = np.swapaxes(X, -1, -2) * j[None, :] + j[:, None] * X
            return float(np.abs(r).max())
        return float(np.abs(np.trace(X, axis1=-2, axis2=-1)).max())

    def real_residual(self, X):
        """Distance of X from the real form: X^* H + H X = 0."""
        X = np.asarray(X, dtype=complex)
        hd = self.hdiag
        r = np.conj(np.swapaxes(X, -1, -2)) * hd[None, :] + hd[:, None] * X
        return float(np.abs(r).max())

    def real_part(self, X):
        """Projection of X in g^C onto the real form (along i times it)."""
        Hm = self.H
        Xs = -Hm @ np.conj(np.swapaxes(X, -1, -2)) @ Hm  # the conjugation tau
        return 0.5 * (X + Xs)

    def tau(self, g):
        """Anti-holomorphic involution of G^C fixing the real form: H^-1 g^{*-1} H."""
        Hm = self.H
        return Hm @ np.linalg.inv(np.conj(np.swapaxes(g, -1, -2))) @ Hm

    def group_inverse(self, M):
        M = np.asarray(M, dtype=complex)
        if self.family == "so":
            j = self.jdiag
            return (np.swapaxes(M, -1, -2) * j[None, :]) * (1.0 / j)[:, None]
        return np.linalg.inv(M)

    def loop_inverse(self, g, max_deg=None, tol=None):
        """Inverse of a G^C-valued Laurent loop.

        For the orthogonal family the inverse is J^-1 g^T J, exact and with
        the same support.  For SL the adjugate bound (n-1) * span is used.
        """
        if self.family == "so":
            j = self.jdiag
            c = (np.transpose(g.array, (0, 2, 1)) * j[None, None, :]) * (1.0 / j)[None, :, None]
            return LaurentMatrix(c, g.kmin)
        if max_deg is None:
            max_deg = (self.n - 1) * max(abs(g.kmin), abs(g.kmax))
        return linv_truncated(g, max_deg, tol if tol is not None else 1e3 * self.tol).trimmed(1e-15)

    # bases ------------------------------------------------------------------
    def complex_basis(self):
        """A basis of g^C as an array (N, n, n)."""
        return _complex_basis(self.family, self.n, None if self.jdiag is None else tuple(self.jdiag))

    def coords(self, X):
        """Coordinates of X (or a stack of X) in complex_basis()."""
        basis = self.complex_basis()
        pinv = _basis_pinv(self.family, self.n, None if self.jdiag is None else tuple(self.jdiag))
        X = np.asarray(X, dtype=complex)
        flat = X.reshape(X.shape[:-2] + (-1,))
        return flat @ pinv.T

    def from_coords(self, c):
        return np.tensordot(c, self.complex_basis(), axes=(-1, 0))

    def _key(self):
        j = None if self.jdiag is None else tuple(self.jdiag)
        return (self.family, self.n, j, tuple(self.hdiag), tuple(self.sdiag))

    def real_basis(self):
        """Real basis of the real form g = g^C ∩ u(H), array (dim_R, n, n)."""
        return _real_bases(self._key())[0]

    def kp_real_bases(self):
        """(basis of k, basis of p) inside the real form, as real spans."""
        _, k, p = _real_bases(self._key())
        return k, p


_BASIS_CACHE = {}


def _complex_basis(family, n, jdiag):
    key = (family, n, jdiag)
    if key in _BASIS_CACHE:
        return _BASIS_CACHE[key][0]
    out = []
    if family == "so":
        jinv = 1.0 / np.asarray(jdiag)
        for a in range(n):
            for b in range(a + 1, n):
                A = np.zeros((n, n), dtype=complex)
                A[a, b], A[b, a] = 1.0, -1.0
                out.append(jinv[:, None] * A)
    else:
        for a in range(n):
            for b in range(n):
                if a != b:
                    E = np.zeros((n, n), dtype=complex)
                    E[a, b] = 1.0
                    out.append(E)
        for a in range(n - 1):
            E = np.zeros((n, n), dtype=complex)
            E[a, a], E[a + 1, a + 1] = 1.0, -1.0
            out.append(E)
    basis = np.array(out)
    pinv = np.linalg.pinv(basis.reshape(len(out), -1).T)
    basis.setflags(write=False)
    _BASIS_CACHE[key] = (basis, pinv)
    return basis


@lru_cache(maxsize=64)
def _real_bases(key):
    family, n, jdiag, hdiag, sdiag = key
    basis = _complex_basis(family, n, jdiag)
    Hm = np.diag(hdiag).astype(complex)
    s = np.asarray(sdiag)
    gens = np.concatenate([basis, 1j * basis])
    # real-linear constraints X^* H + H X = 0 on X = sum (a_k + i b_k) B_k
    cond = []
    for Bk in gens:
        r = np.conj(Bk.T) @ Hm + Hm @ Bk
        cond.append(np.concatenate([r.real.ravel(), r.imag.ravel()]))
    ns = sla.null_space(np.array(cond).T, rcond=1e-12)
    real = np.tensordot(ns.T, gens, axes=(1, 0))
    if real.shape[0] != basis.shape[0]:
        raise RuntimeError("real form has the wrong dimension")
    out = []
    for sgn in (1, -1):
        diff = real - sgn * real * (s[:, None] / s[None, :])
        M = np.concatenate([diff.real.reshape(len(real), -1), diff.imag.reshape(len(real), -1)], axis=1).T
        ns = sla.null_space(M, rcond=1e-12)
        out.append(np.tensordot(ns.T, real, axes=(1, 0)))
    for arr in (real, *out):
        arr.setflags(write=False)
    return real, out[0], out[1]


def _basis_pinv(family, n, jdiag):
    _complex_basis(family, n, jdiag)
    return _BASIS_CACHE[(family, n, jdiag)][1]


# ---------------------------------------------------------------------------
# constructors


def orthogonal(n, h=None, signature=None, tol=1e-10, name=None):
    """SO(p, q) context with J = H = diag(-I_p, I_q); compact when p = 0."""
    p, q = signature if signature is not None else (0, n)
    if p + q != n:
        raise ValueError("signature must add up to n")
    j = np.concatenate([-np.ones(p), np.ones(q)])
    s = _diag_pm(h, n) if h is not None else np.ones(n)
    label = name or (f"SO({n})" if p == 0 else f"SO({p},{q})")
    return GroupContext(label, "so", n, j, j.copy(), s, tol)


def lorentz(n, h=None, tol=1e-10):
    """SO+(1, n-1) with J = H = diag(-1, 1, ..., 1)."""
    return orthogonal(n, h=h, signature=(1, n - 1), tol=tol, name=f"SO+(1,{n - 1})")


def special_unitary(n, h=None, signature=(0, None), tol=1e-10):
    """SU(p, q) inside SL(n, C); compact SU(n) by default."""
    p = signature[0]
    q = n - p
    hd = np.concatenate([-np.ones(p), np.ones(q)])
    s = _diag_pm(h, n) if h is not None else np.ones(n)
    label = f"SU({n})" if p == 0 else f"SU({p},{q})"
    return GroupContext(label, "sl", n, None, hd, s, tol)


def willmore_context(extra=4, tol=1e-10):
    """SO+(1, 3+extra) with D = diag(-I_4, I_extra), the setting of the S^{2+extra} example."""
    n = 4 + extra
    D = np.concatenate([-np.ones(4), np.ones(extra)])
    return lorentz(n, h=D, tol=tol)


def compact_dual(ctx):
    """Same complexified data and involution, compact Hermitian form H = I.

    For H = J = I_{p,q} the group U(n) ∩ SO(J, C) is P SO(n) P^-1 with
    P = diag(sqrt(j)), the maximal compact subgroup of SO(J, C) that is
    stable under sigma.
    """
    if ctx.is_compact:
        raise AlreadyCompact(f"{ctx.name} is already compact")
    name = ctx.name + "^U"
    return replace(ctx, name=name, hdiag=np.ones(ctx.n), other_h=ctx.hdiag.copy())


def dual(ctx):
    """Involutive duality: compact_dual on non-compact contexts, inverse otherwise."""
    if not ctx.is_compact:
        return compact_dual(ctx)
    if ctx.other_h is None:
        raise AlreadyCompact(f"{ctx.name} has no recorded non-compact partner")
    name = ctx.name[:-2] if ctx.name.endswith("^U") else ctx.name + "^*"
    return replace(ctx, name=name, hdiag=ctx.other_h.copy(), other_h=None)


# ---------------------------------------------------------------------------
# operations


def project_kp(X, ctx, check=True):
    """Split X in g^C into (X_k, X_p), the +1 and -1 eigenparts of Ad(h)."""
    X = np.asarray(X, dtype=complex)
    if check:
        scale = max(1.0, float(np.abs(X).max()))
        r = ctx.algebra_residual(X)
        if r > ctx.tol * scale:
            raise NotInAlgebra(f"algebra residual {r:.3e}")
    sx = ctx.sigma(X)
    return 0.5 * (X + sx), 0.5 * (X - sx)


@dataclass
class GroupResidual:
    form: float
    det: float
    reality: float
    component: bool  # identity-component heuristic

    def max(self):
        return max(self.form, self.det, self.reality)

    def ok(self, tol):
        return self.max() < tol and self.component


def in_group(M, ctx, tol=None):
    """Residuals of M against G^C membership and the real form.

    ``component`` is a heuristic for the identity component: for the real
    Lorentz group the time-time entry must be >= 1.
    """
    M = np.asarray(M, dtype=complex)
    n = ctx.n
    if ctx.family == "so":
        form = float(np.abs(M.T @ ctx.J @ M - ctx.J).max())
    else:
        form = 0.0
    det = float(abs(np.linalg.det(M) - 1.0))
    reality = float(np.abs(np.conj(M.T) @ ctx.H @ M - ctx.H).max())
    comp = True
    neg = np.nonzero(ctx.hdiag < 0)[0]
    if ctx.family == "so" and neg.size == 1 and reality < 1e-6:
        t = neg[0]
        comp = bool(M[t, t].real >= 1.0 - 1e-8)
    return GroupResidual(form, det, reality, comp)


def check_twisted(g, ctx, samples=64):
    """max over circle samples of |h g(-lam) h^-1 - g(lam)| (works for group or algebra loops)."""
    lam = circle_points(samples, offset=0.1234)
    a = g(-lam)
    b = g(lam)
    return float(np.abs(ctx.sigma(a) - b).max())


def loop_real_residual(g, ctx, samples=64):
    """max over the circle of |g^* H g - H|: real-form membership of a group loop."""
    vals = g(circle_points(samples, offset=0.0777))
    Hm = ctx.H
    r = np.conj(np.swapaxes(vals, -1, -2)) @ Hm @ vals - Hm
    return float(np.abs(r).max())


def loop_algebra_residual(g, ctx, samples=64):
    """max over the circle of |g^T J g - J| (and |det g - 1|)."""
    vals = g(circle_points(samples, offset=0.0555))
    if ctx.family == "so":
        Jm = ctx.J
        r = float(np.abs(np.swapaxes(vals, -1, -2) @ Jm @ vals - Jm).max())
    else:
        r = 0.0
    return max(r, float(np.abs(np.linalg.det(vals) - 1).max()))


def adjoint_loop(g, ctx, ginv=None):
    """Ad(g) as a Laurent loop of N x N matrices acting on coordinates of complex_basis()."""
    if ginv is None:
        ginv = ctx.loop_inverse(g)
    basis = ctx.complex_basis()
    N = basis.shape[0]
    A, B = g.array, ginv.array
    out = np.zeros((A.shape[0] + B.shape[0] - 1, N, N), dtype=complex)
    for a in range(A.shape[0]):
        left = A[a] @ basis  # (N, n, n)
        for b in range(B.shape[0]):
            out[a + b] += ctx.coords(left @ B[b]).T
    return LaurentMatrix(out, g.kmin + ginv.kmin)
