"""Roots, canonical elements and the gradings they induce.

The Cartan subalgebra is a maximal torus of the compact form that commutes
with the involution h.  Roots come from diagonalizing ad on a generic torus
element; positivity is lexicographic in the torus coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .errors import HalfIntegerConvention, NonIntegralElement, NonQuantizedSpectrum
from .laurent import LaurentMatrix

__all__ = [
    "CartanData",
    "CanonicalElement",
    "cartan_data",
    "enumerate_canonical",
    "grading",
    "u0_spaces",
    "gamma_xi_loop",
    "gamma_xi_at",
    "exp_pi_check",
    "ExpPiReport",
    "span_projector",
    "subspace_distance",
    "subspace_intersection",
    "canonical_reduction",
]

SNAP = 1e-8  # integrality tolerance for spectra


# ---------------------------------------------------------------------------
# linear algebra on subspaces of matrices


def _flat(basis):
    b = np.asarray(basis, dtype=complex)
    if b.size == 0:
        return np.zeros((0, 0), dtype=complex)
    return b.reshape(b.shape[0], -1).T  # columns are vectors


def _orth(cols, rtol=1e-9):
    if cols.size == 0 or cols.shape[1] == 0:
        return np.zeros((cols.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((cols.shape[0], 0), dtype=complex)
    r = int(np.sum(s > rtol * max(1.0, s[0])))
    return u[:, :r]


def span_projector(basis, size=None):
    """Orthogonal projector (Frobenius inner product) onto span(basis)."""
    basis = np.asarray(basis, dtype=complex)
    if basis.size == 0:
        if size is None:
            raise ValueError("size needed for an empty basis")
        return np.zeros((size * size, size * size), dtype=complex)
    q = _orth(_flat(basis))
    return q @ q.conj().T


def subspace_distance(a, b, size=None):
    """Operator-norm distance between the projectors onto span(a) and span(b)."""
    if size is None:
        for x in (a, b):
            x = np.asarray(x)
            if x.size:
                size = x.shape[-1]
    pa = span_projector(a, size)
    pb = span_projector(b, size)
    if pa.size == 0 and pb.size == 0:
        return 0.0
    return float(np.linalg.norm(pa - pb, 2))


def subspace_intersection(a, b, size):
    """Basis (m, n, n) of span(a) ∩ span(b)."""
    qa = _orth(_flat(a)) if np.asarray(a).size else np.zeros((size * size, 0))
    qb = _orth(_flat(b)) if np.asarray(b).size else np.zeros((size * size, 0))
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        return np.zeros((0, size, size), dtype=complex)
    # principal angles: singular values of qa^* qb equal to one
    u, s, _ = np.linalg.svd(qa.conj().T @ qb)
    k = int(np.sum(s > 1 - 1e-9))
    vecs = qa @ u[:, :k]
    return vecs.T.reshape(k, size, size)


def _basis_from_cols(cols, n):
    q = _orth(cols)
    return q.T.reshape(q.shape[1], n, n)


# ---------------------------------------------------------------------------
# torus and roots


def _torus(ctx):
    n = ctx.n
    if ctx.family == "sl":
        out = []
        for a in range(n - 1):
            t = np.zeros((n, n), dtype=complex)
            t[a, a], t[a + 1, a + 1] = 1j, -1j
            out.append(t)
        return out
    # orthogonal: rotation generators conjugated into the compact form,
    # paired inside eigenspaces of h, highest indices first
    p = np.sqrt(ctx.jdiag.astype(complex))
    out = []
    for val in (1.0, -1.0):
        idx = [i for i in range(n) if ctx.sdiag[i] == val][::-1]
        for a, b in zip(idx[0::2], idx[1::2]):
            lo, hi = min(a, b), max(a, b)
            t = np.zeros((n, n), dtype=complex)
            t[lo, hi] = p[lo] / p[hi]
            t[hi, lo] = -p[hi] / p[lo]
            out.append(t)
    return out


def _ad_matrix(ctx, X):
    basis = ctx.complex_basis()
    comm = X @ basis - basis @ X
    return ctx.coords(comm).T  # column m = coords of [X, B_m]


@dataclass
class CartanData:
    """Torus, roots, simple roots and the dual basis for a context."""

    ctx: object
    torus: list
    roots: np.ndarray        # (R, l) real: theta(t_k) / i
    root_vectors: np.ndarray  # (R, n, n)
    positive: np.ndarray     # bool mask
    simple: list             # indices into roots, ordered
    dual_basis: list         # xi_k matrices with theta_j(xi_k) = i delta_jk

    @property
    def rank(self):
        return len(self.torus)

    def simple_roots(self):
        return self.roots[self.simple]

    def root_value(self, idx, X):
        """theta(X)/i for the root with index idx, via its root vector."""
        v = self.root_vectors[idx]
        w = X @ v - v @ X
        return complex(np.vdot(v.ravel(), w.ravel()) / np.vdot(v.ravel(), v.ravel())) / 1j

    def simple_values(self, X):
        return np.array([self.root_value(i, X) for i in self.simple])

    def dual_check(self):
        """max |theta_j(xi_k) - i delta_jk|."""
        l = self.rank
        M = np.array([[self.root_value(j, xk) for xk in self.dual_basis] for j in self.simple])
        return float(np.abs(M - np.eye(l)).max())

    def is_canonical(self, X, tol=1e-9):
        vals = self.simple_values(X)
        ok = np.abs(vals.imag).max() < tol
        re = vals.real
        return bool(ok and np.all((np.abs(re) < tol) | (np.abs(re - 1) < tol)))


def cartan_data(ctx):
    """Compute roots and the dual basis of simple roots for ``ctx``."""
    torus = _torus(ctx)
    l = len(torus)
    ads = [_ad_matrix(ctx, t) for t in torus]
    weights = 1.0 + np.sqrt(np.arange(2, l + 2)) / 7.0  # generic combination
    A = sum(w * a for w, a in zip(weights, ads))
    ev, V = np.linalg.eig(A)
    basis = ctx.complex_basis()
    roots, vecs = [], []
    zero = np.abs(ev) < 1e-8
    # group eigenvectors by eigenvalue (roots have 1-dim spaces)
    for i in np.nonzero(~zero)[0]:
        v = V[:, i]
        vals = []
        for a in ads:
            w = a @ v
            vals.append(np.vdot(v, w) / np.vdot(v, v))
        vals = np.array(vals) / 1j
        if np.abs(vals.imag).max() > 1e-8:
            raise NonIntegralElement("torus generators do not act by imaginary eigenvalues")
        roots.append(np.round(vals.real, 10))
        X = np.tensordot(v, basis, axes=(0, 0))
        vecs.append(X / np.abs(X).max())
    roots = np.array(roots)
    order = np.lexsort(roots.T[::-1])[::-1]
    roots = roots[order]
    vecs = np.array(vecs)[order]

    def lexpos(r):
        nz = np.nonzero(np.abs(r) > 1e-9)[0]
        return nz.size > 0 and r[nz[0]] > 0

    positive = np.array([lexpos(r) for r in roots])
    pos_idx = np.nonzero(positive)[0]
    pos_set = [roots[i] for i in pos_idx]
    simple = []
    for i in pos_idx:
        r = roots[i]
        decomposable = False
        for a in pos_set:
            diff = r - a
            if np.abs(diff).max() > 1e-9 and any(np.abs(diff - b).max() < 1e-9 for b in pos_set):
                decomposable = True
                break
        if not decomposable:
            simple.append(int(i))
    if len(simple) != l:
        raise RuntimeError(f"found {len(simple)} simple roots for rank {l}")
    # order simple roots by lexicographic size (largest first)
    Theta = roots[simple]  # Theta[j, m] = theta_j(t_m)/i
    cinv = np.linalg.inv(Theta)
    dual = [sum(cinv[m, k] * torus[m] for m in range(l)) for k in range(l)]
    return CartanData(ctx, torus, roots, vecs, positive, simple, dual)


# ---------------------------------------------------------------------------
# gradings


def _spectral_data(xi):
    """Distinct values mu of -i*xi (vector rep) and spectral projectors."""
    xi = np.asarray(xi, dtype=complex)
    n = xi.shape[0]
    ev = np.linalg.eigvals(-1j * xi)
    if np.abs(ev.imag).max() > 1e-8:
        raise NonQuantizedSpectrum("xi has eigenvalues off the imaginary axis")
    vals = []
    for v in sorted(ev.real):
        if not vals or abs(v - vals[-1]) > 1e-7:
            vals.append(v)
    vals = np.array(vals)
    M = -1j * xi
    projs = []
    for a, mu in enumerate(vals):
        P = np.eye(n, dtype=complex)
        for b, nu in enumerate(vals):
            if b != a:
                P = P @ (M - nu * np.eye(n)) / (mu - nu)
        projs.append(P)
    resid = float(np.abs(sum(projs) - np.eye(n)).max()) if projs else 0.0
    if resid > 1e-8:
        raise NonQuantizedSpectrum("xi is not diagonalizable")
    return vals, np.array(projs)


@dataclass
class CanonicalElement:
    """xi with its ad-grading of g^C.

    ``grading`` maps j to a basis (m, n, n) of g^xi_j (only nonzero grades).
    ``index_set`` lists the 1-based dual-basis indices when xi is a subset
    sum produced by :func:`enumerate_canonical`.
    """

    xi: np.ndarray
    ctx: object
    grading: dict
    height: int
    is_canonical: bool = False
    index_set: tuple = ()
    mu: np.ndarray = field(default=None, repr=False)
    projectors: np.ndarray = field(default=None, repr=False)

    def dims(self):
        return {j: b.shape[0] for j, b in sorted(self.grading.items())}

    def component(self, X, j):
        """Grade-j part of X: sum over mu - nu = j of P_mu X P_nu."""
        X = np.asarray(X, dtype=complex)
        out = np.zeros_like(X)
        for a, mu in enumerate(self.mu):
            for b, nu in enumerate(self.mu):
                if abs(mu - nu - j) < 1e-7:
                    out = out + self.projectors[a] @ X @ self.projectors[b]
        return out

    def components(self, X):
        """dict j -> grade-j part, over every difference of spectral values."""
        X = np.asarray(X, dtype=complex)
        out = {}
        for a, mu in enumerate(self.mu):
            for b, nu in enumerate(self.mu):
                d = mu - nu
                j = int(round(d))
                if abs(d - j) > SNAP:
                    piece = self.projectors[a] @ X @ self.projectors[b]
                    if np.abs(piece).max() > 1e-12:
                        raise NonIntegralElement(f"ad(xi) eigenvalue {d} on X")
                    continue
                out[j] = out.get(j, 0) + self.projectors[a] @ X @ self.projectors[b]
        return out

    def conj_by_gamma(self, X):
        """gamma_xi^-1 X gamma_xi as a Laurent loop (grade-j parts go to lam^-j)."""
        comps = self.components(X)
        n = X.shape[-1]
        if not comps:
            return LaurentMatrix(np.zeros((1, n, n)), 0)
        return LaurentMatrix({-j: c for j, c in comps.items()})

    @cached_property
    def vector_spread(self):
        """Largest difference of vector-representation eigenvalues (a lam-degree bound)."""
        return int(round(self.mu.max() - self.mu.min())) if self.mu.size else 0

    def positive_basis(self, lo=1):
        """Basis of the sum of g_j over j >= lo."""
        parts = [b for j, b in self.grading.items() if j >= lo]
        return np.concatenate(parts) if parts else np.zeros((0, self.ctx.n, self.ctx.n), dtype=complex)


def grading(xi, ctx, cd=None, index_set=()):
    """The grading of g^C by ad(xi); raises NonIntegralElement off i*Z."""
    xi = np.asarray(xi, dtype=complex)
    n = ctx.n
    if not np.any(xi):
        mu, projs = np.zeros(1), np.eye(n, dtype=complex)[None]
    else:
        mu, projs = _spectral_data(xi)
    basis = ctx.complex_basis()
    # grade-j part of every basis vector: sum of P_a B P_b over mu_a - mu_b = j
    pieces = {}
    for a, m1 in enumerate(mu):
        for b, m2 in enumerate(mu):
            d = m1 - m2
            block = projs[a] @ basis @ projs[b]
            if np.abs(block).max() < 1e-12:
                continue
            j = int(round(d))
            if abs(d - j) > SNAP:
                raise NonIntegralElement(f"ad(xi) has eigenvalue {d}i")
            pieces[j] = pieces.get(j, 0) + block
    grades = {}
    for j, stacked in sorted(pieces.items()):
        B = _basis_from_cols(_flat(stacked), n)
        if B.shape[0]:
            grades[j] = B
    total = sum(b.shape[0] for b in grades.values())
    if total != basis.shape[0]:
        raise NonIntegralElement(f"grade dimensions add to {total}, expected {basis.shape[0]}")
    height = max([j for j in grades if j > 0], default=0)
    canon = cd.is_canonical(xi) if cd is not None else False
    return CanonicalElement(xi, ctx, grades, height, canon, tuple(index_set), mu, projs)


def enumerate_canonical(cd):
    """All 2^l - 1 nonempty subset sums of the dual basis with their gradings."""
    out = []
    l = cd.rank
    for size in range(1, l + 1):
        for subset in combinations(range(l), size):
            xi = sum(cd.dual_basis[k] for k in subset)
            out.append(grading(xi, cd.ctx, cd, tuple(k + 1 for k in subset)))
    return out


def canonical_reduction(cd, multiplicities):
    """xi = sum n_k xi_k and its canonical companion sum_{n_k > 0} xi_k."""
    m = list(multiplicities)
    xi = sum(c * d for c, d in zip(m, cd.dual_basis))
    can = sum(d for c, d in zip(m, cd.dual_basis) if c > 0)
    return xi, can


def u0_spaces(ce):
    """lam-graded bases of u0 and of its T-invariant part.

    Returns two lists of (lam_power, basis) where the basis at power j spans
    the sum of g^xi_k over j < k <= r(xi).  The T-part keeps even powers.
    """
    r = ce.height
    full, even = [], []
    for j in range(0, r):
        parts = [ce.grading[k] for k in range(j + 1, r + 1) if k in ce.grading]
        if not parts:
            continue
        B = np.concatenate(parts)
        full.append((j, B))
        if j % 2 == 0:
            even.append((j, B))
    return full, even


def u0_dims(ce):
    full, even = u0_spaces(ce)
    return sum(b.shape[0] for _, b in full), sum(b.shape[0] for _, b in even)


# ---------------------------------------------------------------------------
# gamma_xi and exp(pi xi)


def gamma_xi_at(xi, t):
    """exp(t xi), the value of gamma_xi at lam = e^{it} (any spectrum)."""
    return sla.expm(t * np.asarray(xi, dtype=complex))


def gamma_xi_loop(xi, ctx=None):
    """gamma_xi as a Laurent loop, sum_j lam^j P_j.

    With an integral vector spectrum the vector-representation loop is
    returned.  With a half-integral spectrum only Ad(gamma_xi) is a loop; it
    is returned (acting on coordinates of ``ctx.complex_basis()``) when a
    context is given, otherwise HalfIntegerConvention is raised.
    """
    xi = np.asarray(xi, dtype=complex)
    n = xi.shape[0]
    if not np.any(xi):
        return LaurentMatrix.identity(n)
    mu, projs = _spectral_data(xi)
    two = 2 * mu
    if np.abs(two - np.round(two)).max() > SNAP:
        raise NonQuantizedSpectrum(f"spectrum {mu} is not in Z/2")
    if np.abs(mu - np.round(mu)).max() <= SNAP:
        return LaurentMatrix({int(round(m)): P for m, P in zip(mu, projs)})
    if ctx is None:
        raise HalfIntegerConvention("half-integral spectrum: pass ctx for the adjoint loop")
    return gamma_xi_adjoint(xi, ctx)


def gamma_xi_adjoint(xi, ctx):
    """Ad(gamma_xi) on coordinates of the basis of g^C, a loop of N x N matrices."""
    ce = grading(xi, ctx)
    basis = ctx.complex_basis()
    N = basis.shape[0]
    coeffs = {}
    for m in range(N):
        for j, piece in ce.components(basis[m]).items():
            c = coeffs.setdefault(j, np.zeros((N, N), dtype=complex))
            c[:, m] += ctx.coords(piece)
    return LaurentMatrix(coeffs)


def _center(ctx):
    n = ctx.n
    if ctx.family == "so":
        return [1.0, -1.0] if n % 2 == 0 else [1.0]
    return [np.exp(2j * np.pi * k / n) for k in range(n)]


@dataclass
class ExpPiReport:
    exact: float           # |exp(pi xi) - h|
    modulo_center: float   # min over central c of |exp(pi xi) - c h|
    central_factor: complex
    spectral: float        # distance between spectra (conjugacy evidence)

    @property
    def residual(self):
        return self.modulo_center


def exp_pi_check(xi, h, ctx=None):
    """Compare exp(pi xi) with h exactly, modulo the center and by spectrum."""
    E = sla.expm(np.pi * np.asarray(xi, dtype=complex))
    h = np.asarray(h, dtype=complex)
    exact = float(np.abs(E - h).max())
    cands = _center(ctx) if ctx is not None else [1.0]
    best, fac = np.inf, 1.0
    for c in cands:
        r = float(np.abs(E - c * h).max())
        if r < best:
            best, fac = r, c
    a = np.linalg.eigvals(E)
    b = np.linalg.eigvals(h)
    cost = np.abs(a[:, None] - b[None, :])
    ri, ci = linear_sum_assignment(cost)
    spec = float(cost[ri, ci].max())
    return ExpPiReport(exact, best, complex(fac), spec)
