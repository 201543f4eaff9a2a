"""Matrix Laurent polynomials in the loop parameter and rational functions in z.

A :class:`LaurentMatrix` is a finitely supported Fourier series
``sum_k A_k lam**k`` with complex ``n x n`` coefficients.  Coefficients are
kept as one dense array together with the lowest exponent, which keeps the
Cauchy product and evaluation vectorized.
"""
from __future__ import annotations

import numpy as np

from .errors import EvaluationAtPole, SingularLoop, TruncationOverflow

__all__ = [
    "LaurentMatrix",
    "RationalFn",
    "RationalMatrix",
    "lmul",
    "leval",
    "linv_truncated",
    "lexp_nilpotent",
    "llog_unipotent",
    "ratfn_eval",
    "pole_set",
    "circle_points",
]


def circle_points(count, offset=0.0):
    """``count`` equispaced points on the unit circle, rotated by ``offset`` radians."""
    t = offset + 2 * np.pi * np.arange(count) / count
    return np.exp(1j * t)


class LaurentMatrix:
    """Finite Fourier series in lam with square complex matrix coefficients.

    Parameters
    ----------
    coeffs : dict or ndarray
        Either a mapping exponent -> (n, n) matrix, or a stacked array of
        shape (m, n, n) whose first slice carries exponent ``kmin``.
    kmin : int
        Lowest exponent when ``coeffs`` is an array.
    dim : int, optional
        Matrix size; only needed for an empty mapping.
    """

    __slots__ = ("_kmin", "_c")
    __array_ufunc__ = None  # let ndarray @ LaurentMatrix dispatch to __rmatmul__

    def __init__(self, coeffs, kmin=0, dim=None):
        if isinstance(coeffs, dict):
            if not coeffs:
                if dim is None:
                    raise ValueError("dim is required for an empty coefficient map")
                self._kmin = 0
                self._c = np.zeros((1, dim, dim), dtype=complex)
            else:
                keys = sorted(int(k) for k in coeffs)
                first = np.asarray(coeffs[keys[0]])
                n = first.shape[0]
                arr = np.zeros((keys[-1] - keys[0] + 1, n, n), dtype=complex)
                for k in keys:
                    m = np.asarray(coeffs[k], dtype=complex)
                    if m.shape != (n, n):
                        raise ValueError("all coefficients must be square of one size")
                    arr[k - keys[0]] = m
                self._kmin = keys[0]
                self._c = arr
        else:
            arr = np.array(coeffs, dtype=complex)
            if arr.ndim == 2:
                arr = arr[None]
            if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
                raise ValueError("coefficient array must have shape (m, n, n)")
            self._kmin = int(kmin)
            self._c = arr
        self._c.setflags(write=False)

    # construction helpers -------------------------------------------------
    @classmethod
    def identity(cls, n):
        return cls(np.eye(n, dtype=complex)[None], 0)

    @classmethod
    def constant(cls, m):
        return cls(np.asarray(m, dtype=complex)[None], 0)

    @classmethod
    def monomial(cls, m, k):
        """The loop ``m * lam**k``."""
        return cls(np.asarray(m, dtype=complex)[None], k)

    @classmethod
    def from_samples(cls, values, kmin, kmax):
        """Recover coefficients in [kmin, kmax] from values at ``circle_points(N)``.

        ``values`` has shape (N, n, n) with N > kmax - kmin.  Frequencies
        outside the window alias onto it, so N should be generous.
        """
        values = np.asarray(values, dtype=complex)
        N = values.shape[0]
        fc = np.fft.fft(values, axis=0) / N  # fc[j] ~ coefficient of lam**j
        ks = np.arange(kmin, kmax + 1)
        return cls(fc[ks % N], kmin)

    # basic data -----------------------------------------------------------
    @property
    def dim(self):
        return self._c.shape[1]

    @property
    def kmin(self):
        return self._kmin

    @property
    def kmax(self):
        return self._kmin + self._c.shape[0] - 1

    @property
    def support(self):
        return (self.kmin, self.kmax)

    @property
    def array(self):
        """Read-only stacked coefficients (exponent ``kmin`` first)."""
        return self._c

    @property
    def coeffs(self):
        return {self._kmin + i: self._c[i] for i in range(self._c.shape[0])}

    def coeff(self, k):
        i = k - self._kmin
        if 0 <= i < self._c.shape[0]:
            return self._c[i]
        return np.zeros((self.dim, self.dim), dtype=complex)

    def window(self, kmin, kmax):
        """Coefficients in [kmin, kmax] as a fresh loop (zero padded, others dropped)."""
        out = np.zeros((kmax - kmin + 1, self.dim, self.dim), dtype=complex)
        lo, hi = max(kmin, self.kmin), min(kmax, self.kmax)
        if lo <= hi:
            out[lo - kmin:hi - kmin + 1] = self._c[lo - self.kmin:hi - self.kmin + 1]
        return LaurentMatrix(out, kmin)

    def outside_norm(self, kmin, kmax):
        """Largest coefficient norm (max abs entry) outside [kmin, kmax]."""
        worst = 0.0
        for i in range(self._c.shape[0]):
            k = self._kmin + i
            if k < kmin or k > kmax:
                worst = max(worst, float(np.abs(self._c[i]).max()))
        return worst

    def trimmed(self, tol=0.0):
        """Drop leading/trailing coefficients whose entries are all <= tol."""
        mags = np.abs(self._c).reshape(self._c.shape[0], -1).max(axis=1)
        nz = np.nonzero(mags > tol)[0]
        if nz.size == 0:
            return LaurentMatrix(np.zeros((1, self.dim, self.dim)), 0)
        return LaurentMatrix(self._c[nz[0]:nz[-1] + 1], self._kmin + nz[0])

    # arithmetic -----------------------------------------------------------
    def __call__(self, lam):
        return leval(self, lam)

    def __matmul__(self, other):
        if isinstance(other, LaurentMatrix):
            return lmul(self, other)
        m = np.asarray(other)
        return LaurentMatrix(self._c @ m, self._kmin)

    def __rmatmul__(self, other):
        m = np.asarray(other)
        return LaurentMatrix(m @ self._c, self._kmin)

    def _aligned(self, other):
        lo = min(self.kmin, other.kmin)
        hi = max(self.kmax, other.kmax)
        return self.window(lo, hi).array, other.window(lo, hi).array, lo

    def __add__(self, other):
        if not isinstance(other, LaurentMatrix):
            other = LaurentMatrix.constant(other)
        a, b, lo = self._aligned(other)
        return LaurentMatrix(a + b, lo)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, LaurentMatrix):
            other = LaurentMatrix.constant(other)
        a, b, lo = self._aligned(other)
        return LaurentMatrix(a - b, lo)

    def __rsub__(self, other):
        return LaurentMatrix.constant(other) - self

    def __neg__(self):
        return LaurentMatrix(-self._c, self._kmin)

    def __mul__(self, scalar):
        return LaurentMatrix(self._c * scalar, self._kmin)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return LaurentMatrix(self._c / scalar, self._kmin)

    # involutions ------------------------------------------------------------
    def star(self):
        """Pointwise conjugate transpose on the circle: sum_k A_k^* lam^(-k)."""
        c = np.conj(np.transpose(self._c, (0, 2, 1)))[::-1]
        return LaurentMatrix(c, -self.kmax)

    def transpose(self):
        return LaurentMatrix(np.transpose(self._c, (0, 2, 1)), self._kmin)

    def reflect(self):
        """The loop lam -> a(-lam)."""
        signs = (-1.0) ** np.arange(self._kmin, self.kmax + 1)
        return LaurentMatrix(self._c * signs[:, None, None], self._kmin)

    def conjugate_by(self, h, hinv=None):
        """Constant conjugation h a(lam) h^-1."""
        if hinv is None:
            hinv = np.linalg.inv(h)
        return LaurentMatrix(h @ self._c @ hinv, self._kmin)

    def sample(self, count, offset=0.0):
        """Values at ``circle_points(count, offset)``, shape (count, n, n)."""
        return leval(self, circle_points(count, offset))

    def max_abs(self):
        return float(np.abs(self._c).max())

    def distance(self, other):
        """Max abs coefficient difference (supports aligned)."""
        a, b, _ = self._aligned(other)
        return float(np.abs(a - b).max())

    def __repr__(self):
        return f"LaurentMatrix(dim={self.dim}, support={self.support})"


def lmul(a, b):
    """Cauchy product of two Laurent matrices."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    A, B = a.array, b.array
    out = np.zeros((A.shape[0] + B.shape[0] - 1, a.dim, a.dim), dtype=complex)
    # loop over the shorter factor; each step is a batched matmul
    if A.shape[0] <= B.shape[0]:
        for i in range(A.shape[0]):
            out[i:i + B.shape[0]] += A[i] @ B
    else:
        for j in range(B.shape[0]):
            out[j:j + A.shape[0]] += A @ B[j]
    return LaurentMatrix(out, a.kmin + b.kmin)


def leval(a, lam):
    """Evaluate at a nonzero scalar (returns (n, n)) or at an array of points."""
    lam = np.asarray(lam, dtype=complex)
    ks = np.arange(a.kmin, a.kmax + 1)
    if lam.ndim == 0:
        if lam == 0 and a.kmin < 0:
            raise ZeroDivisionError("evaluation of a negative power at lam = 0")
        w = lam ** ks
        return np.tensordot(w, a.array, axes=(0, 0))
    w = lam[..., None] ** ks
    return np.tensordot(w, a.array, axes=(-1, 0))


def _next_pow2(x):
    return 1 << max(0, int(np.ceil(np.log2(max(x, 1)))))


def linv_truncated(a, max_deg, tol=1e-10, samples=32):
    """Inverse loop truncated to exponents in [-max_deg, max_deg].

    The inverse is sampled on a circle grid whose size is the next power of
    two at least four times the requested degree span, then recovered by
    FFT.  The residual is measured on ``samples`` points rotated off that
    grid so aliasing cannot hide a truncation error.
    """
    span = 2 * max_deg + 1
    N = max(_next_pow2(4 * span), 8)
    vals = a.sample(N)
    dets = np.linalg.det(vals)
    scale = max(np.abs(vals).max(), 1.0) ** a.dim
    if np.min(np.abs(dets)) < 1e-13 * scale:
        raise SingularLoop("determinant vanishes on the unit circle")
    inv = LaurentMatrix.from_samples(np.linalg.inv(vals), -max_deg, max_deg)
    pts = circle_points(samples, offset=np.pi / (3 * samples))
    prod = np.matmul(a(pts), inv(pts))
    res = float(np.abs(prod - np.eye(a.dim)).max())
    if res > tol:
        raise TruncationOverflow(f"inverse residual {res:.3e} exceeds {tol:.1e} at degree {max_deg}")
    return inv


def lexp_nilpotent(x, max_terms=64, tol=1e-15):
    """exp of an algebra-valued Laurent loop whose powers eventually vanish.

    The series is summed until a term is below ``tol``; if that never
    happens within ``max_terms`` a TruncationOverflow is raised.
    """
    n = x.dim
    total = LaurentMatrix.identity(n)
    term = LaurentMatrix.identity(n)
    for k in range(1, max_terms + 1):
        term = lmul(term, x) / k
        if term.max_abs() <= tol:
            return total.trimmed(0.0)
        total = total + term
    raise TruncationOverflow("exponential series did not terminate")


def llog_unipotent(u, max_terms=64, tol=1e-15):
    """log of a loop of the form e + N with N nilpotent (terminating series)."""
    n = u.dim
    nil = u - LaurentMatrix.identity(n)
    total = LaurentMatrix(np.zeros((1, n, n)), 0)
    power = LaurentMatrix.identity(n)
    for k in range(1, max_terms + 1):
        power = lmul(power, nil)
        if power.max_abs() <= tol:
            return total.trimmed(0.0)
        total = total + power * ((-1) ** (k + 1) / k)
    raise TruncationOverflow("logarithm series did not terminate")


# ---------------------------------------------------------------------------
# rational functions in z


def _strip(c, tol=0.0):
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    nz = np.nonzero(np.abs(c) > tol)[0]
    if nz.size == 0:
        return np.zeros(1, dtype=complex)
    return c[: nz[-1] + 1].copy()


class RationalFn:
    """p(z)/q(z) with complex coefficients stored lowest degree first.

    Common roots of numerator and denominator are cancelled on construction
    (roots closer than ``cluster`` are identified), and the denominator is
    scaled monic.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1.0,), cluster=1e-9, reduce=True):
        num = _strip(num)
        den = _strip(den)
        if not np.any(den):
            raise ZeroDivisionError("denominator is identically zero")
        if reduce:
            num, den = _reduce(num, den, cluster)
        lead = den[-1]
        self.num = num / lead
        self.den = den / lead

    @classmethod
    def const(cls, c):
        return cls([c])

    @classmethod
    def poly(cls, coeffs):
        return cls(coeffs)

    @property
    def is_polynomial(self):
        return self.den.size == 1

    @property
    def is_zero(self):
        return not np.any(self.num)

    def __call__(self, z):
        return ratfn_eval(self, z)

    def poles(self, cluster=1e-9):
        return pole_set(self, cluster)

    def __add__(self, other):
        other = _as_rat(other)
        num = _padd(np.convolve(self.num, other.den), np.convolve(other.num, self.den))
        return RationalFn(num, np.convolve(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        return self + (-_as_rat(other))

    def __rsub__(self, other):
        return _as_rat(other) - self

    def __mul__(self, other):
        other = _as_rat(other)
        return RationalFn(np.convolve(self.num, other.num), np.convolve(self.den, other.den))

    __rmul__ = __mul__

    def __repr__(self):
        return f"RationalFn(num={self.num.tolist()}, den={self.den.tolist()})"


def _as_rat(x):
    return x if isinstance(x, RationalFn) else RationalFn.const(x)


def _padd(a, b):
    out = np.zeros(max(a.size, b.size), dtype=complex)
    out[: a.size] += a
    out[: b.size] += b
    return out


def _roots(c):
    # np.roots wants highest degree first
    c = _strip(c)
    if c.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(c[::-1])


def _reduce(num, den, cluster):
    if den.size == 1 or not np.any(num):
        if not np.any(num):
            return np.zeros(1, dtype=complex), np.ones(1, dtype=complex)
        return num, den
    rn = list(_roots(num))
    rd = list(_roots(den))
    common = []
    for r in rd:
        if not rn:
            break
        d = [abs(r - s) for s in rn]
        i = int(np.argmin(d))
        if d[i] < cluster * max(1.0, abs(r)):
            common.append(r)
            rn.pop(i)
    if not common:
        return num, den
    kept_d = list(rd)
    for r in common:
        kept_d.remove(r)
    num_new = num[-1] * np.poly(rn)[::-1] if rn else np.array([num[-1]])
    den_new = den[-1] * np.poly(kept_d)[::-1] if kept_d else np.array([den[-1]])
    return np.asarray(num_new, dtype=complex), np.asarray(den_new, dtype=complex)


def ratfn_eval(f, z, tol=1e-12):
    """Evaluate ``f`` at z (scalar or array); EvaluationAtPole near a pole."""
    z = np.asarray(z, dtype=complex)
    p = np.polynomial.polynomial.polyval(z, f.num)
    q = np.polynomial.polynomial.polyval(z, f.den)
    if np.any(np.abs(q) <= tol * np.maximum(1.0, np.abs(p))):
        raise EvaluationAtPole(f"denominator vanishes at z = {z}")
    out = p / q
    return complex(out) if out.ndim == 0 else out


def pole_set(f, cluster=1e-9):
    """Distinct denominator roots (clustered at ``cluster``)."""
    out = []
    for r in _roots(f.den):
        if all(abs(r - s) >= cluster * max(1.0, abs(r)) for s in out):
            out.append(complex(r))
    return sorted(out, key=lambda w: (w.real, w.imag))


class RationalMatrix:
    """Square matrix of RationalFn entries (missing entries are zero)."""

    def __init__(self, n, entries=None):
        self.n = int(n)
        self.entries = {}
        for (i, j), f in (entries or {}).items():
            f = f if isinstance(f, RationalFn) else RationalFn(f)
            if not f.is_zero:
                self.entries[(int(i), int(j))] = f

    @classmethod
    def from_poly_array(cls, coeffs):
        """From an array (deg+1, n, n) of matrix coefficients, lowest power first."""
        coeffs = np.asarray(coeffs, dtype=complex)
        n = coeffs.shape[1]
        ent = {}
        for i in range(n):
            for j in range(n):
                c = coeffs[:, i, j]
                if np.any(c):
                    ent[(i, j)] = RationalFn(c)
        return cls(n, ent)

    @classmethod
    def zero(cls, n):
        return cls(n, {})

    @property
    def is_polynomial(self):
        return all(f.is_polynomial for f in self.entries.values())

    @property
    def is_zero(self):
        return not self.entries

    def degree(self):
        return max((f.num.size - 1 for f in self.entries.values()), default=0)

    def poly_array(self):
        """Coefficient array (deg+1, n, n); only for polynomial entries."""
        if not self.is_polynomial:
            raise ValueError("matrix has non-polynomial entries")
        d = self.degree()
        out = np.zeros((d + 1, self.n, self.n), dtype=complex)
        for (i, j), f in self.entries.items():
            out[: f.num.size, i, j] = f.num / f.den[0]
        return out

    def poles(self, cluster=1e-9):
        out = []
        for f in self.entries.values():
            for r in f.poles(cluster):
                if all(abs(r - s) >= cluster * max(1.0, abs(r)) for s in out):
                    out.append(r)
        return sorted(out, key=lambda w: (w.real, w.imag))

    def __call__(self, z):
        M = np.zeros((self.n, self.n), dtype=complex)
        for (i, j), f in self.entries.items():
            M[i, j] = ratfn_eval(f, z)
        return M

    def scaled_entry(self, i, j, factor):
        """Copy with entry (i, j) multiplied by ``factor``."""
        ent = dict(self.entries)
        if (i, j) in ent:
            f = ent[(i, j)]
            ent[(i, j)] = RationalFn(f.num * factor, f.den, reduce=False)
        return RationalMatrix(self.n, ent)

    def __add__(self, other):
        ent = dict(self.entries)
        for key, f in other.entries.items():
            ent[key] = ent[key] + f if key in ent else f
        return RationalMatrix(self.n, ent)

    def __repr__(self):
        return f"RationalMatrix(n={self.n}, nonzero={len(self.entries)})"
