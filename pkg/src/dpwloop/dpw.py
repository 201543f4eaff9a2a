"""From normalized potentials to extended frames, harmonic maps and extended solutions.

A potential is a meromorphic one-form ``eta = sum_p lam^p M_p(z) dz`` whose
coefficients take values in the positive part of a grading.  The
meromorphic frame solves dF_- = F_- eta with F_-(z0) = e; because the
coefficients are nilpotent, F_- is a Laurent polynomial in lam.  Three
routes compute it:

* ``exact``: F_- = gamma_xi^-1 exp(C(z)) gamma_xi for a supplied C;
* ``poly``: iterated integrals of polynomial coefficients, exact in z;
* ``ode``: DOP853 integration of the lam-graded coefficients along a path.

Frames come from an Iwasawa split of F_- in the requested real form.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import solve_ivp

from .errors import (DPWError, FitDegreeExceeded, GradingViolation, ParityViolation,
                     PathThroughPole, SupportOverflow)
from .factor import birkhoff, iwasawa
from .laurent import (LaurentMatrix, RationalFn, RationalMatrix, circle_points,
                      lexp_nilpotent, lmul)
from .liectx import adjoint_loop, compact_dual, dual
from .roots import grading, gamma_xi_loop
from .errors import HalfIntegerConvention

__all__ = [
    "PotentialSpec",
    "Grid",
    "FrameField",
    "validate_potential",
    "solve_meromorphic_frame",
    "route_crosscheck",
    "mc_form_check",
    "build_frame",
    "cartan_embed",
    "extended_solution",
    "normalized_potential_of",
    "frame_context",
]


# ---------------------------------------------------------------------------
# potentials


@dataclass
class PotentialSpec:
    """eta = sum_p lam^p terms[p](z) dz with F_-(basepoint) = initial.

    ``closed_form`` optionally maps z to the Laurent loop C(z) (values in
    u0_xi, nonnegative lam powers) with exp(C) gamma-conjugated to F_-.
    """

    ctx: object
    terms: dict
    basepoint: complex = 0j
    ce: object = None
    mode: str = "normalized"
    closed_form: object = None
    initial: LaurentMatrix = None
    name: str = "potential"

    @classmethod
    def normalized(cls, ctx, eta, ce=None, basepoint=0j, closed_form=None, name="potential"):
        """The common case eta = lam^-1 eta(z) dz."""
        if not isinstance(eta, RationalMatrix):
            eta = RationalMatrix.from_poly_array(eta)
        return cls(ctx, {-1: eta}, complex(basepoint), ce, "normalized", closed_form, None, name)

    @classmethod
    def zero(cls, ctx, basepoint=0j):
        return cls(ctx, {-1: RationalMatrix.zero(ctx.n)}, complex(basepoint), None, "normalized")

    @property
    def n(self):
        return self.ctx.n

    @property
    def is_zero(self):
        return all(m.is_zero for m in self.terms.values())

    @property
    def is_polynomial(self):
        return all(m.is_polynomial for m in self.terms.values())

    def poles(self):
        out = []
        for m in self.terms.values():
            for r in m.poles():
                if all(abs(r - s) > 1e-9 for s in out):
                    out.append(r)
        return out

    def eta(self, z):
        """dict lam power -> coefficient matrix at z."""
        return {p: m(z) for p, m in self.terms.items()}

    def degree_bound(self):
        """Largest |lam power| that F_- can reach (vector representation)."""
        if self.ce is not None:
            return max(self.ce.vector_spread, 0)
        pmax = max(abs(p) for p in self.terms) if self.terms else 0
        return (self.n - 1) * pmax

    def window(self):
        """Support window [lo, hi] of F_- implied by the degree bound."""
        b = self.degree_bound()
        lo = -b if any(p < 0 for p in self.terms) else 0
        hi = b if any(p > 0 for p in self.terms) else 0
        return lo, hi

    def with_entry_scaled(self, power, i, j, factor):
        """Copy with one coefficient entry scaled (the closed form is dropped)."""
        terms = dict(self.terms)
        terms[power] = terms[power].scaled_entry(i, j, factor)
        return PotentialSpec(self.ctx, terms, self.basepoint, self.ce, self.mode, None,
                             self.initial, self.name + "*")


def _sample_points(p, count=7, radius=0.37):
    pts = p.basepoint + radius * np.exp(2j * np.pi * (np.arange(count) + 0.123) / count)
    poles = p.poles()
    return [z for z in pts if all(abs(z - w) > 1e-3 for w in poles)]


@dataclass
class PotentialReport:
    grading_residual: dict
    parity_residual: float
    nilpotency_index: int
    poles: list
    trivial: bool


def validate_potential(p, tol=1e-9):
    """Check grading membership, parity and nilpotency of the coefficients.

    In normalized mode only lam^-1 may occur and its values must lie in the
    odd positive grades.  In the extended-solution ladder the lam^j
    coefficient must lie in g^xi_{j+1}.
    """
    zs = _sample_points(p)
    if p.is_zero:
        return PotentialReport({}, 0.0, 1, [], True)
    if p.mode == "normalized" and set(p.terms) - {-1}:
        raise GradingViolation("normalized potentials only carry lam^-1")
    gres, par = {}, 0.0
    vals = []
    for power, M in sorted(p.terms.items()):
        worst = 0.0
        for z in zs:
            X = M(z)
            vals.append(X)
            scale = max(1.0, float(np.abs(X).max()))
            r = p.ctx.algebra_residual(X)
            if r > tol * scale:
                raise GradingViolation(f"coefficient of lam^{power} is not in the algebra ({r:.2e})")
            if p.ce is None:
                continue
            comps = p.ce.components(X)
            if p.mode == "normalized":
                bad = max((np.abs(c).max() for j, c in comps.items() if j <= 0), default=0.0)
                even = max((np.abs(c).max() for j, c in comps.items() if j > 0 and j % 2 == 0), default=0.0)
                par = max(par, float(even) / scale)
            else:
                want = power + 1
                bad = max((np.abs(c).max() for j, c in comps.items() if j != want), default=0.0)
            worst = max(worst, float(bad) / scale)
        gres[power] = worst
        if worst > tol:
            raise GradingViolation(f"coefficient of lam^{power} has a component in a forbidden grade ({worst:.2e})")
    if par > tol:
        raise ParityViolation(f"even-grade component of size {par:.2e} in a normalized potential")
    # nilpotency index from products of sampled values
    nil = _nilpotency_index(vals, p.n)
    return PotentialReport(gres, par, nil, p.poles(), False)


def _nilpotency_index(vals, n, tol=1e-10):
    rng = np.random.default_rng(7)
    scale = max(1.0, max(float(np.abs(v).max()) for v in vals))
    for m in range(1, n + 2):
        worst = 0.0
        for _ in range(8):
            prod = np.eye(n, dtype=complex)
            for _ in range(m):
                prod = prod @ vals[rng.integers(len(vals))] / scale
            worst = max(worst, float(np.abs(prod).max()))
        if worst < tol:
            return m
    raise GradingViolation("coefficients are not nilpotent")


# ---------------------------------------------------------------------------
# meromorphic frame


def _exact_route(p, z):
    C = p.closed_form(z)
    if not isinstance(C, LaurentMatrix):
        C = LaurentMatrix.constant(C)
    E = lexp_nilpotent(C)
    out = LaurentMatrix(np.zeros((1, p.n, p.n)), 0)
    for k, M in E.coeffs.items():
        piece = p.ce.conj_by_gamma(M)
        out = out + LaurentMatrix(piece.array, piece.kmin + k)
    return out


def _poly_route(p, z, max_levels):
    """Sum of iterated integrals; each level is a lam-Laurent dict of z-polynomials."""
    n = p.n
    z0 = p.basepoint
    eta = {q: m.poly_array() for q, m in p.terms.items() if not m.is_zero}
    # shift to w = z - z0 so integration constants vanish at the basepoint
    eta = {q: _shift_poly(a, z0) for q, a in eta.items()}
    w = z - z0
    level = {0: np.eye(n, dtype=complex)[None]}
    total = {0: np.eye(n, dtype=complex)}
    for ell in range(1, max_levels + 1):
        nxt = {}
        for k, F in level.items():
            for q, A in eta.items():
                prod = _polymat_mul(F, A)
                integ = _polymat_integrate(prod)
                key = k + q
                nxt[key] = _polymat_add(nxt.get(key), integ)
        nxt = {k: v for k, v in nxt.items() if np.abs(v).max() > 0}
        mag = max((np.abs(v).max() for v in nxt.values()), default=0.0)
        if not nxt or mag < 1e-300:
            break
        for k, v in nxt.items():
            val = np.tensordot(w ** np.arange(v.shape[0]), v, axes=(0, 0))
            total[k] = total.get(k, 0) + val
        level = nxt
        # stop once the contribution at z is negligible (non-nilpotent input)
        contrib = max(np.abs(np.tensordot(w ** np.arange(v.shape[0]), v, axes=(0, 0))).max()
                      for v in nxt.values())
        if ell > n + 2 and contrib < 1e-17:
            break
    return LaurentMatrix(total)


def _shift_poly(a, z0):
    """Coefficients of A(w + z0) in w, for a stacked polynomial (d+1, n, n)."""
    if z0 == 0:
        return a
    d = a.shape[0] - 1
    out = np.zeros_like(a)
    from math import comb
    for k in range(d + 1):
        for j in range(k + 1):
            out[j] += a[k] * comb(k, j) * z0 ** (k - j)
    return out


def _polymat_mul(a, b):
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1], b.shape[2]), dtype=complex)
    for i in range(a.shape[0]):
        out[i:i + b.shape[0]] += a[i] @ b
    return out


def _polymat_integrate(a):
    out = np.zeros((a.shape[0] + 1,) + a.shape[1:], dtype=complex)
    out[1:] = a / np.arange(1, a.shape[0] + 1)[:, None, None]
    return out


def _polymat_add(a, b):
    if a is None:
        return b
    if a.shape[0] < b.shape[0]:
        a, b = b, a
    out = a.copy()
    out[: b.shape[0]] += b
    return out


def _segment_clear(a, b, poles, delta):
    for w in poles:
        d = b - a
        t = np.clip(((w - a) * np.conj(d)).real / max(abs(d) ** 2, 1e-300), 0, 1)
        if abs(a + t * d - w) < delta:
            return False
    return True


def _plan_path(p, z):
    z0 = p.basepoint
    poles = p.poles()
    if any(abs(z - w) < 1e-10 for w in poles):
        raise PathThroughPole(f"target {z} is a pole")
    L = abs(z - z0)
    delta = max(1e-8, 1e-2 * L)
    if _segment_clear(z0, z, poles, delta):
        return [z0, z]
    mid = 0.5 * (z0 + z)
    normal = 1j * (z - z0) / max(L, 1e-300)
    for off in (0.5, -0.5, 1.0, -1.0, 2.0, -2.0):
        m = mid + off * L * normal
        if _segment_clear(z0, m, poles, delta) and _segment_clear(m, z, poles, delta):
            return [z0, m, z]
    raise PathThroughPole(f"no detour around the poles reaches {z}")


def _ode_route(p, z, lo, hi, rtol=1e-13, atol=1e-15):
    n = p.n
    path = _plan_path(p, z)
    m = hi - lo + 1
    y = np.zeros((m, n, n), dtype=complex)
    y[-lo] = np.eye(n)
    terms = sorted(p.terms.items())

    for a, b in zip(path[:-1], path[1:]):
        d = b - a

        def rhs(t, yflat, a=a, d=d):
            Y = yflat.reshape(m, n, n)
            zt = a + t * d
            out = np.zeros_like(Y)
            for q, M in terms:
                A = M(zt) * d
                # out[k] += Y[k - q] A
                if q >= 0:
                    out[q:] += Y[: m - q] @ A
                else:
                    out[: m + q] += Y[-q:] @ A
            return out.ravel()

        sol = solve_ivp(rhs, (0.0, 1.0), y.ravel(), method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise PathThroughPole(f"integration failed: {sol.message}")
        y = sol.y[:, -1].reshape(m, n, n)
    return LaurentMatrix(y, lo)


def solve_meromorphic_frame(p, z, method="auto", strict=True, tol=1e-11):
    """F_-(z) for the potential ``p`` with F_-(basepoint) = e (or ``p.initial``).

    ``strict`` enforces the nilpotent degree bound: coefficients beyond it
    larger than ``tol`` raise SupportOverflow.  With ``strict=False`` a
    non-nilpotent potential is accepted and its (entire) series truncated.
    """
    z = complex(z)
    n = p.n
    if method == "auto":
        if p.closed_form is not None and p.ce is not None:
            method = "exact"
        elif p.is_polynomial:
            method = "poly"
        else:
            method = "ode"
    lo, hi = p.window()
    if z == p.basepoint or p.is_zero:
        F = LaurentMatrix.identity(n)
    elif method == "exact":
        F = _exact_route(p, z)
    elif method == "poly":
        levels = p.degree_bound() + 1 if strict else 80
        F = _poly_route(p, z, max(levels, 1))
    elif method == "ode":
        if strict:
            F = _ode_route(p, z, lo - (1 if lo < 0 else 0), hi + (1 if hi > 0 else 0))
        else:
            F = _ode_route(p, z, 8 * lo, 8 * hi)
    else:
        raise ValueError(f"unknown method {method!r}")
    if strict:
        over = F.outside_norm(lo, hi)
        if over > tol:
            raise SupportOverflow(f"F_- has coefficients of size {over:.2e} outside [{lo}, {hi}]")
        F = F.window(lo, hi)
    F = F.trimmed(0.0)
    if p.initial is not None:
        F = lmul(p.initial, F)
    return F


def route_crosscheck(p, z):
    """Max coefficient difference between every available route at z."""
    routes = {}
    if p.closed_form is not None and p.ce is not None:
        routes["exact"] = solve_meromorphic_frame(p, z, "exact")
    if p.is_polynomial:
        routes["poly"] = solve_meromorphic_frame(p, z, "poly")
    routes["ode"] = solve_meromorphic_frame(p, z, "ode")
    names = sorted(routes)
    out = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            out[(a, b)] = routes[a].distance(routes[b])
    return out


def mc_form_check(C, zs, declared=None, spacing=1e-3):
    """Finite-difference Maurer-Cartan form of exp(C) against a declared lam-ladder.

    ``C`` maps z to a Laurent loop (or matrix) with nilpotent values;
    ``declared`` maps lam powers to callables z -> matrix.  Returns the max
    residual and, per sample point, the extracted ladder {power: matrix}.
    """
    def E(z):
        c = C(z)
        if not isinstance(c, LaurentMatrix):
            c = LaurentMatrix.constant(c)
        return lexp_nilpotent(c), lexp_nilpotent(-c)

    worst = 0.0
    extracted = []
    h = spacing
    for z in zs:
        e0, einv = E(z)
        # C is holomorphic: d/dz = d/dx, fourth order central stencil
        fp = [E(z + s * h)[0] for s in (-2, -1, 1, 2)]
        d = (fp[0] - fp[3] + 8 * (fp[2] - fp[1])) / (12 * h)
        form = lmul(einv, d).trimmed(1e-13)
        ladder = {k: v for k, v in form.coeffs.items() if np.abs(v).max() > 1e-9}
        extracted.append(ladder)
        if declared is not None:
            keys = set(ladder) | set(declared)
            for k in keys:
                want = declared[k](z) if k in declared else 0
                worst = max(worst, float(np.abs(form.coeff(k) - want).max()))
        else:
            worst = max(worst, 0.0)
    return worst, extracted


# ---------------------------------------------------------------------------
# grids and frame fields


@dataclass
class Grid:
    """Square lattice points z = center + spacing * (i + 1j * j)."""

    center: complex
    spacing: float
    index: np.ndarray  # (P, 2) ints

    @classmethod
    def disc(cls, center=0j, radius=1.0, spacing=0.05):
        m = int(np.floor(radius / spacing + 1e-9))
        ii, jj = np.meshgrid(np.arange(-m, m + 1), np.arange(-m, m + 1), indexing="ij")
        keep = (ii ** 2 + jj ** 2) * spacing ** 2 <= radius ** 2 * (1 + 1e-12)
        idx = np.stack([ii[keep], jj[keep]], axis=1)
        return cls(complex(center), float(spacing), idx)

    @classmethod
    def patch(cls, center, spacing, half=2):
        r = np.arange(-half, half + 1)
        ii, jj = np.meshgrid(r, r, indexing="ij")
        return cls(complex(center), float(spacing), np.stack([ii.ravel(), jj.ravel()], axis=1))

    @classmethod
    def patches(cls, centers, spacing, half=2, origin=0j):
        """Union of small square patches on one lattice (centers snapped to it)."""
        r = np.arange(-half, half + 1)
        ii, jj = np.meshgrid(r, r, indexing="ij")
        off = np.stack([ii.ravel(), jj.ravel()], axis=1)
        seen, rows = set(), []
        for c in centers:
            c = complex(c) - origin
            base = np.array([round(c.real / spacing), round(c.imag / spacing)])
            for o in off:
                key = tuple(int(v) for v in base + o)
                if key not in seen:
                    seen.add(key)
                    rows.append(key)
        return cls(complex(origin), float(spacing), np.array(rows, dtype=int))

    @classmethod
    def points_only(cls, zs):
        """Unstructured points (no differencing possible)."""
        zs = np.asarray(zs, dtype=complex)
        g = cls(0j, 1.0, np.zeros((zs.size, 2), dtype=int))
        g._points = zs
        return g

    @property
    def points(self):
        if getattr(self, "_points", None) is not None:
            return self._points
        return self.center + self.spacing * (self.index[:, 0] + 1j * self.index[:, 1])

    def __len__(self):
        return self.index.shape[0]

    def lookup(self):
        if getattr(self, "_points", None) is not None:
            return {}
        return {(int(a), int(b)): k for k, (a, b) in enumerate(self.index)}

    def neighbour(self, k, di, dj, table=None):
        table = table if table is not None else self.lookup()
        a, b = self.index[k]
        return table.get((int(a) + di, int(b) + dj))


@dataclass
class FrameField:
    grid: Grid
    ctx: object
    frames: list
    minus: list
    plus: list
    basepoint: complex
    basepoint_index: int = None
    failures: dict = field(default_factory=dict)
    which: str = "noncompact"

    @property
    def points(self):
        return self.grid.points

    def ok_indices(self):
        return [k for k, F in enumerate(self.frames) if F is not None]


def frame_context(p_ctx, which):
    """The real form used for the Iwasawa split."""
    if which == "compact":
        return p_ctx if p_ctx.is_compact else compact_dual(p_ctx)
    if which == "noncompact":
        return p_ctx if not p_ctx.is_compact else dual(p_ctx)
    raise ValueError(f"which must be 'compact' or 'noncompact', not {which!r}")


def build_frame(p, grid, which="noncompact", trunc=None, tol=1e-10, method="auto", strict=True):
    """Extended frames on ``grid``: F_- per point, then Iwasawa in the chosen real form."""
    ctx = frame_context(p.ctx, which)
    n = p.n
    frames, minus, plus = [], [], []
    failures = {}
    base = None
    for k, z in enumerate(grid.points):
        try:
            Fm = solve_meromorphic_frame(p, z, method=method, strict=strict)
            if abs(z - p.basepoint) < 1e-14 and p.initial is None:
                base = k
                F, Vp = LaurentMatrix.identity(n), LaurentMatrix.identity(n)
            else:
                res = iwasawa(Fm, ctx, trunc=trunc, tol=tol)
                F, Vp = res.unitary, res.plus
        except DPWError as exc:
            failures[k] = f"{type(exc).__name__}: {exc}"
            frames.append(None)
            minus.append(None)
            plus.append(None)
            continue
        frames.append(F)
        minus.append(Fm)
        plus.append(Vp)
    return FrameField(grid, ctx, frames, minus, plus, p.basepoint, base, failures, which)


# ---------------------------------------------------------------------------
# Cartan embedding and extended solutions


@dataclass
class CartanField:
    maps: list
    involution_residual: float
    basepoint_exact: bool
    h: np.ndarray


def cartan_embed(F, h=None, samples=64):
    """Per point the loop F h F^-1; records max |(F h F^-1)^2 - e| on the circle."""
    ctx = F.ctx
    h = ctx.h if h is None else np.asarray(h, dtype=complex)
    n = ctx.n
    lam = circle_points(samples, 0.05)
    maps, worst = [], 0.0
    for Fk in F.frames:
        if Fk is None:
            maps.append(None)
            continue
        G = lmul(Fk @ h, ctx.loop_inverse(Fk))
        vals = G(lam)
        worst = max(worst, float(np.abs(vals @ vals - np.eye(n)).max()))
        maps.append(G)
    exact = True
    if F.basepoint_index is not None:
        G0 = maps[F.basepoint_index]
        exact = G0 is not None and G0.support == (0, 0) and np.array_equal(G0.coeff(0), h)
    return CartanField(maps, worst, exact, h)


@dataclass
class ExtendedSolutionField:
    loops: list
    adjoint: bool
    phi_at_one: float
    t_residual: float
    xi: np.ndarray


def _gamma_for(xi, ctx):
    try:
        return gamma_xi_loop(xi), False
    except HalfIntegerConvention:
        return gamma_xi_loop(xi, ctx), True


def extended_solution(F, xi, samples=32):
    """Phi = gamma_xi(lam) F(lam) F(1)^-1 per point (Ad-image for half-integral xi)."""
    ctx = F.ctx
    gam, adjoint = _gamma_for(xi, ctx)
    lam = circle_points(samples, 0.21)
    loops, one, tres = [], 0.0, 0.0
    for Fk in F.frames:
        if Fk is None:
            loops.append(None)
            continue
        F1inv = ctx.group_inverse(Fk(1.0))
        based = Fk @ F1inv
        if adjoint:
            phi = lmul(gam, adjoint_loop(based, ctx))
            N = phi.dim
        else:
            phi = lmul(gam, based)
            N = ctx.n
        loops.append(phi)
        one = max(one, float(np.abs(phi(1.0) - np.eye(N)).max()))
        pm1inv = np.linalg.inv(phi(-1.0))
        tres = max(tres, float(np.abs(phi(-lam) @ pm1inv - phi(lam)).max()))
    return ExtendedSolutionField(loops, adjoint, one, tres, np.asarray(xi))


# ---------------------------------------------------------------------------
# recovering the normalized potential


def _fit_entry(zs, vals, z0, max_num=8, max_den=2, tol=1e-5):
    """Least-squares rational fit of samples; lowest degree that meets tol."""
    scale = max(1.0, float(np.abs(vals).max()))
    w = zs - z0
    if np.abs(vals).max() < tol * 1e-1:
        return RationalFn([0.0])
    for dq in range(0, max_den + 1):
        for dp in range(0, max_num + 1):
            if dp + dq + 1 > len(zs):
                break
            Vp = np.vander(w, dp + 1, increasing=True)
            if dq == 0:
                c = np.linalg.lstsq(Vp, vals, rcond=None)[0]
                num, den = c, np.array([1.0])
            else:
                # linearized fit p(w) - f q(w) = f with q monic-free constant term 1
                Vq = -vals[:, None] * np.vander(w, dq + 1, increasing=True)[:, 1:]
                A = np.hstack([Vp, Vq])
                c = np.linalg.lstsq(A, vals, rcond=None)[0]
                num, den = c[: dp + 1], np.concatenate([[1.0], c[dp + 1:]])
            fitted = P.polyval(w, num) / P.polyval(w, den)
            if np.abs(fitted - vals).max() < tol * scale:
                # back to powers of z
                return _unshift(RationalFn(num, den, reduce=False), z0)
    raise FitDegreeExceeded("no rational fit within the degree caps")


def _unshift(f, z0):
    """Given f in the variable w = z - z0, return it in z."""
    if z0 == 0:
        return f

    def conv(c):
        out = np.zeros(len(c), dtype=complex)
        for k, ck in enumerate(c):
            # (z - z0)^k
            out[: k + 1] += ck * P.polypow([-z0, 1.0], k)[: k + 1]
        return out

    return RationalFn(conv(f.num), conv(f.den), reduce=False)


def normalized_potential_of(F, ce=None, fit_tol=1e-5, max_num=8, max_den=2):
    """Birkhoff-split each frame, difference F_- in z and fit lam^-1 coefficients.

    Uses the fourth-order stencil along x (F_- is holomorphic) at points
    with two lattice neighbours on each side.
    """
    ctx = F.ctx
    n = ctx.n
    grid = F.grid
    table = grid.lookup()
    h = grid.spacing
    minus = []
    for Fk in F.frames:
        minus.append(None if Fk is None else birkhoff(Fk, ctx).minus)
    zs, samples = [], []
    for k in range(len(grid)):
        nb = [grid.neighbour(k, d, 0, table) for d in (-2, -1, 1, 2)]
        if minus[k] is None or any(i is None or minus[i] is None for i in nb):
            continue
        m = [minus[i] for i in nb]
        d = (m[0] - m[3] + (m[2] - m[1]) * 8) / (12 * h)
        eta = lmul(ctx.loop_inverse(minus[k]), d)
        zs.append(grid.points[k])
        samples.append(eta.coeff(-1))
    if not zs:
        if all(Fk is not None and Fk.support == (0, 0) for Fk in F.frames):
            return PotentialSpec.zero(ctx, F.basepoint)
        from .errors import GridTooCoarse
        raise GridTooCoarse("no point has two neighbours on each side along x")
    zs = np.array(zs)
    samples = np.array(samples)
    ent = {}
    for i in range(n):
        for j in range(n):
            f = _fit_entry(zs, samples[:, i, j], F.basepoint, max_num, max_den, fit_tol)
            if not f.is_zero:
                ent[(i, j)] = f
    eta = RationalMatrix(n, ent)
    return PotentialSpec(ctx, {-1: eta}, F.basepoint, ce, "normalized", None, None, "recovered")
