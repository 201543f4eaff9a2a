"""Residual checks for frame fields, extended solutions and potentials.

Every check returns nonnegative residuals collected in a VerificationReport;
a check passes when its residual is strictly below its tolerance.
Finite differences are second order central; ``richardson_order`` confirms
the decay rate on a pair of spacings.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dpw import FrameField, Grid, build_frame, cartan_embed, extended_solution
from .errors import GridTooCoarse
from .laurent import LaurentMatrix, circle_points, lmul
from .liectx import adjoint_loop, check_twisted, loop_real_residual
from .numfmt import fmt, fmt_complex
from .willmore import isotropy_check, pairwise_conditions  # noqa: F401  (re-exported)

__all__ = [
    "CheckResult",
    "VerificationReport",
    "harmonicity_residual",
    "richardson_order",
    "uniton_number",
    "isotropy_check",
    "pairwise_conditions",
    "extended_solution_laws",
    "shifted_solution",
    "twisting_report",
    "full_report",
]


@dataclass
class CheckResult:
    residual: float
    location: object
    tol: float

    @property
    def passed(self):
        return bool(self.residual < self.tol)


@dataclass
class VerificationReport:
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def add(self, name, residual, location, tol):
        self.checks[name] = CheckResult(float(abs(residual)), location, float(tol))
        return self.checks[name]

    def merge(self, other, prefix=""):
        for k, v in other.checks.items():
            self.checks[prefix + k] = v
        self.notes.extend(other.notes)
        self.values.update(other.values)
        return self

    @property
    def passed(self):
        return all(c.passed for c in self.checks.values())

    def __getitem__(self, name):
        return self.checks[name]

    def kv_lines(self):
        out = []
        for name in sorted(self.checks):
            c = self.checks[name]
            out.append(f"{name}.residual={fmt(c.residual)}")
            out.append(f"{name}.tol={fmt(c.tol)}")
            out.append(f"{name}.pass={'true' if c.passed else 'false'}")
        for name in sorted(self.values):
            v = self.values[name]
            out.append(f"{name}={fmt(v)}" if isinstance(v, float) else f"{name}={v}")
        out.append(f"all.pass={'true' if self.passed else 'false'}")
        return out

    def text(self):
        lines = []
        w = max((len(n) for n in self.checks), default=4)
        for name in sorted(self.checks):
            c = self.checks[name]
            loc = "" if c.location is None else f"  at {c.location}"
            mark = "ok  " if c.passed else "FAIL"
            lines.append(f"{mark} {name:<{w}}  {fmt(c.residual)} < {fmt(c.tol)}{loc}")
        lines.extend(f"{k}: {v}" for k, v in sorted(self.values.items()))
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def _loc(grid, k):
    if k is None:
        return None
    z = complex(grid.points[k])
    return f"z={fmt_complex(z)}"


# ---------------------------------------------------------------------------
# harmonicity


_AXES = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _alpha_at(F, k, table, step):
    """α_x, α_y at point k from central differences over ``step`` lattice units."""
    g = F.grid
    nb = [g.neighbour(k, step * di, step * dj, table) for di, dj in _AXES]
    if F.frames[k] is None or any(i is None or F.frames[i] is None for i in nb):
        return None
    h = g.spacing * step
    fx = (F.frames[nb[0]] - F.frames[nb[1]]) / (2 * h)
    fy = (F.frames[nb[2]] - F.frames[nb[3]]) / (2 * h)
    finv = F.ctx.loop_inverse(F.frames[k])
    return lmul(finv, fx), lmul(finv, fy)


def _flatness(F, table, lam, step, cache):
    """Per point the matrices ∂_x α_y − ∂_y α_x + [α_x, α_y] at the λ samples."""
    grid = F.grid
    h = grid.spacing * step

    def alpha(k):
        if (k, step) not in cache:
            cache[(k, step)] = _alpha_at(F, k, table, step)
        return cache[(k, step)]

    out = {}
    for k in F.ok_indices():
        a = alpha(k)
        if a is None:
            continue
        nb = [grid.neighbour(k, step * di, step * dj, table) for di, dj in _AXES]
        if any(i is None for i in nb):
            continue
        an = [alpha(i) for i in nb]
        if any(x is None for x in an):
            continue
        vx, vy = a[0](lam), a[1](lam)
        dyx = (an[0][1](lam) - an[1][1](lam)) / (2 * h)
        dxy = (an[2][0](lam) - an[3][0](lam)) / (2 * h)
        out[k] = dyx - dxy + vx @ vy - vy @ vx
    return out


def harmonicity_residual(F: FrameField, lam_samples=None, tol=5e-6):
    """λ-structure and flatness of α = F⁻¹dF at every interior point.

    structure: α_z may only carry λ^-1 (in p) and λ^0 (in k), α_zbar only
    λ^0 (in k) and λ^1 (in p).  flatness: ∂_x α_y − ∂_y α_x + [α_x, α_y] = 0
    at each λ sample.  The second-order flatness residual is computed at the
    grid spacing h and, where the lattice allows, at 2h; the reported check
    is the Richardson combination (4 R_h − R_2h) / 3, with the raw value and
    the observed order kept alongside.
    """
    ctx = F.ctx
    grid = F.grid
    if getattr(grid, "_points", None) is not None:
        raise GridTooCoarse("unstructured points cannot be differenced")
    lam = np.asarray(lam_samples if lam_samples is not None else circle_points(6, 0.3))
    table = grid.lookup()
    cache = {}
    s_worst, s_loc, seen = 0.0, None, False
    for k in F.ok_indices():
        a = _alpha_at(F, k, table, 1)
        cache[(k, 1)] = a
        if a is None:
            continue
        seen = True
        ax, ay = a
        A = (ax - ay * 1j) * 0.5
        B = (ax + ay * 1j) * 0.5
        bad = 0.0
        for loop, allowed in ((A, {-1: "p", 0: "k"}), (B, {0: "k", 1: "p"})):
            for power, M in loop.coeffs.items():
                if power not in allowed:
                    bad = max(bad, float(np.abs(M).max()))
                    continue
                sM = ctx.sigma(M)
                part = M - sM if allowed[power] == "k" else M + sM
                bad = max(bad, 0.5 * float(np.abs(part).max()))
        if bad > s_worst:
            s_worst, s_loc = bad, k
    if not seen:
        raise GridTooCoarse("no point has all four lattice neighbours")
    r1 = _flatness(F, table, lam, 1, cache)
    if not r1:
        raise GridTooCoarse("flatness needs second neighbours")
    r2 = _flatness(F, table, lam, 2, cache)
    raw = max(((float(np.abs(v).max()), k) for k, v in r1.items()), key=lambda t: t[0])
    rep = VerificationReport()
    rep.add("harmonicity.structure", s_worst, _loc(grid, s_loc), tol)
    rep.values["harmonicity.flatness_raw"] = raw[0]
    common = [k for k in r1 if k in r2]
    if common:
        ex = max(((float(np.abs((4 * r1[k] - r2[k]) / 3).max()), k) for k in common),
                 key=lambda t: t[0])
        coarse = max(float(np.abs(r2[k]).max()) for k in common)
        fine = max(float(np.abs(r1[k]).max()) for k in common)
        rep.add("harmonicity.flatness", ex[0], _loc(grid, ex[1]), tol)
        if fine > 0 and coarse > 0:
            rep.values["harmonicity.observed_order"] = float(np.log2(coarse / fine))
    else:
        rep.add("harmonicity.flatness", raw[0], _loc(grid, raw[1]), tol)
        rep.notes.append("flatness not extrapolated: no point has neighbours at 2h")
    rep.notes.append("fullness of the harmonic map is assumed, not checked")
    return rep


def richardson_order(p, centers, which="noncompact", spacings=(0.02, 0.01), lam_samples=None):
    """Observed convergence order of the flatness residual between two spacings.

    Returns (order, residuals).  Large spacings keep the truncation error
    well above rounding so the ratio is meaningful.
    """
    res = []
    for h in spacings:
        F = build_frame(p, Grid.patches(centers, h, half=2), which)
        res.append(harmonicity_residual(F, lam_samples).values["harmonicity.flatness_raw"])
    order = float(np.log(res[0] / res[1]) / np.log(spacings[0] / spacings[1]))
    return order, res


# ---------------------------------------------------------------------------
# uniton number


def uniton_number(phi, ctx, tol=1e-9):
    """Smallest k with the adjoint Fourier support of every loop inside [-k, k].

    ``phi`` is a loop, a list of loops, or an ExtendedSolutionField.  Loops
    of size ctx.n are mapped through Ad first; larger ones are taken to be
    adjoint already.
    """
    if hasattr(phi, "loops"):
        loops = phi.loops
    elif isinstance(phi, LaurentMatrix):
        loops = [phi]
    else:
        loops = list(phi)
    k = 0
    for g in loops:
        if g is None:
            continue
        ad = adjoint_loop(g, ctx) if g.dim == ctx.n else g
        for power, M in ad.coeffs.items():
            if np.abs(M).max() >= tol:
                k = max(k, abs(power))
    return k


# ---------------------------------------------------------------------------
# extended solution laws


def _ad_const(M, ctx):
    return adjoint_loop(LaurentMatrix.constant(M), ctx).coeff(0)


def extended_solution_laws(phi, harmonic, grid: Grid, ctx, lam_samples=None, tol=5e-6,
                           one_tol=1e-12):
    """Evaluation laws and the Uhlenbeck pair for Φ against the harmonic map 𝔽.

    ``harmonic`` lists per point the matrix 𝔽(z) (a CartanField is evaluated
    at λ = 1).  Checks Φ(1) = e, Φ(−1) = c 𝔽 with one constant c = ±e, and
    ∂_zΦ = (1 − λ⁻¹) Φ 𝔸' and ∂_zbar Φ = (1 − λ) Φ 𝔸'' with 𝔸 = ½ 𝔽⁻¹ d𝔽.
    """
    loops = phi.loops if hasattr(phi, "loops") else list(phi)
    if hasattr(harmonic, "maps"):
        maps = [None if m is None else m(1.0) for m in harmonic.maps]
    else:
        maps = [None if m is None else np.asarray(m) for m in harmonic]
    lam = np.asarray(lam_samples if lam_samples is not None else circle_points(6, 0.17))
    adjoint = any(g is not None and g.dim != ctx.n for g in loops)
    rep_map = (lambda M: _ad_const(M, ctx)) if adjoint else (lambda M: M)
    FF = [None if m is None else rep_map(m) for m in maps]
    rep = VerificationReport()
    ok = [k for k in range(len(loops)) if loops[k] is not None and FF[k] is not None]
    if not ok:
        raise GridTooCoarse("no valid points")
    N = FF[ok[0]].shape[0]
    eye = np.eye(N)

    one = [(float(np.abs(loops[k](1.0) - eye).max()), k) for k in ok]
    r1, k1 = max(one)
    rep.add("extsol.phi_at_one", r1, _loc(grid, k1), one_tol)

    c = loops[ok[0]](-1.0) @ np.linalg.inv(FF[ok[0]])
    sign = 1.0 if np.abs(c - eye).max() <= np.abs(c + eye).max() else -1.0
    m1 = [(float(np.abs(loops[k](-1.0) - sign * FF[k]).max()), k) for k in ok]
    r2, k2 = max(m1)
    rep.add("extsol.phi_at_minus_one", r2, _loc(grid, k2), 1e-9)
    rep.notes.append(f"phi(-1) = {'+' if sign > 0 else '-'}e * harmonic map")

    table = grid.lookup()
    have = set(ok)

    def uhlenbeck(step):
        h = grid.spacing * step
        out = {}
        for k in ok:
            nb = [grid.neighbour(k, step * di, step * dj, table) for di, dj in _AXES]
            if any(i is None or i not in have for i in nb):
                continue
            Px = (loops[nb[0]](lam) - loops[nb[1]](lam)) / (2 * h)
            Py = (loops[nb[2]](lam) - loops[nb[3]](lam)) / (2 * h)
            Fx = (FF[nb[0]] - FF[nb[1]]) / (2 * h)
            Fy = (FF[nb[2]] - FF[nb[3]]) / (2 * h)
            Finv = np.linalg.inv(FF[k])
            A10 = 0.25 * Finv @ (Fx - 1j * Fy)
            A01 = 0.25 * Finv @ (Fx + 1j * Fy)
            Pk = loops[k](lam)
            rz = 0.5 * (Px - 1j * Py) - (1 - 1 / lam)[:, None, None] * (Pk @ A10)
            rzb = 0.5 * (Px + 1j * Py) - (1 - lam)[:, None, None] * (Pk @ A01)
            out[k] = (rz, rzb)
        return out

    u1 = uhlenbeck(1)
    if not u1:
        raise GridTooCoarse("the Uhlenbeck check needs lattice neighbours")
    u2 = uhlenbeck(2)
    for part, name in ((0, "extsol.uhlenbeck_z"), (1, "extsol.uhlenbeck_zbar")):
        raw = max(((float(np.abs(v[part]).max()), k) for k, v in u1.items()), key=lambda t: t[0])
        rep.values[name + "_raw"] = raw[0]
        common = [k for k in u1 if k in u2]
        if common:
            ex = max(((float(np.abs((4 * u1[k][part] - u2[k][part]) / 3).max()), k) for k in common),
                     key=lambda t: t[0])
            rep.add(name, ex[0], _loc(grid, ex[1]), tol)
        else:
            rep.add(name, raw[0], _loc(grid, raw[1]), tol)
    if hasattr(phi, "t_residual"):
        rep.add("extsol.t_invariance", phi.t_residual, None, 1e-9)
    return rep


def shifted_solution(phi, harmonic, gamma, ctx):
    """(γΦ, γ(−1)𝔽) for a based loop γ; the pair is again an extended solution."""
    loops = phi.loops if hasattr(phi, "loops") else list(phi)
    if hasattr(harmonic, "maps"):
        maps = [None if m is None else m(1.0) for m in harmonic.maps]
    else:
        maps = list(harmonic)
    g1 = gamma(-1.0)
    if loops and loops[0] is not None and loops[0].dim != gamma.dim:
        gamma = adjoint_loop(gamma, ctx)
    new_phi = [None if g is None else lmul(gamma, g) for g in loops]
    new_map = [None if m is None else g1 @ m for m in maps]
    return new_phi, new_map


# ---------------------------------------------------------------------------
# twisting, reality, reports


def twisting_report(F: FrameField, tol=1e-9, samples=64):
    rep = VerificationReport()
    tw, rl = (0.0, None), (0.0, None)
    for k in F.ok_indices():
        a = check_twisted(F.frames[k], F.ctx, samples)
        b = loop_real_residual(F.frames[k], F.ctx, samples)
        tw = max(tw, (a, k), key=lambda t: t[0])
        rl = max(rl, (b, k), key=lambda t: t[0])
    rep.add("frame.twisting", tw[0], _loc(F.grid, tw[1]), tol)
    rep.add("frame.reality", rl[0], _loc(F.grid, rl[1]), tol)
    if F.basepoint_index is not None:
        F0 = F.frames[F.basepoint_index]
        exact = F0.support == (0, 0) and np.array_equal(F0.coeff(0), np.eye(F.ctx.n))
        rep.add("frame.basepoint_identity", 0.0 if exact else 1.0, _loc(F.grid, F.basepoint_index), 0.5)
    return rep


def full_report(F: FrameField, xi=None, lam_samples=None, tol=5e-6):
    """Twisting, harmonicity, Cartan involution and (given xi) extended-solution checks."""
    rep = twisting_report(F)
    if F.failures:
        rep.notes.append(f"{len(F.failures)} grid points failed and were skipped")
    try:
        rep.merge(harmonicity_residual(F, lam_samples, tol))
    except GridTooCoarse as exc:
        rep.notes.append(f"harmonicity skipped: {exc}")
    cart = cartan_embed(F)
    rep.add("cartan.involution", cart.involution_residual, None, 1e-9)
    rep.add("cartan.basepoint_h", 0.0 if cart.basepoint_exact else 1.0, None, 0.5)
    if xi is not None:
        phi = extended_solution(F, xi)
        try:
            rep.merge(extended_solution_laws(phi, cart, F.grid, F.ctx, lam_samples, tol))
        except GridTooCoarse as exc:
            rep.notes.append(f"extended-solution laws skipped: {exc}")
        rep.values["uniton_number"] = uniton_number(phi, F.ctx)
    return rep
