"""Construct-then-split helpers shared by the factor tests and the acceptance suite."""
import numpy as np
import scipy.linalg as sla

from dpwloop.roots import canonical_reduction

from dpwloop.factor import birkhoff, iwasawa, prq_split
from dpwloop.laurent import circle_points, lmul
from dpwloop.liectx import compact_dual, willmore_context
from dpwloop.randloops import (random_graded, random_minus, random_plus,
                               random_positive_constant, random_real_loop)
from dpwloop.willmore import example_canonical

LAM = circle_points(64, 0.0377)

_CACHE = {}


def setting():
    """(non-compact ctx, compact dual, canonical element) of the S^6 example."""
    if "s" not in _CACHE:
        G = willmore_context()
        _CACHE["s"] = (G, compact_dual(G), example_canonical(G))
    return _CACHE["s"]


def circle_err(a, b):
    return float(np.abs(a(LAM) - b(LAM)).max())


def birkhoff_trial(rng, ctx, ce):
    m = random_minus(ce, rng)
    p = random_plus(ce, rng)
    g = lmul(m, p)
    res = birkhoff(g, ctx)
    recon = circle_err(lmul(res.minus, res.plus), g)
    err = max(circle_err(res.minus, m), circle_err(res.plus, p))
    again = birkhoff(lmul(res.minus, res.plus), ctx)
    unique = max(circle_err(again.minus, res.minus), circle_err(again.plus, res.plus))
    return recon, err, unique


def iwasawa_trial(rng, ctx, ce):
    u = random_real_loop(ctx, rng, pairs=1)
    s = random_positive_constant(ctx, rng, 0.3)
    p = s @ random_plus(ce, rng, 0.4, constant=False)
    g = lmul(u, p)
    res = iwasawa(g, ctx)
    recon = circle_err(lmul(res.unitary, res.plus), g)
    err = max(circle_err(res.unitary, u), circle_err(res.plus, p))
    again = iwasawa(lmul(res.unitary, res.plus), ctx)
    unique = max(circle_err(again.unitary, res.unitary), circle_err(again.plus, res.plus))
    return recon, err, unique


def prq_trial(rng, ce):
    Xp = sum(random_graded(ce, j, rng, 0.6) for j in range(0, ce.height + 1))
    Xq = sum(random_graded(ce, -j, rng, 0.6) for j in range(1, ce.height + 1))
    R0, Q0 = sla.expm(Xp), sla.expm(Xq)
    V = R0 @ Q0
    R, Q = prq_split(V, ce)
    recon = float(np.abs(R @ Q - V).max())
    err = max(float(np.abs(R - R0).max()), float(np.abs(Q - Q0).max()))
    R2, Q2 = prq_split(R @ Q, ce)
    unique = max(float(np.abs(R2 - R).max()), float(np.abs(Q2 - Q).max()))
    return recon, err, unique


# ---------------------------------------------------------------------------
# grading laws (shared by test_roots and the acceptance suite)

def bracket_law_residual(ce):
    """max over basis pairs of |[X, Y] - (grade i+j part of [X, Y])|."""
    worst = 0.0
    items = sorted(ce.grading.items())
    for i, Bi in items:
        for j, Bj in items:
            for X in Bi:
                Z = X @ Bj - Bj @ X  # (m, n, n)
                for W in Z:
                    worst = max(worst, float(np.abs(W - ce.component(W, i + j)).max()))
    return worst


def lemma_xi_residual(cd, multiplicities):
    """Grade-0 and positive-part subspace distances between xi and xi_can."""
    from dpwloop.roots import grading, subspace_distance
    xi, can = canonical_reduction(cd, multiplicities)
    ge, gc = grading(xi, cd.ctx), grading(can, cd.ctx)
    n = cd.ctx.n
    d0 = subspace_distance(ge.grading[0], gc.grading[0], n)
    dpos = subspace_distance(ge.positive_basis(1), gc.positive_basis(1), n)
    return max(d0, dpos)


def pr_p_residual(ce):
    """Distance between pr ∩ p^C (with h = exp(pi xi)) and the odd positive grades."""
    from dpwloop.roots import subspace_distance, subspace_intersection
    ctx, n = ce.ctx, ce.ctx.n
    h = sla.expm(np.pi * ce.xi)
    hinv = np.linalg.inv(h)
    basis = ctx.complex_basis()
    # -1 eigenspace of Ad(h) on g^C
    minus = np.array([0.5 * (X - h @ X @ hinv) for X in basis])
    pr = ce.positive_basis(0)
    inter = subspace_intersection(pr, minus, n)
    odd = [b for j, b in ce.grading.items() if j > 0 and j % 2 == 1]
    odd = np.concatenate(odd) if odd else np.zeros((0, n, n), dtype=complex)
    return subspace_distance(inter, odd, n)
