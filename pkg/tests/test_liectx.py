import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from dpwloop.errors import AlreadyCompact, NotInAlgebra
from dpwloop.laurent import LaurentMatrix, lexp_nilpotent
from dpwloop.liectx import (check_twisted, compact_dual, dual, in_group, lorentz, orthogonal,
                            project_kp, special_unitary, willmore_context)
from dpwloop.randloops import random_algebra, random_real_k
from dpwloop.roots import cartan_data, enumerate_canonical, gamma_xi_loop


def test_willmore_context_shape():
    ctx = willmore_context()
    assert ctx.n == 8 and ctx.family == "so"
    assert not ctx.is_compact
    np.testing.assert_array_equal(ctx.sdiag, [-1] * 4 + [1] * 4)
    assert ctx.complex_basis().shape[0] == 28


def test_basis_dimensions():
    assert orthogonal(5).complex_basis().shape[0] == 10
    assert special_unitary(3).complex_basis().shape[0] == 8
    assert len(lorentz(4).real_basis()) == 6


def test_compact_dual_keeps_complexification():
    G = willmore_context()
    U = compact_dual(G)
    assert U.is_compact
    np.testing.assert_array_equal(U.jdiag, G.jdiag)
    np.testing.assert_array_equal(U.sdiag, G.sdiag)
    assert dual(U) == G
    assert dual(dual(G)) == G
    with pytest.raises(AlreadyCompact):
        compact_dual(U)
    with pytest.raises(AlreadyCompact):
        dual(orthogonal(4))


def test_compact_dual_real_form():
    G = willmore_context()
    U = compact_dual(G)
    kG, pG = G.kp_real_bases()
    kU, pU = U.kp_real_bases()
    assert (len(kU), len(pU)) == (len(kG), len(pG)) == (12, 16)
    for X in U.real_basis():
        assert np.abs(X + np.conj(X.T)).max() < 1e-12
    # P so(8) P^-1 with P = diag(sqrt(j)) lands in the complex algebra of G
    P = np.diag(np.sqrt(G.jdiag.astype(complex)))
    Y = orthogonal(8).real_basis()[3]
    assert G.algebra_residual(P @ Y @ np.linalg.inv(P)) < 1e-14


def test_project_kp(rng):
    ctx = willmore_context()
    k, p = ctx.kp_real_bases()
    assert np.abs(project_kp(k[0], ctx)[1]).max() < 1e-15
    assert np.abs(project_kp(p[0], ctx)[0]).max() < 1e-15
    X = random_algebra(ctx, rng)
    Xk, Xp = project_kp(X, ctx)
    assert np.abs(ctx.sigma(Xk) - Xk).max() < 1e-14
    assert np.abs(ctx.sigma(Xp) + Xp).max() < 1e-14
    assert np.abs(Xk + Xp - X).max() < 1e-14
    with pytest.raises(NotInAlgebra):
        project_kp(np.eye(8), ctx)


def test_in_group_basics(rng):
    ctx = willmore_context()
    assert in_group(np.eye(8), ctx).max() == 0
    D = ctx.h
    r = in_group(D, ctx)
    assert r.form == 0 and r.det == 0
    Y = ctx.real_part(random_algebra(ctx, rng))
    assert in_group(sla.expm(Y), ctx).ok(1e-10)


def test_group_inverse_and_loop_inverse(rng):
    ctx = willmore_context()
    M = sla.expm(random_algebra(ctx, rng, 0.5))
    assert np.abs(ctx.group_inverse(M) @ M - np.eye(8)).max() < 1e-12
    su = special_unitary(3)
    Msu = sla.expm(random_algebra(su, rng, 0.5))
    assert np.abs(su.group_inverse(Msu) @ Msu - np.eye(3)).max() < 1e-12
    # unipotent SL loop: inverse by truncated FFT
    N = np.zeros((3, 3), dtype=complex)
    N[0, 1] = N[1, 2] = 1
    g = LaurentMatrix({0: np.eye(3), -1: N})
    gi = su.loop_inverse(g)
    assert (g @ gi).distance(LaurentMatrix.identity(3)) < 1e-12


def test_check_twisted_cases(rng):
    ctx = willmore_context()
    K = sla.expm(random_real_k(ctx, rng))
    assert check_twisted(LaurentMatrix.constant(K), ctx) < 1e-13
    _, p = ctx.kp_real_bases()
    assert check_twisted(LaurentMatrix({-1: p[0]}), ctx) == 0
    # the exponentiated odd loop is twisted as a group loop as well
    assert check_twisted(lexp_nilpotent(LaurentMatrix({-1: _nilpotent_p(ctx)})), ctx) < 1e-13
    # an odd element placed at an even power is not
    assert check_twisted(LaurentMatrix({0: p[0]}), ctx) > 0.1


def _nilpotent_p(ctx):
    from dpwloop.willmore import example_B1, _block
    return _block(example_B1()[0])


def test_gamma_xi_half_turn():
    ctx = willmore_context()
    cd = cartan_data(ctx)
    ce = [c for c in enumerate_canonical(cd) if c.index_set == (2,)][0]
    gam = gamma_xi_loop(ce.xi)
    lam = np.exp(1j * np.linspace(0.1, 6, 7))
    E = sla.expm(np.pi * ce.xi)
    # gamma(-lam) = gamma(lam) exp(pi xi), and exp(pi xi) = -D
    assert np.abs(gam(-lam) - gam(lam) @ E).max() < 1e-13
    assert np.abs(E + ctx.h).max() < 1e-13
    # the twisting law for gamma holds only up to this half-turn factor
    assert check_twisted(gam, ctx) > 1.0


@given(st.integers(0, 2 ** 32 - 1))
def test_sigma_is_involutive(seed):
    ctx = willmore_context()
    X = random_algebra(ctx, np.random.default_rng(seed))
    assert np.abs(ctx.sigma(ctx.sigma(X)) - X).max() < 1e-14
