import numpy as np
import pytest
import scipy.linalg as sla

from dpwloop.dpw import (Grid, PotentialSpec, build_frame, cartan_embed, mc_form_check,
                         normalized_potential_of, route_crosscheck, solve_meromorphic_frame,
                         validate_potential)
from dpwloop.errors import (GradingViolation, ParityViolation, PathThroughPole,
                            SupportOverflow)
from dpwloop.laurent import LaurentMatrix, RationalFn, RationalMatrix, circle_points
from dpwloop.liectx import special_unitary, willmore_context
from dpwloop.roots import cartan_data, enumerate_canonical
from dpwloop.willmore import _block, example_B1, example_canonical

LAM = circle_points(16, 0.3)


def su2_setting():
    ctx = special_unitary(2, h=[1, -1])
    ce = enumerate_canonical(cartan_data(ctx))[0]
    X = ce.grading[1][0]
    return ctx, ce, X / np.abs(X).max()


def test_validate_zero_and_willmore(willmore):
    assert validate_potential(PotentialSpec.zero(willmore_context())).trivial
    rep = validate_potential(willmore)
    assert rep.nilpotency_index <= 4
    assert max(rep.grading_residual.values()) < 1e-12
    assert rep.parity_residual < 1e-12
    assert rep.poles == []


def test_validate_rejects_bad_grades():
    ctx = willmore_context()
    ce = example_canonical(ctx)
    zero_grade = ce.grading[0][0]
    with pytest.raises(GradingViolation):
        validate_potential(PotentialSpec.normalized(ctx, zero_grade[None], ce))
    two = ce.grading[2][0]
    with pytest.raises(ParityViolation):
        validate_potential(PotentialSpec.normalized(ctx, two[None], ce))
    with pytest.raises(GradingViolation):
        validate_potential(PotentialSpec.normalized(ctx, np.eye(8)[None], ce))


def test_constant_nilpotent_potential():
    ctx = willmore_context()
    ce = example_canonical(ctx)
    A = _block(example_B1()[0])
    p = PotentialSpec.normalized(ctx, A[None], ce)
    z = 0.3 - 0.4j
    F = solve_meromorphic_frame(p, z)
    want = np.array([sla.expm(z * A / l) for l in LAM])
    assert np.abs(F(LAM) - want).max() < 1e-13
    # A squares to zero, so the frame is e + z lam^-1 A
    assert np.abs(A @ A).max() < 1e-15
    assert F.distance(LaurentMatrix({0: np.eye(8), -1: z * A})) < 1e-14


def test_zero_potential_frame():
    ctx = willmore_context()
    F = solve_meromorphic_frame(PotentialSpec.zero(ctx), 0.7j)
    assert F.distance(LaurentMatrix.identity(8)) == 0


def test_routes_agree(willmore):
    for z in (0.4 + 0.2j, -0.8 + 0.5j, 1.0):
        diffs = route_crosscheck(willmore, z)
        assert set(diffs) == {("exact", "ode"), ("exact", "poly"), ("ode", "poly")}
        assert max(diffs.values()) < 1e-11


def test_mc_form_of_closed_form(willmore):
    X = example_B1()
    declared = {-1: lambda z: _block(X[0] + z * X[1])}
    ce = willmore.ce
    # exp(gamma^-1 C gamma) has Maurer-Cartan form lam^-1 eta
    C = lambda z: ce.conj_by_gamma(willmore.closed_form(z).coeff(0))
    worst, ladders = mc_form_check(C, [0.2 + 0.1j, -0.5j], declared)
    assert worst < 1e-8
    assert set(ladders[0]) == {-1}


def test_pole_detour():
    ctx, ce, X = su2_setting()
    # eta = lam^-1 X / (z - 1/2): F_- = exp(lam^-1 log(1 - 2z) X) along the path
    f = RationalFn([1.0], [-0.5, 1.0])
    eta = RationalMatrix(2, {(i, j): RationalFn(X[i, j] * f.num, f.den)
                             for i in range(2) for j in range(2) if X[i, j] != 0})
    p = PotentialSpec(ctx, {-1: eta}, 0j, ce)
    F = solve_meromorphic_frame(p, 1.0 + 0j)
    errs = [np.abs(F(LAM) - np.array([sla.expm(L * X / l) for l in LAM])).max()
            for L in (1j * np.pi, -1j * np.pi)]
    assert min(errs) < 1e-9
    with pytest.raises(PathThroughPole):
        solve_meromorphic_frame(p, 0.5 + 0j)


def test_support_overflow():
    ctx, ce, _ = su2_setting()
    Y = np.array([[0, 1], [1, 0]], dtype=complex)
    p = PotentialSpec.normalized(ctx, Y[None], ce)
    with pytest.raises(SupportOverflow):
        solve_meromorphic_frame(p, 0.5)
    F = solve_meromorphic_frame(p, 0.5, strict=False)
    assert np.abs(F(LAM) - np.array([sla.expm(0.5 * Y / l) for l in LAM])).max() < 1e-12


def test_build_zero_potential():
    ctx = willmore_context()
    grid = Grid.disc(0j, 0.1, 0.05)
    for which in ("compact", "noncompact"):
        F = build_frame(PotentialSpec.zero(ctx), grid, which)
        assert not F.failures
        assert all(Fk.distance(LaurentMatrix.identity(8)) < 1e-14 for Fk in F.frames)
        cart = cartan_embed(F)
        assert cart.basepoint_exact
        assert all(np.abs(G.coeff(0) - ctx.h).max() < 1e-14 for G in cart.maps)
        assert cart.involution_residual < 1e-14


def test_build_small_grid_compact(willmore):
    F = build_frame(willmore, Grid.disc(0j, 0.2, 0.1), "compact")
    assert not F.failures
    assert F.basepoint_index is not None
    assert F.frames[F.basepoint_index].distance(LaurentMatrix.identity(8)) == 0
    cart = cartan_embed(F)
    assert cart.involution_residual < 1e-9 and cart.basepoint_exact


def test_recover_normalized_potential(willmore_patch_frames):
    rec = normalized_potential_of(willmore_patch_frames)
    X = example_B1()
    for z in (0.3 + 0.1j, -0.6j, 0.9):
        want = _block(X[0] + z * X[1])
        assert np.abs(rec.terms[-1](z) - want).max() < 1e-6
