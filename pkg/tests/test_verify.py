import numpy as np
import pytest

from dpwloop.dpw import (FrameField, Grid, PotentialSpec, build_frame, cartan_embed,
                         extended_solution)
from dpwloop.errors import GridTooCoarse
from dpwloop.laurent import LaurentMatrix
from dpwloop.liectx import willmore_context
from dpwloop.roots import gamma_xi_loop
from dpwloop.verify import (VerificationReport, extended_solution_laws, full_report,
                            harmonicity_residual, richardson_order, shifted_solution,
                            twisting_report, uniton_number)
from dpwloop.willmore import example_B1, isotropy_check, pairwise_conditions


@pytest.fixture(scope="module")
def willmore_phi(willmore_patch_frames, willmore):
    F = willmore_patch_frames
    return extended_solution(F, willmore.ce.xi), cartan_embed(F)


def test_report_rendering():
    rep = VerificationReport()
    rep.add("a", 1e-12, "z=0", 1e-9)
    rep.add("b", -3.0, None, 1.0)
    rep.values["n"] = 2
    lines = rep.kv_lines()
    assert "a.pass=true" in lines and "b.pass=false" in lines
    assert "b.residual=3" in lines
    assert lines[-1] == "all.pass=false"
    assert not rep.passed and rep["a"].passed
    assert "FAIL b" in rep.text()


def test_identity_field_is_harmonic():
    ctx = willmore_context()
    F = build_frame(PotentialSpec.zero(ctx), Grid.patch(0j, 0.01, half=3), "noncompact")
    rep = harmonicity_residual(F)
    assert rep.passed
    assert rep["harmonicity.flatness"].residual == 0
    assert twisting_report(F).passed


def test_willmore_harmonicity(willmore_patch_frames):
    rep = harmonicity_residual(willmore_patch_frames)
    assert rep["harmonicity.structure"].residual < 5e-6
    assert rep["harmonicity.flatness"].residual < 5e-6
    assert 1.9 < rep.values["harmonicity.observed_order"] < 2.1


def test_corrupted_frame_is_localized(willmore):
    grid = Grid.patch(0.3 + 0.2j, 1e-3, half=4)
    F = build_frame(willmore, grid, "noncompact")
    k = len(grid) // 2 + 1
    bad = F.frames[k]
    frames = list(F.frames)
    c = bad.array.copy()
    c[bad.kmax - bad.kmin, 0, 5] += 1e-4
    frames[k] = LaurentMatrix(c, bad.kmin)
    G = FrameField(grid, F.ctx, frames, F.minus, F.plus, F.basepoint, F.basepoint_index, {}, F.which)
    rep = harmonicity_residual(G)
    assert not rep.passed
    loc = rep["harmonicity.flatness"].location
    z = complex(loc.split("=")[1])
    assert abs(z - grid.points[k]) <= 2.1e-3 * np.sqrt(2)


def test_grid_too_coarse(willmore):
    F = build_frame(willmore, Grid.points_only([0.1, 0.2j]), "noncompact")
    with pytest.raises(GridTooCoarse):
        harmonicity_residual(F)
    F = build_frame(willmore, Grid.patch(0j, 0.01, half=1), "noncompact")
    with pytest.raises(GridTooCoarse):
        harmonicity_residual(F)


def test_richardson_decay(willmore):
    order, res = richardson_order(willmore, [0.4 + 0.4j], spacings=(0.02, 0.01))
    assert res[0] / res[1] >= 3.5
    assert abs(order - 2) < 0.1


def test_uniton_cases(willmore_phi, willmore):
    ctx = willmore_context()
    assert uniton_number(LaurentMatrix.identity(8), ctx) == 0
    assert uniton_number(gamma_xi_loop(willmore.ce.xi), ctx) == willmore.ce.height
    phi, _ = willmore_phi
    assert uniton_number(phi, ctx) == 2
    # invariance under a constant real change of frame basis at the base point
    K = LaurentMatrix.constant(ctx.h)
    assert uniton_number([K @ g for g in phi.loops if g is not None], ctx) == 2


def test_isotropy_and_pairs():
    B = example_B1()
    assert isotropy_check(B) < 1e-14
    P = pairwise_conditions(B)
    assert P.shape == (4, 4) and P.max() < 1e-14
    C = B.copy()
    C[0, 0, 0] += 0.01
    assert isotropy_check(C) > 1e-3


def test_extended_solution_laws(willmore_phi, willmore_patch_frames):
    phi, cart = willmore_phi
    F = willmore_patch_frames
    rep = extended_solution_laws(phi, cart, F.grid, F.ctx)
    assert rep.passed, rep.text()
    assert rep["extsol.phi_at_one"].residual < 1e-12
    assert rep["extsol.uhlenbeck_z"].residual < 5e-6
    assert any("-e" in n for n in rep.notes)


def test_shifted_solution(willmore_phi, willmore_patch_frames, willmore):
    phi, cart = willmore_phi
    F = willmore_patch_frames
    gam = gamma_xi_loop(willmore.ce.xi)  # based: gamma(1) = e
    new_phi, new_map = shifted_solution(phi, cart, gam, F.ctx)
    rep = extended_solution_laws(new_phi, new_map, F.grid, F.ctx)
    assert rep.passed, rep.text()


def test_full_report(willmore_patch_frames, willmore):
    rep = full_report(willmore_patch_frames, willmore.ce.xi)
    assert rep.passed, rep.text()
    assert rep.values["uniton_number"] == 2
