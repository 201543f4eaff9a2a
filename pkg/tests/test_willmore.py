import numpy as np
import pytest
from hypothesis import given, strategies as st

from dpwloop.dpw import Grid, PotentialSpec, build_frame
from dpwloop.errors import BranchPoint, NoMatch
from dpwloop.laurent import LaurentMatrix
from dpwloop.willmore import (I13, J18, _block, classify_shape, closed_form_x,
                              compare_pipeline_vs_oracle, conformal_gauss_4plane, example_B1,
                              frame_plane, isotropy_check, lift, plane_projector)

H = 1e-3


def _ip7(a, b):
    return np.sum(a * b)


def _dz(f, z, h=H):
    # fourth order stencils along x and y, then d/dz = (d/dx - i d/dy) / 2
    dx = (f(z - 2 * h) - f(z + 2 * h) + 8 * (f(z + h) - f(z - h))) / (12 * h)
    dy = (f(z - 2j * h) - f(z + 2j * h) + 8 * (f(z + 1j * h) - f(z - 1j * h))) / (12 * h)
    return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)


def x_of(lam):
    return lambda w: closed_form_x(w, lam).x.astype(complex)


def test_basepoint_value():
    np.testing.assert_allclose(closed_form_x(0).x, np.eye(7)[0], atol=0)


def test_B_first_entry():
    B = example_B1()
    z = 0.3 - 0.7j
    assert abs((B[0] + z * B[1])[0, 0] - 1j * z) < 1e-15


@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.floats(0, 2 * np.pi))
def test_unit_norm(z, t):
    x = closed_form_x(z, np.exp(1j * t)).x
    assert abs(x @ x - 1) < 1e-12


def test_unit_norm_200_points(rng):
    zs = rng.uniform(-1, 1, 200) + 1j * rng.uniform(-1, 1, 200)
    lams = np.exp(2j * np.pi * rng.uniform(size=200))
    worst = max(abs(np.sum(closed_form_x(z, l).x ** 2) - 1) for z, l in zip(zs, lams))
    assert worst < 1e-12


@pytest.mark.parametrize("z", [0.2 + 0.1j, -0.5 + 0.6j, 0.9j, 0.7 - 0.7j])
def test_conformal_isotropic_immersion(z):
    f = x_of(1.0)
    xz, xzb = _dz(f, z)
    assert abs(_ip7(xz, xz)) < 1e-8
    assert _ip7(xz, xzb).real > 1e-3
    # second derivative by differencing the first
    g = lambda w: _dz(f, w, 2 * H)[0]
    xzz = _dz(g, z, 2 * H)[0]
    assert abs(_ip7(xzz, xzz)) < 1e-7


def test_round_sphere_has_constant_gauss_plane():
    def sphere(w):
        r2 = abs(w) ** 2
        out = np.zeros(7)
        out[:3] = [(1 - r2) / (1 + r2), 2 * w.real / (1 + r2), 2 * w.imag / (1 + r2)]
        return out

    _, P0 = conformal_gauss_4plane(sphere, 0.1 + 0.2j)
    for z in (-0.4 + 0.3j, 0.8j):
        _, P = conformal_gauss_4plane(sphere, z)
        assert np.linalg.norm(P - P0, 2) < 1e-6


def test_gauss_plane_is_lorentzian_4_plane():
    A, P = conformal_gauss_4plane(lambda w: closed_form_x(w).x, 0.3 + 0.4j)
    ev = np.linalg.eigvalsh(A.T @ J18 @ A)
    assert np.sum(ev < 0) == 1 and np.sum(ev > 0) == 3
    assert np.abs(P @ P - P).max() < 1e-8
    assert np.linalg.matrix_rank(P, 1e-8) == 4
    Y = lift(closed_form_x(0.3 + 0.4j).x)
    assert abs(Y @ J18 @ Y) < 1e-12


def test_branch_point():
    with pytest.raises(BranchPoint):
        conformal_gauss_4plane(lambda w: np.eye(7)[0], 0.2)


def test_basepoint_plane(willmore):
    _, Po = conformal_gauss_4plane(lambda w: closed_form_x(w).x, 0j)
    Pp = frame_plane(LaurentMatrix.identity(8), 1.0)
    assert np.linalg.norm(Pp - Po, 2) < 1e-8
    np.testing.assert_allclose(plane_projector(np.eye(8)[:, :4]), np.diag([1.0] * 4 + [0.0] * 4))


def test_pipeline_matches_oracle_at_sample_points(willmore):
    F = build_frame(willmore, Grid.points_only([1.0, 0.5 + 0.5j, -0.3 - 0.8j]), "noncompact")
    assert not F.failures
    worst, _ = compare_pipeline_vs_oracle(F)
    assert worst < 1e-5


def test_sensitivity_to_one_coefficient(willmore):
    ctx, ce = willmore.ctx, willmore.ce
    B = example_B1().copy()
    B[0, 0, 2] *= 1.01
    pot = PotentialSpec.normalized(ctx, np.array([_block(B[0]), _block(B[1])]), ce)
    pts = Grid.points_only([0.5, 1.0, 0.7j, -0.7 + 0.7j])
    strict = build_frame(pot, pts, "noncompact")
    assert len(strict.failures) == len(pts)
    assert all("SupportOverflow" in m for m in strict.failures.values())
    loose = build_frame(pot, pts, "noncompact", strict=False)
    worst, _ = compare_pipeline_vs_oracle(loose)
    assert worst > 1e-2


def test_shape_of_example():
    s = classify_shape(example_B1())
    assert s.pair_types == ["ii", "ii"]
    assert s.shape_index == 3 and s.m == 4


def test_shape_zero_block():
    s = classify_shape(np.zeros((1, 4, 4)))
    assert s.pair_types == ["i", "i"] and s.shape_index == 1


def test_shape_type_one_with_row_permutation(rng):
    a, b = rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2))
    col = lambda p, q: np.array([p, p, q, 1j * q])  # rows 1 = 2, row 4 = i row 3
    B = np.stack([np.stack([col(a[k, 0], b[k, 0]), col(a[k, 1], b[k, 1])], axis=1)
                  for k in range(2)])
    assert classify_shape(B).pair_types == ["i"]
    # swap rows 2 and 3 and flip the sign of row 4: still type (i)
    C = B[:, [0, 2, 1, 3], :] * np.array([1, 1, 1, -1])[None, :, None]
    s = classify_shape(C)
    assert s.pair_types == ["i"] and s.row_transform[0] != (0, 1, 2, 3)


def test_shape_generic_rejected(rng):
    with pytest.raises(NoMatch):
        classify_shape(rng.normal(size=(2, 4, 2)) + 1j * rng.normal(size=(2, 4, 2)))
    with pytest.raises(NoMatch):
        classify_shape(np.zeros((1, 4, 3)))


def test_isotropy_of_example_nested_form():
    from dpwloop.laurent import RationalFn
    B = example_B1()
    nested = [[RationalFn(B[:, r, c]) for c in range(4)] for r in range(4)]
    assert isotropy_check(nested) < 1e-14
    assert I13[0, 0] == -1
