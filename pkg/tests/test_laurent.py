import numpy as np
import pytest
from hypothesis import given, strategies as st

from dpwloop.errors import EvaluationAtPole, SingularLoop
from dpwloop.laurent import (LaurentMatrix, RationalFn, RationalMatrix, circle_points,
                             leval, lexp_nilpotent, linv_truncated, llog_unipotent, lmul,
                             ratfn_eval)

seeds = st.integers(0, 2**31 - 1)


def rand_loop(rng, n=3, lo=-2, hi=2):
    a = rng.normal(size=(hi - lo + 1, n, n)) + 1j * rng.normal(size=(hi - lo + 1, n, n))
    return LaurentMatrix(a, lo)


@given(seeds, st.integers(-3, 1), st.integers(0, 3))
def test_product_matches_pointwise(seed, lo, span):
    rng = np.random.default_rng(seed)
    a = rand_loop(rng, 3, lo, lo + span)
    b = rand_loop(rng, 3, -1, 2)
    lam = circle_points(17, 0.2)
    assert np.allclose(lmul(a, b)(lam), a(lam) @ b(lam), atol=1e-12)
    assert np.allclose((a @ b)(lam), a(lam) @ b(lam), atol=1e-12)


@given(seeds)
def test_sum_difference_and_scaling(seed):
    rng = np.random.default_rng(seed)
    a, b = rand_loop(rng, 2, -1, 1), rand_loop(rng, 2, 0, 3)
    lam = circle_points(9)
    assert np.allclose((a + b)(lam), a(lam) + b(lam))
    assert np.allclose((a - b)(lam), a(lam) - b(lam))
    assert np.allclose((a * 2.5)(lam), 2.5 * a(lam))


def test_identity_constant_monomial():
    e = LaurentMatrix.identity(3)
    assert e.support == (0, 0)
    m = LaurentMatrix.monomial(np.eye(2), -2)
    assert m.support == (-2, -2)
    assert np.allclose(m(2.0), 0.25 * np.eye(2))


def test_ndarray_left_product():
    a = LaurentMatrix({-1: np.eye(2), 1: np.ones((2, 2))})
    M = np.array([[0, 1], [1, 0]], dtype=complex)
    out = M @ a
    assert isinstance(out, LaurentMatrix)
    assert np.allclose(out(0.5), M @ a(0.5))


def test_from_samples_roundtrip(rng):
    a = rand_loop(rng, 3, -2, 3)
    vals = a.sample(16)
    b = LaurentMatrix.from_samples(vals, -2, 3)
    assert a.distance(b) < 1e-13


def test_star_is_adjoint_on_circle(rng):
    a = rand_loop(rng)
    lam = circle_points(11, 0.3)
    assert np.allclose(a.star()(lam), np.conj(np.swapaxes(a(lam), -1, -2)))


def test_window_and_outside_norm():
    a = LaurentMatrix({-2: 1e-3 * np.eye(2), 0: np.eye(2), 1: np.eye(2)})
    assert a.outside_norm(-1, 1) == pytest.approx(1e-3)
    assert a.window(-1, 1).support == (-1, 1)
    assert a.window(-1, 1).trimmed(0).support == (0, 1)


def test_unipotent_inverse_is_exact():
    N = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=complex)
    g = LaurentMatrix({0: np.eye(3), -1: N})
    ginv = linv_truncated(g, 6)
    prod = lmul(g, ginv).trimmed(1e-13)
    assert prod.support == (0, 0)
    assert np.allclose(prod.coeff(0), np.eye(3))


def test_inverse_of_singular_loop_raises():
    g = LaurentMatrix({0: np.diag([1.0, 0.0])})
    with pytest.raises(SingularLoop):
        linv_truncated(g, 4)


@given(seeds)
def test_exp_log_roundtrip(seed):
    rng = np.random.default_rng(seed)
    N = np.triu(rng.normal(size=(4, 4)), 1)
    x = LaurentMatrix({-1: N, 0: np.zeros((4, 4))})
    u = lexp_nilpotent(x)
    back = llog_unipotent(u)
    assert back.distance(x) < 1e-12


def test_leval_scalar_and_array():
    a = LaurentMatrix({-1: np.eye(2), 2: 2 * np.eye(2)})
    assert np.allclose(leval(a, 1.0), 3 * np.eye(2))
    vals = leval(a, np.array([1.0, -1.0]))
    assert vals.shape == (2, 2, 2)
    assert np.allclose(vals[1], np.eye(2))


# rational functions


coef = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


@given(st.lists(coef, min_size=1, max_size=4), st.lists(coef, min_size=1, max_size=3))
def test_rational_arithmetic_matches_values(pa, pb):
    f = RationalFn(pa, [1.0, 0.5])
    g = RationalFn(pb)
    z = 0.37 - 0.21j
    assert abs((f + g)(z) - (f(z) + g(z))) < 1e-9
    assert abs((f * g)(z) - f(z) * g(z)) < 1e-9
    assert abs((f - g)(z) - (f(z) - g(z))) < 1e-9


def test_rational_poles_and_reduction():
    f = RationalFn([-1.0, 0.0, 1.0], [-1.0, 1.0])  # (z^2 - 1) / (z - 1) = z + 1
    assert f.is_polynomial
    assert np.allclose(f.num, [1.0, 1.0])
    g = RationalFn([1.0], [0.0, 1.0, -0.5])
    assert sorted(np.round(g.poles(), 12).tolist(), key=abs) == [0.0, 2.0]


def test_evaluation_at_pole():
    f = RationalFn([1.0], [-0.5, 1.0])
    with pytest.raises(EvaluationAtPole):
        ratfn_eval(f, 0.5)


def test_rational_matrix():
    M = RationalMatrix.from_poly_array(np.array([np.eye(2), np.ones((2, 2))]))
    assert M.is_polynomial
    assert M.degree() == 1
    assert np.allclose(M(2.0), np.eye(2) + 2 * np.ones((2, 2)))
    assert np.allclose(M.poly_array()[1], np.ones((2, 2)))
    S = M.scaled_entry(0, 1, 3.0)
    assert np.allclose(S(1.0)[0, 1], 3.0)
    assert RationalMatrix.zero(3).is_zero
