import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from _support import birkhoff_trial, circle_err, iwasawa_trial, prq_trial, setting
from dpwloop.errors import IwasawaCellBoundary, NonGenericCell, OutsideBigCell
from dpwloop.factor import birkhoff, iwasawa, prq_split
from dpwloop.laurent import LaurentMatrix, lmul
from dpwloop.liectx import loop_real_residual, special_unitary
from dpwloop.randloops import random_algebra, random_minus, random_plus, random_real_k

TOL = 1e-9


def test_birkhoff_trivial():
    e = LaurentMatrix.identity(8)
    G, U, ce = setting()
    r = birkhoff(e, G)
    assert r.minus.distance(e) == 0 and r.plus.distance(e) == 0


def test_birkhoff_pure_minus_and_plus(rng):
    G, _, ce = setting()
    m = random_minus(ce, rng)
    p = random_plus(ce, rng)
    assert circle_err(birkhoff(m, G).minus, m) < TOL
    assert circle_err(birkhoff(p, G).plus, p) < TOL


def test_birkhoff_outside_big_cell():
    g = LaurentMatrix({1: np.diag([1.0, 0.0]), -1: np.diag([0.0, 1.0])})
    with pytest.raises(OutsideBigCell):
        birkhoff(g, special_unitary(2))


def test_birkhoff_context_independent(rng):
    G, U, ce = setting()
    g = lmul(random_minus(ce, rng), random_plus(ce, rng))
    a, b = birkhoff(g, G), birkhoff(g, U)
    assert circle_err(a.minus, b.minus) < 1e-12
    c = birkhoff(g)  # no context: FFT inverse of the minus factor
    assert circle_err(a.minus, c.minus) < 1e-10


@given(st.integers(0, 2 ** 32 - 1))
def test_birkhoff_roundtrip(seed):
    G, _, ce = setting()
    assert max(birkhoff_trial(np.random.default_rng(seed), G, ce)) < TOL


@given(st.integers(0, 2 ** 32 - 1))
def test_iwasawa_compact_roundtrip(seed):
    _, U, ce = setting()
    assert max(iwasawa_trial(np.random.default_rng(seed), U, ce)) < TOL


@given(st.integers(0, 2 ** 32 - 1))
def test_iwasawa_noncompact_roundtrip(seed):
    G, _, ce = setting()
    assert max(iwasawa_trial(np.random.default_rng(seed), G, ce)) < TOL


def test_iwasawa_constant_compact(rng):
    _, U, _ = setting()
    Y = U.real_part(random_algebra(U, rng, 0.3))
    P = sla.expm(1j * Y)  # Hermitian positive, in the complexified group
    r = iwasawa(LaurentMatrix.constant(P), U)
    assert circle_err(r.unitary, LaurentMatrix.identity(8)) < 1e-12
    assert circle_err(r.plus, LaurentMatrix.constant(P)) < 1e-12


def test_iwasawa_constant_noncompact(rng):
    G, _, _ = setting()
    k = sla.expm(random_real_k(G, rng))
    r = iwasawa(LaurentMatrix.constant(k), G)
    assert circle_err(r.unitary, LaurentMatrix.constant(k)) < 1e-12
    assert loop_real_residual(r.unitary, G) < 1e-12


def test_iwasawa_noncompact_boundary():
    # the Weyl element swaps the timelike and spacelike lines of SU(1,1),
    # so it cannot be a real element times a positive one
    su11 = special_unitary(2, signature=(1, None))
    w = np.array([[0, 1], [-1, 0]], dtype=complex)
    with pytest.raises(IwasawaCellBoundary):
        iwasawa(LaurentMatrix.constant(w), su11)


@given(st.integers(0, 2 ** 32 - 1))
def test_prq_roundtrip(seed):
    _, _, ce = setting()
    assert max(prq_trial(np.random.default_rng(seed), ce)) < TOL


def test_prq_trivial_and_nongeneric():
    _, _, ce = setting()
    R, Q = prq_split(np.eye(8), ce)
    assert np.abs(R - np.eye(8)).max() < 1e-14 and np.abs(Q - np.eye(8)).max() < 1e-14
    # a Weyl element swapping the top and bottom grade lines is off the open cell
    from dpwloop.factor import _graded_basis
    S, sizes = _graded_basis(ce)
    P = np.eye(8)
    P[[0, 7]] = P[[7, 0]]
    with pytest.raises(NonGenericCell):
        prq_split(S @ P @ S.conj().T, ce)
