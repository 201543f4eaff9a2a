"""The Willmore two-sphere in S^6: potential, closed form and Gauss-plane comparison.

The normalized potential is eta = lam^-1 [[0, B], [-B^T I_{1,3}, 0]] dz in
so(1,7) with an explicit 4 x 4 polynomial block B.  Its associated family
of surfaces x_lam is known in closed form, which gives an independent
oracle: the conformal Gauss map of x_lam (a Lorentzian 4-plane in R^{1,7})
must coincide with the span of the first four columns of the extended frame.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .dpw import PotentialSpec
from .errors import BranchPoint, NoMatch
from .laurent import LaurentMatrix, RationalMatrix
from .liectx import willmore_context
from .roots import cartan_data, enumerate_canonical

__all__ = [
    "I13",
    "example_B1",
    "example_potential",
    "example_canonical",
    "closed_form_x",
    "WillmoreSample",
    "lift",
    "conformal_gauss_4plane",
    "frame_plane",
    "plane_projector",
    "compare_pipeline_vs_oracle",
    "isotropy_check",
    "pairwise_conditions",
    "classify_shape",
    "PotentialShape",
]

I13 = np.diag([-1.0, 1.0, 1.0, 1.0])
J18 = np.diag([-1.0] + [1.0] * 7)


def example_B1():
    """Coefficients (2, 4, 4) of B(z) = B0 + z B1, lowest power first."""
    B0 = 0.5 * np.array([[0, 0, -1j, 1],
                         [0, 0, -1j, 1],
                         [-2, -2j, 0, 0],
                         [2j, -2, 0, 0]], dtype=complex)
    B1 = 0.5 * np.array([[2j, -2, 0, 0],
                         [-2j, 2, 0, 0],
                         [0, 0, -1, -1j],
                         [0, 0, -1j, 1]], dtype=complex)
    return np.array([B0, B1])


def _block(B, m=4):
    """[[0, B], [-B^T I_{1,3}, 0]] for a 4 x k block."""
    k = B.shape[-1]
    out = np.zeros(B.shape[:-2] + (4 + k, 4 + k), dtype=complex)
    out[..., :4, 4:] = B
    out[..., 4:, :4] = -np.swapaxes(B, -1, -2) @ I13
    return out


def example_canonical(ctx=None):
    """The height-2 canonical element of so(1,7) whose grading houses the example."""
    ctx = ctx or willmore_context()
    cd = cartan_data(ctx)
    for ce in enumerate_canonical(cd):
        if ce.index_set == (2,):
            return ce
    raise RuntimeError("canonical element not found")


def example_potential(ctx=None):
    """The 8 x 8 normalized potential with base point 0 and its exact closed form C."""
    ctx = ctx or willmore_context()
    ce = example_canonical(ctx)
    B = example_B1()
    X0, X1 = _block(B[0]), _block(B[1])
    brk = X0 @ X1 - X1 @ X0

    def C(z):
        # Magnus series terminates: all triple products vanish in this grading
        return LaurentMatrix.constant(z * X0 + z ** 2 / 2 * X1 + z ** 3 / 12 * brk)

    eta = RationalMatrix.from_poly_array(np.array([X0, X1]))
    return PotentialSpec(ctx, {-1: eta}, 0j, ce, "normalized", C, None, "willmore-S6")


# ---------------------------------------------------------------------------
# closed form


@dataclass
class WillmoreSample:
    z: complex
    lam: complex
    x: np.ndarray


def closed_form_x(z, lam=1.0):
    """Point x_lam(z) on S^6 from the closed-form associated family."""
    z = complex(z)
    lam = complex(lam)
    zb = z.conjugate()
    r2 = (z * zb).real
    li = 1 / lam
    den = 1 + r2 + 5 * r2 ** 2 / 4 + 4 * r2 ** 3 / 9 + r2 ** 4 / 36
    x = np.array([
        1 - r2 - 3 * r2 ** 2 / 4 + 4 * r2 ** 3 / 9 - r2 ** 4 / 36,
        -1j * (z - zb) * (1 + r2 ** 3 / 9),
        (z + zb) * (1 + r2 ** 3 / 9),
        -1j * (li * z ** 2 - lam * zb ** 2) * (1 - r2 ** 2 / 12),
        (li * z ** 2 + lam * zb ** 2) * (1 - r2 ** 2 / 12),
        -1j * r2 / 2 * (li * z - lam * zb) * (1 + 4 * r2 / 3),
        r2 / 2 * (li * z + lam * zb) * (1 + 4 * r2 / 3),
    ]) / den
    return WillmoreSample(z, lam, x.real.copy())


def lift(x):
    """Light-cone lift Y = (1, x) in R^{1,7}."""
    return np.concatenate([[1.0], np.asarray(x, dtype=float)])


def _ip(a, b):
    return -a[0] * b[0] + a[1:] @ b[1:]


def plane_projector(A, J=J18):
    """J-orthogonal projector onto the column span of A."""
    A = np.asarray(A)
    G = A.T @ J @ A
    return A @ np.linalg.solve(G, A.T @ J)


def conformal_gauss_4plane(sampler, z, spacing=1e-3, tol=1e-10):
    """Mean-curvature-sphere 4-plane at z as (frame (8, 4), projector (8, 8)).

    ``sampler`` maps a complex z to a point of S^n.  Derivatives use fourth
    order central differences.  The frame is (Y, Y_u, Y_v, N) with N the
    light-like vector in span{Y, Y_u, Y_v, Y_zzbar} orthogonal to Y_u, Y_v
    and normalized by <Y, N> = -1.
    """
    h = spacing
    Y = lambda w: lift(sampler(w))
    Y0 = Y(z)
    st = {(a, b): Y(z + h * (a + 1j * b)) for a in range(-2, 3) for b in range(-2, 3)
          if a == 0 or b == 0}
    d1 = lambda e: (st[e(-2)] - st[e(2)] + 8 * (st[e(1)] - st[e(-1)])) / (12 * h)
    Yu = d1(lambda s: (s, 0))
    Yv = d1(lambda s: (0, s))
    d2 = lambda e: (-st[e(-2)] - st[e(2)] + 16 * (st[e(1)] + st[e(-1)]) - 30 * Y0) / (12 * h * h)
    lap = d2(lambda s: (s, 0)) + d2(lambda s: (0, s))
    g = np.array([[_ip(Yu, Yu), _ip(Yu, Yv)], [_ip(Yv, Yu), _ip(Yv, Yv)]])
    if np.linalg.det(g) <= tol:
        raise BranchPoint(f"degenerate induced metric at z = {z}")
    rhs = -np.array([_ip(lap, Yu), _ip(lap, Yv)])
    b, c = np.linalg.solve(g, rhs)
    M = lap + b * Yu + c * Yv
    a = -_ip(M, M) / (2 * _ip(M, Y0))
    N = M + a * Y0
    N = N / (-_ip(Y0, N))
    A = np.stack([Y0, Yu, Yv, N], axis=1)
    return A, plane_projector(A)


def frame_plane(F, lam=1.0):
    """Projector onto the span of the first four columns of F(lam)."""
    M = F(lam) if isinstance(F, LaurentMatrix) else np.asarray(F)
    A = M[:, :4]
    if np.abs(A.imag).max() > 1e-8:
        raise ValueError("frame is not real on the circle")
    return plane_projector(A.real)


def compare_pipeline_vs_oracle(frames, lambdas=(1.0, 1j, -1.0), spacing=1e-3):
    """Max operator-norm distance between pipeline and closed-form Gauss planes.

    ``frames`` is a FrameField in the non-compact context.  Returns the max
    deviation and the (point index, lambda) where it occurs.
    """
    worst, where = 0.0, None
    for k, (z, F) in enumerate(zip(frames.points, frames.frames)):
        if F is None:
            continue
        for lam in lambdas:
            _, Po = conformal_gauss_4plane(lambda w: closed_form_x(w, lam).x, z, spacing)
            Pp = frame_plane(F, lam)
            d = float(np.linalg.norm(Pp - Po, 2))
            if d > worst:
                worst, where = d, (k, complex(lam))
    return worst, where


# ---------------------------------------------------------------------------
# isotropy and shapes


def _polymul_mat(a, b):
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1], b.shape[2]), dtype=complex)
    for i in range(a.shape[0]):
        out[i:i + b.shape[0]] += a[i] @ b
    return out


def isotropy_check(B):
    """Max coefficient of the polynomial matrix B^T I_{1,3} B.

    ``B`` is either a coefficient array (d+1, 4, k) or a 4 x k nested list
    of RationalFn entries.
    """
    if isinstance(B, np.ndarray):
        BT = np.swapaxes(B, 1, 2)
        prod = _polymul_mat(BT @ I13, B)
        return float(np.abs(prod).max())
    rows, cols = len(B), len(B[0])
    worst = 0.0
    for a in range(cols):
        for b in range(cols):
            acc = B[0][a] * B[0][b] * (-1)
            for r in range(1, rows):
                acc = acc + B[r][a] * B[r][b]
            worst = max(worst, float(np.abs(acc.num).max()))
    return worst


def pairwise_conditions(B):
    """Matrix of coefficient norms of v_a^T I_{1,3} v_b over all column pairs."""
    BT = np.swapaxes(B, 1, 2)
    prod = _polymul_mat(BT @ I13, B)
    return np.abs(prod).max(axis=0)


@dataclass
class PotentialShape:
    m: int
    pair_types: list
    shape_index: int
    row_transform: tuple


_ZS = np.array([0.31 + 0.17j, -0.62 + 0.44j, 1.13 - 0.29j, -0.27 - 0.85j, 0.05 + 1.21j])


def _values(B):
    if callable(B):
        return np.array([np.asarray(B(z), dtype=complex) for z in _ZS])
    B = np.asarray(B, dtype=complex)
    return np.tensordot(_ZS[:, None] ** np.arange(B.shape[0]), B, axes=(1, 0))


def classify_shape(B, tol=1e-9):
    """Match each column pair of a 4 x 2(m-2) block against the two normal forms.

    Type (ii) (v_hat = +-i v) is invariant under row transformations and is
    tested first; the remaining nonzero pairs must all be of type (i) (rows
    1 = 2 and row 4 = i row 3) after one common signed permutation of the
    rows that fixes the time row.  Zero pairs count as type (i).  The shape
    index is 1 + the number of type (ii) pairs.
    """
    V = _values(B)  # (samples, 4, k)
    k = V.shape[2]
    if V.shape[1] != 4 or k % 2:
        raise NoMatch("block must be 4 x (even)")
    scale = max(1.0, float(np.abs(V).max()))
    labels = [None] * (k // 2)
    rest = []
    for j in range(k // 2):
        v, w = V[:, :, 2 * j], V[:, :, 2 * j + 1]
        if np.abs(v).max() < tol * scale and np.abs(w).max() < tol * scale:
            labels[j] = "i"
        elif min(np.abs(w - 1j * v).max(), np.abs(w + 1j * v).max()) < tol * scale:
            labels[j] = "ii"
        else:
            rest.append(j)
    chosen = ()
    if rest:
        found = False
        for perm in permutations((1, 2, 3)):
            for signs in product((1, -1), repeat=4):
                rows = (0,) + perm
                S = np.array(signs)[:, None]
                ok = True
                for j in rest:
                    for col in (2 * j, 2 * j + 1):
                        W = V[:, rows, col] * S.T
                        if (np.abs(W[:, 0] - W[:, 1]).max() > tol * scale
                                or np.abs(W[:, 3] - 1j * W[:, 2]).max() > tol * scale):
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    found, chosen = True, (rows, signs)
                    break
            if found:
                break
        if not found:
            raise NoMatch("no signed row permutation brings the block to a normal form")
        for j in rest:
            labels[j] = "i"
    m = k // 2 + 2
    index = 1 + sum(1 for t in labels if t == "ii")
    return PotentialShape(m, labels, index, chosen)
