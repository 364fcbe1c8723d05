import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from pursuit_lab.linalg import (
    DimensionError,
    RankDeficientError,
    adjoint_matvec,
    as_matrix,
    as_support,
    as_vector,
    extreme_singular_values,
    least_squares,
    matvec,
    restrict_columns,
)


def naive_matvec(A, v):
    out = [0.0] * len(A)
    for i in range(len(A)):
        for j in range(len(v)):
            out[i] += A[i][j] * v[j]
    return np.array(out)


def gauss_solve(M, b):
    """Gaussian elimination with partial pivoting on plain lists."""
    n = len(b)
    a = [list(map(float, M[i])) + [float(b[i])] for i in range(n)]
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(a[r][c]))
        a[c], a[p] = a[p], a[c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            for j in range(c, n + 1):
                a[r][j] -= f * a[c][j]
    x = [0.0] * n
    for r in reversed(range(n)):
        x[r] = (a[r][n] - sum(a[r][j] * x[j] for j in range(r + 1, n))) / a[r][r]
    return np.array(x)


def test_matvec_small_cases():
    assert np.array_equal(matvec(np.eye(3), np.array([1.0, 2.0, 3.0])), [1, 2, 3])
    assert np.array_equal(matvec(np.array([[1.0, 1.0]]), np.array([3.0, 4.0])), [7.0])


def test_matvec_matches_double_loop(rng):
    A = rng.standard_normal((5, 8))
    v = rng.standard_normal(8)
    assert np.allclose(matvec(A, v), naive_matvec(A.tolist(), v.tolist()), rtol=1e-13, atol=1e-13)


def test_adjoint_cases(rng):
    assert np.array_equal(adjoint_matvec(np.eye(3), np.array([1.0, 0.0, 2.0])), [1, 0, 2])
    Q, _ = np.linalg.qr(rng.standard_normal((6, 4)))
    assert np.allclose(adjoint_matvec(Q, Q[:, 0]), [1, 0, 0, 0], atol=1e-14)
    A = rng.standard_normal((6, 4))
    u = rng.standard_normal(6)
    At = [[A[i, j] for i in range(6)] for j in range(4)]
    assert np.allclose(adjoint_matvec(A, u), naive_matvec(At, u.tolist()), atol=1e-13)


def test_dimension_errors():
    with pytest.raises(DimensionError):
        matvec(np.eye(3), np.ones(2))
    with pytest.raises(DimensionError):
        adjoint_matvec(np.eye(3), np.ones(4))
    with pytest.raises(ValueError):
        as_matrix(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        as_matrix(np.ones(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.data())
def test_adjoint_identity(m, n, data):
    elems = st.floats(-10, 10, allow_nan=False)
    A = data.draw(arrays(np.float64, (m, n), elements=elems))
    v = data.draw(arrays(np.float64, n, elements=elems))
    u = data.draw(arrays(np.float64, m, elements=elems))
    lhs = float(matvec(A, v) @ u)
    rhs = float(v @ adjoint_matvec(A, u))
    scale = float(np.abs(A).sum() * np.abs(v).max(initial=0) * np.abs(u).max(initial=0)) + 1e-300
    assert abs(lhs - rhs) <= 1e-10 * scale


def test_restrict_columns(rng):
    assert np.array_equal(restrict_columns(np.eye(3), [1]), np.eye(3)[:, [1]])
    A = rng.standard_normal((4, 6))
    assert np.array_equal(restrict_columns(A, range(6)), A)
    sub = restrict_columns(A, [0, 3, 5])
    for c, j in enumerate([0, 3, 5]):
        assert [sub[i, c] for i in range(4)] == [A[i, j] for i in range(4)]
    assert restrict_columns(A, []).shape == (4, 0)
    with pytest.raises(IndexError):
        restrict_columns(A, [6])


def test_as_support_and_vector():
    assert as_support([3, 1, 3], 5).tolist() == [1, 3]
    with pytest.raises(IndexError):
        as_support([5], 5)
    assert as_vector(np.ones((3, 1))).shape == (3,)
    with pytest.raises(DimensionError):
        as_vector(np.ones((2, 2)))


def test_least_squares_identity_columns():
    y = np.array([1.0, -2.0, 3.0, 4.0])
    z = least_squares(np.eye(4)[:, [0, 2]], y)
    assert np.array_equal(z, [1.0, 3.0])


def test_least_squares_consistent_system(rng):
    A = rng.standard_normal((10, 3))
    y = A @ np.array([1.0, -2.0, 0.5])
    z = least_squares(A, y)
    assert np.linalg.norm(A @ z - y) <= 1e-8 * np.linalg.norm(y)


def test_least_squares_matches_normal_equations(rng):
    A = rng.standard_normal((8, 3))
    y = rng.standard_normal(8)
    G = [[sum(A[r, i] * A[r, j] for r in range(8)) for j in range(3)] for i in range(3)]
    b = [sum(A[r, i] * y[r] for r in range(8)) for i in range(3)]
    assert np.allclose(least_squares(A, y), gauss_solve(G, b), rtol=1e-10, atol=1e-12)


def test_least_squares_rank_failures(rng):
    a = rng.standard_normal(5)
    with pytest.raises(RankDeficientError) as exc:
        least_squares(np.column_stack([a, 2 * a]), np.ones(5), support=[4, 7])
    assert list(exc.value.support) == [4, 7]
    with pytest.raises(RankDeficientError):
        least_squares(rng.standard_normal((2, 3)), np.ones(2))
    assert least_squares(np.zeros((3, 0)), np.ones(3)).shape == (0,)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.data())
def test_least_squares_residual_orthogonal(m, data):
    n = data.draw(st.integers(1, m))
    seed = data.draw(st.integers(0, 2**32 - 1))
    g = np.random.default_rng(seed)
    A = g.standard_normal((m, n))
    y = g.standard_normal(m)
    r = y - A @ least_squares(A, y)
    assert np.abs(A.T @ r).max() <= 1e-9 * np.linalg.norm(A, axis=0).max() * np.linalg.norm(y)


def cubic_roots_sym3(G):
    """Eigenvalues of a symmetric 3x3 matrix from the trigonometric cubic formula."""
    import math
    a, b, c = G[0][0], G[1][1], G[2][2]
    d, e, f = G[0][1], G[1][2], G[0][2]
    q = (a + b + c) / 3
    p1 = d * d + e * e + f * f
    p2 = (a - q) ** 2 + (b - q) ** 2 + (c - q) ** 2 + 2 * p1
    p = math.sqrt(p2 / 6)
    B = [[(G[i][j] - (q if i == j else 0)) / p for j in range(3)] for i in range(3)]
    detB = (B[0][0] * (B[1][1] * B[2][2] - B[1][2] * B[2][1])
            - B[0][1] * (B[1][0] * B[2][2] - B[1][2] * B[2][0])
            + B[0][2] * (B[1][0] * B[2][1] - B[1][1] * B[2][0]))
    phi = math.acos(max(-1.0, min(1.0, detB / 2))) / 3
    hi = q + 2 * p * math.cos(phi)
    lo = q + 2 * p * math.cos(phi + 2 * math.pi / 3)
    return lo, hi


def test_extreme_singular_values(rng):
    assert extreme_singular_values(np.eye(4)) == pytest.approx((1.0, 1.0))
    assert extreme_singular_values(np.diag([1.0, 2.0, 3.0])) == pytest.approx((1.0, 3.0))
    A = rng.standard_normal((6, 3))
    lo, hi = cubic_roots_sym3((A.T @ A).tolist())
    smin, smax = extreme_singular_values(A)
    assert smin == pytest.approx(np.sqrt(lo), rel=1e-9)
    assert smax == pytest.approx(np.sqrt(hi), rel=1e-9)
