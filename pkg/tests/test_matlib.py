import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smfkit import matlib
from smfkit.matlib import NumericalFailure


@st.composite
def matrices(draw, max_dim=6):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    r, c = draw(st.integers(1, max_dim)), draw(st.integers(1, max_dim))
    k = draw(st.integers(0, min(r, c)))
    # rank-k product so rank deficiency is common
    return rng.standard_normal((r, k)) @ rng.standard_normal((k, c)) if k else np.zeros((r, c))


@settings(max_examples=200)
@given(matrices())
def test_penrose_conditions(M):
    X = matlib.pinv(M)
    scale = max(1.0, np.abs(M).max()) * max(1.0, np.abs(X).max())
    tol = 1e-8 * scale**2
    assert np.allclose(M @ X @ M, M, atol=tol)
    assert np.allclose(X @ M @ X, X, atol=tol)
    assert np.allclose((M @ X).T, M @ X, atol=tol)
    assert np.allclose((X @ M).T, X @ M, atol=tol)


@settings(max_examples=100)
@given(matrices())
def test_kernel_basis_is_orthonormal_and_annihilated(M):
    K = matlib.kernel_basis(M)
    assert K.shape == (M.shape[1], M.shape[1] - matlib.rank(M))
    assert np.allclose(K.T @ K, np.eye(K.shape[1]), atol=1e-10)
    assert np.allclose(M @ K, 0, atol=1e-8 * max(1.0, np.abs(M).max()))


def test_rank_examples():
    assert matlib.rank(np.eye(3)) == 3
    assert matlib.rank(np.ones((3, 4))) == 1
    assert matlib.rank(np.zeros((2, 2))) == 0
    assert matlib.rank(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-17]])) == 1


def test_svd_reconstructs():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((4, 3))
    U, s, V = matlib.svd(M)
    assert np.all(np.diff(s) <= 0)
    assert np.allclose(U * s @ V.T, M)


def test_svd_rejects_nonfinite():
    with pytest.raises(ValueError):
        matlib.svd(np.array([[np.nan, 1.0]]))


def test_pinv_of_full_row_rank_is_right_inverse():
    C = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
    assert np.allclose(C @ matlib.pinv(C), np.eye(2))


def test_spectral_radius_rotation_and_jordan():
    th = 0.3
    R = 0.9 * np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    assert matlib.spectral_radius(R) == pytest.approx(0.9)
    assert matlib.spectral_radius(np.array([[0.5, 100.0], [0.0, 0.5]])) == pytest.approx(0.5)
    assert matlib.spectral_radius(np.zeros((0, 0))) == 0.0


def test_matrix_norms():
    M = np.array([[1.0, -2.0], [3.0, 4.0]])
    assert matlib.matrix_norm(M, "inf") == 7.0
    assert matlib.matrix_norm(M, "two") == pytest.approx(np.linalg.svd(M, compute_uv=False)[0])
    with pytest.raises(ValueError):
        matlib.matrix_norm(M, "fro")


def test_matrix_power_norm_seq():
    F = np.array([[0.5, 1.0], [0.0, 0.5]])
    seq = matlib.matrix_power_norm_seq(F, "inf", 5)
    expect = [matlib.matrix_norm(np.linalg.matrix_power(F, k), "inf") for k in range(6)]
    assert np.allclose(seq, expect)


def test_matrix_power_overflow_raises():
    with pytest.raises(NumericalFailure):
        matlib.matrix_power_norm_seq(np.array([[1e200]]), "inf", 5)


def test_solve_and_singular():
    M = np.array([[2.0, 1.0], [1.0, 3.0]])
    x = matlib.solve(M, [1.0, 2.0])
    assert np.allclose(M @ x, [1.0, 2.0])
    with pytest.raises(np.linalg.LinAlgError):
        matlib.solve(np.ones((2, 2)), [1.0, 1.0])


def test_random_orthogonal_is_orthogonal():
    Q = matlib.random_orthogonal(np.random.default_rng(3), 5)
    assert np.allclose(Q.T @ Q, np.eye(5))


def test_block_diag_with_empty_blocks():
    out = matlib.block_diag(np.ones((2, 1)), np.zeros((0, 3)), np.eye(2))
    assert out.shape == (4, 6)
    assert np.allclose(out[:2, :1], 1)
    assert np.allclose(out[2:, 4:], np.eye(2))
    assert np.allclose(out[:2, 1:], 0)
