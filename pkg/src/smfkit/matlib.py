"""Dense real linear algebra helpers.

Thin wrappers over LAPACK (through numpy) with the rank conventions used
throughout the package. Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import numpy as np

EPS = np.finfo(float).eps


class NumericalFailure(RuntimeError):
    """Raised when an iterative kernel fails to converge or overflows."""


def as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim == 0:
        return M.reshape(1, 1)
    if M.ndim == 1:
        return M.reshape(1, -1)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {M.shape}")
    return M


def _check_finite(M: np.ndarray) -> None:
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")


def svd(M):
    """Thin SVD ``M = U @ diag(s) @ V.T`` with ``s`` sorted descending."""
    M = as_matrix(M)
    _check_finite(M)
    try:
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as err:
        raise NumericalFailure(str(err)) from err
    return U, s, Vt.T


def rank_tol(M, s=None) -> float:
    M = as_matrix(M)
    if s is None:
        s = np.linalg.svd(M, compute_uv=False) if M.size else np.zeros(0)
    smax = s[0] if s.size else 0.0
    return max(M.shape) * EPS * smax


def rank(M, tol: float | None = None) -> int:
    M = as_matrix(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if tol is None:
        tol = rank_tol(M, s)
    return int(np.sum(s > tol))


def pinv(M, tol: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse via the SVD."""
    M = as_matrix(M)
    if M.size == 0:
        return np.zeros((M.shape[1], M.shape[0]))
    U, s, V = svd(M)
    if tol is None:
        tol = rank_tol(M, s)
    inv = np.zeros_like(s)
    keep = s > tol
    inv[keep] = 1.0 / s[keep]
    return (V * inv) @ U.T


def kernel_basis(M, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of ``ker(M)`` as columns (``cols - rank`` of them)."""
    M = as_matrix(M)
    ncols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(ncols)
    _check_finite(M)
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    if tol is None:
        tol = rank_tol(M, s)
    r = int(np.sum(s > tol))
    return Vt[r:].T.copy()


def spectral_radius(M) -> float:
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    if M.size == 0:
        return 0.0
    _check_finite(M)
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as err:
        raise NumericalFailure(str(err)) from err
    return float(np.max(np.abs(ev)))


def matrix_norm(M, norm: str = "two") -> float:
    M = as_matrix(M)
    if M.size == 0:
        return 0.0
    if norm == "two":
        return float(np.linalg.norm(M, 2))
    if norm == "inf":
        return float(np.max(np.sum(np.abs(M), axis=1)))
    raise ValueError(f"unknown norm {norm!r}")


def matrix_power_norm_seq(F, norm: str = "two", k_max: int = 10) -> np.ndarray:
    """Return ``[||F^0||, ||F^1||, ..., ||F^k_max||]`` by repeated multiplication."""
    F = as_matrix(F)
    if F.shape[0] != F.shape[1]:
        raise ValueError("F must be square")
    out = np.empty(k_max + 1)
    P = np.eye(F.shape[0])
    with np.errstate(over="raise", invalid="raise"):
        try:
            for k in range(k_max + 1):
                out[k] = matrix_norm(P, norm)
                P = P @ F
        except FloatingPointError as err:
            raise NumericalFailure(f"overflow in matrix power at k={k}") from err
    if not np.all(np.isfinite(out)):
        raise NumericalFailure("overflow in matrix power")
    return out


def solve(M, rhs) -> np.ndarray:
    """Solve ``M x = rhs`` through QR; ``M`` must be square and nonsingular."""
    M = as_matrix(M)
    Q, R = np.linalg.qr(M)
    if np.min(np.abs(np.diag(R)), initial=np.inf) <= rank_tol(M):
        raise np.linalg.LinAlgError("singular matrix")
    return np.linalg.solve(R, Q.T @ np.asarray(rhs, dtype=float))


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed orthogonal matrix from a seeded Gaussian QR."""
    if n == 0:
        return np.zeros((0, 0))
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def block_diag(*blocks) -> np.ndarray:
    blocks = [np.asarray(b, dtype=float) if np.ndim(b) == 2 else as_matrix(b) for b in blocks]
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols))
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out
