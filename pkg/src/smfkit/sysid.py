"""Linear systems with bounded noise and their observability structure."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import czono
from .czono import ConstrainedZonotope
from .matlib import (
    as_matrix,
    matrix_norm,
    random_orthogonal,
    rank,
    rank_tol,
    spectral_radius,
)


class ConfigError(ValueError):
    """Inputs violate a documented precondition."""


def _diameter_bound(Z: ConstrainedZonotope) -> float:
    hull = czono.interval_hull(Z)
    return float(2.0 * np.linalg.norm(hull.half_widths))


def _range_from_dict(d: dict) -> ConstrainedZonotope:
    """Either a full set description or a box given as ``lower``/``upper``."""
    if "lower" in d or "upper" in d:
        return ConstrainedZonotope.interval(d["lower"], d["upper"])
    return ConstrainedZonotope.from_dict(d)


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """``x_{k+1} = A x_k + B w_k``, ``y_k = C x_k + v_k`` with set-valued noise.

    ``d_w`` and ``d_v`` default to the Euclidean diameters of the noise
    ranges' interval hulls, which upper-bound the true set diameters.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    W: ConstrainedZonotope
    V: ConstrainedZonotope
    X0_true: ConstrainedZonotope
    d_w: float | None = None
    d_v: float | None = None

    def __post_init__(self):
        A, B, C = as_matrix(self.A), as_matrix(self.B), as_matrix(self.C)
        n = A.shape[0]
        if A.shape != (n, n):
            raise ConfigError("A must be square")
        if B.shape[0] != n or C.shape[1] != n:
            raise ConfigError("B and C must match the state dimension")
        if self.W.dim != B.shape[1] or self.V.dim != C.shape[0] or self.X0_true.dim != n:
            raise ConfigError("noise / initial ranges do not match the matrices")
        if rank(A) < n:
            raise ConfigError("A must be nonsingular")
        for name, Z in (("W", self.W), ("V", self.V), ("X0_true", self.X0_true)):
            if not Z.is_bounded_rep:
                raise ConfigError(f"{name} must be bounded")
            if czono.is_empty(Z):
                raise ConfigError(f"{name} must be nonempty")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        if self.d_w is None:
            object.__setattr__(self, "d_w", _diameter_bound(self.W))
        if self.d_v is None:
            object.__setattr__(self, "d_v", _diameter_bound(self.V))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.B.shape[1]

    @property
    def m(self) -> int:
        return self.C.shape[0]

    def to_dict(self) -> dict:
        return {
            "a": self.A.tolist(),
            "b": self.B.tolist(),
            "c": self.C.tolist(),
            "w": self.W.to_dict(),
            "v": self.V.to_dict(),
            "x0": self.X0_true.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearSystem":
        try:
            A = np.asarray(d["a"], dtype=float)
            n = A.shape[0]
            B = np.asarray(d["b"], dtype=float).reshape(n, -1)
            C = np.asarray(d["c"], dtype=float).reshape(-1, n)
            return cls(
                A, B, C,
                _range_from_dict(d["w"]),
                _range_from_dict(d["v"]),
                _range_from_dict(d["x0"]),
            )
        except (KeyError, TypeError, ValueError) as err:
            raise ConfigError(f"bad system description: {err}") from err


@dataclass(frozen=True, eq=False)
class ObservabilityDecomposition:
    """Orthogonal ``P`` with ``P A P^T = [[A_o, 0], [A_21, A_obar]]`` and ``C P^T = [C_o, 0]``."""

    P: np.ndarray
    n_o: int
    A_o: np.ndarray
    A_21: np.ndarray
    A_obar: np.ndarray
    B_o: np.ndarray
    B_obar: np.ndarray
    C_o: np.ndarray
    mu_o: int
    rank_ambiguous: bool = False

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def n_obar(self) -> int:
        return self.n - self.n_o

    @property
    def P_o(self) -> np.ndarray:
        return self.P[: self.n_o]

    @property
    def P_obar(self) -> np.ndarray:
        return self.P[self.n_o:]

    @property
    def P_inv(self) -> np.ndarray:
        return self.P.T


@dataclass(frozen=True)
class OitBound:
    delta: int
    O_delta: np.ndarray
    sigma_min: float
    d_bar: float


def observability_matrix(A, C, blocks: int | None = None) -> np.ndarray:
    A, C = as_matrix(A), as_matrix(C)
    n = A.shape[0]
    blocks = n if blocks is None else blocks
    rows = []
    M = C.copy()
    for _ in range(blocks):
        rows.append(M)
        M = M @ A
    return np.vstack(rows) if rows else np.zeros((0, n))


def observability_index(A, C) -> int | None:
    """Smallest ``mu`` with ``rank [C; CA; ...; CA^{mu-1}] = n``; ``None`` if unobservable."""
    A, C = as_matrix(A), as_matrix(C)
    n = A.shape[0]
    if n == 0:
        return 0
    O = observability_matrix(A, C, n)
    tol = rank_tol(O)
    m = C.shape[0]
    for mu in range(1, n + 1):
        if rank(O[: mu * m], tol) == n:
            return mu
    return None


def decompose(A, B, C) -> ObservabilityDecomposition:
    """Observability decomposition with an orthogonal transform.

    The first ``n_o`` rows of ``P`` span the row space of the observability
    matrix; the remaining rows span its kernel (the unobservable subspace).
    """
    A, B, C = as_matrix(A), as_matrix(B), as_matrix(C)
    n = A.shape[0]
    O = observability_matrix(A, C, n)
    _, s, Vt = np.linalg.svd(O, full_matrices=True)
    tol = rank_tol(O, s)
    n_o = int(np.sum(s > tol))
    ambiguous = bool(np.any((s > tol / 10) & (s < tol * 10)))
    if ambiguous:
        warnings.warn("observability rank is numerically ambiguous", RuntimeWarning, stacklevel=2)
    # rows of Vt beyond n_o span the kernel, completing the row-space basis
    P = np.eye(n) if n_o == n else Vt
    At = P @ A @ P.T
    Bt = P @ B
    Ct = C @ P.T
    A_o = At[:n_o, :n_o]
    C_o = Ct[:, :n_o]
    mu_o = observability_index(A_o, C_o) if n_o else 0
    if mu_o is None:
        raise ConfigError("observable block is not observable; rank tolerance problem")
    return ObservabilityDecomposition(
        P=P,
        n_o=n_o,
        A_o=A_o,
        A_21=At[n_o:, :n_o],
        A_obar=At[n_o:, n_o:],
        B_o=Bt[:n_o],
        B_obar=Bt[n_o:],
        C_o=C_o,
        mu_o=mu_o,
        rank_ambiguous=ambiguous,
    )


def is_detectable(dec: ObservabilityDecomposition) -> bool:
    return dec.n_obar == 0 or spectral_radius(dec.A_obar) < 1 - 1e-9


def _peak_scaled_power(F: np.ndarray, gamma: float, patience: int = 20, k_cap: int = 20_000) -> float:
    """``max_k gamma^{-k} ||F^k||_inf``, stopped once ``patience`` consecutive terms fall below one."""
    Fg = F / gamma
    P = np.eye(F.shape[0])
    best, below = 1.0, 0
    for _ in range(k_cap):
        P = P @ Fg
        v = float(np.abs(P).sum(axis=1).max())
        if not math.isfinite(v):
            return math.inf
        best = max(best, v)
        below = below + 1 if v < 1.0 else 0
        if below >= patience:
            return best
    return math.inf


def upsilon_inf(A_obar, grid: int = 200, refine_iters: int = 3) -> float:
    """``inf_{gamma in (rho, 1)} max_k gamma^{-k} ||A_obar^k||_inf / (1 - gamma)``.

    Grid search followed by golden-section refinement around the best grid
    point. The infimum may not be attained; the returned value can sit
    slightly above it, which only loosens bounds that use it.
    """
    F = as_matrix(A_obar) if np.size(A_obar) else np.zeros((0, 0))
    if F.size == 0:
        return 0.0
    rho = spectral_radius(F)
    if rho >= 1:
        raise ConfigError(f"upsilon_inf needs spectral radius < 1, got {rho}")

    def f(g):
        return _peak_scaled_power(F, g) / (1.0 - g)

    lo, hi = rho + 1e-6, 1.0 - 1e-6
    gammas = np.linspace(lo, hi, grid)
    vals = np.array([f(g) for g in gammas])
    i = int(np.argmin(vals))
    best = vals[i]
    a, b = gammas[max(i - 1, 0)], gammas[min(i + 1, grid - 1)]
    phi = (math.sqrt(5) - 1) / 2
    x1, x2 = b - phi * (b - a), a + phi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(refine_iters):
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = f(x2)
    return float(min(best, f1, f2))


def oit_bound(A, B, C, d_w: float, d_v: float, delta: int) -> OitBound:
    """Upper bound on the diameter of any ``delta``-window observation-information tower."""
    A, B, C = as_matrix(A), as_matrix(B), as_matrix(C)
    mu = observability_index(A, C)
    if mu is None:
        raise ConfigError("(A, C) is not observable")
    if delta < mu - 1:
        raise ConfigError(f"delta must be at least mu - 1 = {mu - 1}")
    n = A.shape[0]
    A_inv = np.linalg.inv(A)
    # CA^{-l} for l = 0..delta
    CAinv = [C]
    for _ in range(delta):
        CAinv.append(CAinv[-1] @ A_inv)
    O_delta = np.vstack(CAinv[::-1])
    gains = [matrix_norm(CAinv[l] @ B, "two") for l in range(1, delta + 1)]
    total = 0.0
    for j in range(delta + 1):
        term = d_v + sum(gains[: delta - j]) * d_w
        total += term**2
    s = np.linalg.svd(O_delta, compute_uv=False)
    sigma_min = float(s[n - 1]) if s.size >= n else 0.0
    d_bar = math.sqrt(total) / sigma_min if sigma_min > 0 else math.inf
    return OitBound(delta, O_delta, sigma_min, d_bar)


# -- random systems ------------------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _random_stable_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    """Orthogonally rotated block-diagonal matrix with eigenvalue moduli in [0.05, 0.95]."""
    pairs = int(rng.integers(0, n // 2 + 1))
    D = np.zeros((n, n))
    i = 0
    for _ in range(pairs):
        r = rng.uniform(0.05, 0.95)
        th = rng.uniform(0, np.pi)
        D[i:i + 2, i:i + 2] = r * np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        i += 2
    while i < n:
        D[i, i] = rng.uniform(0.05, 0.95) * rng.choice([-1.0, 1.0])
        i += 1
    Q = random_orthogonal(rng, n)
    return Q @ D @ Q.T


def _unit_boxes(n: int, p: int, m: int, x0_half: float = 10.0):
    W = ConstrainedZonotope.box(np.zeros(p), 1.0)
    V = ConstrainedZonotope.box(np.zeros(m), 1.0)
    X0 = ConstrainedZonotope.box(np.zeros(n), x0_half)
    return W, V, X0


def _observable_triple(rng, n, p, m):
    while True:
        A = _random_stable_matrix(rng, n)
        B = rng.standard_normal((n, p))
        C = rng.standard_normal((m, n))
        if rank(A) == n and observability_index(A, C) is not None:
            return A, B, C


def random_observable_system(seed, n: int, p: int, m: int) -> LinearSystem:
    """Random stable observable system with unit-box noises and ``X0 = [-10, 10]^n``.

    Eigenvalue placement stands in for MATLAB's ``drss``; draws are rejected
    until ``(A, C)`` is observable.
    """
    rng = _rng(seed)
    A, B, C = _observable_triple(rng, n, p, m)
    return LinearSystem(A, B, C, *_unit_boxes(n, p, m))


def random_detectable_system(seed, n: int, n_o: int, p: int, m: int) -> LinearSystem:
    """Random detectable system whose unobservable block has spectral radius at most 0.5."""
    if not 0 < n_o <= n:
        raise ConfigError("need 0 < n_o <= n")
    rng = _rng(seed)
    A_o, B_o, C_o = _observable_triple(rng, n_o, p, m)
    nb = n - n_o
    if nb:
        A_ob = rng.standard_normal((nb, nb))
        A_ob *= rng.uniform(0.05, 0.5) / spectral_radius(A_ob)
    else:
        A_ob = np.zeros((0, 0))
    A_21 = rng.uniform(0, 1, (nb, n_o))
    B_ob = rng.uniform(0, 1, (nb, p))
    At = np.block([[A_o, np.zeros((n_o, nb))], [A_21, A_ob]])
    Bt = np.vstack([B_o, B_ob])
    Ct = np.hstack([C_o, np.zeros((m, nb))])
    P = random_orthogonal(rng, n)
    return LinearSystem(P.T @ At @ P, P.T @ Bt, Ct @ P, *_unit_boxes(n, p, m))


# -- the two illustrative systems --------------------------------------------------


def double_integrator() -> LinearSystem:
    """Observable discretized double integrator measured in position (``mu = 2``)."""
    return LinearSystem(
        np.array([[1.0, 1.0], [0.0, 1.0]]),
        np.array([[0.5], [1.0]]),
        np.array([[1.0, 0.0]]),
        ConstrainedZonotope.interval([-1.0], [1.0]),
        ConstrainedZonotope.interval([-1.0], [1.0]),
        ConstrainedZonotope.interval([2.0, 2.0], [3.0, 3.0]),
    )


def detectable_example() -> LinearSystem:
    """Detectable but unobservable 2-state system; the hidden mode decays at rate 0.5."""
    return LinearSystem(
        np.array([[0.5, 1.0], [0.0, 1.0]]),
        np.array([[0.5], [1.0]]),
        np.array([[0.0, 1.0]]),
        ConstrainedZonotope.interval([-1.0], [1.0]),
        ConstrainedZonotope.interval([-1.0], [1.0]),
        ConstrainedZonotope.interval([2.0, 2.0], [3.0, 3.0]),
    )


def scalar_ill_posed() -> LinearSystem:
    """Scalar random walk whose one-sided measurement noise makes bad guesses fatal."""
    return LinearSystem(
        np.array([[1.0]]),
        np.array([[1.0]]),
        np.array([[1.0]]),
        ConstrainedZonotope.interval([-1.0], [1.0]),
        ConstrainedZonotope.interval([0.0], [1.0]),
        ConstrainedZonotope.interval([-1.0], [1.0]),
    )
