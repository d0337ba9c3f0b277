"""Extended constrained zonotopes.

A set is stored as the quintuple ``(G, c, A, b, h)`` and denotes::

    { G @ xi + c :  A @ xi = b,  -h <= xi <= h }

with ``h`` entries in ``[0, inf]``. Infinite entries let unbounded priors
(whole subspaces) be written down exactly; they become free LP variables.

Every operation here is exact. Nothing reduces generators or constraints;
window-limiting growth is the filter's job.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import lpcore
from .matlib import as_matrix, block_diag, kernel_basis, pinv


class EmptySetError(ValueError):
    """A query that needs a nonempty set was given an empty one."""


@dataclass(frozen=True, eq=False)
class ConstrainedZonotope:
    G: np.ndarray
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        # copies: the arrays are frozen below and must not alias caller data
        c = np.array(self.c, dtype=float).ravel()
        n = c.size
        h = np.array(self.h, dtype=float).ravel()
        ng = h.size
        G = np.array(self.G, dtype=float).reshape(n, ng)
        b = np.array(self.b, dtype=float).ravel()
        A = np.array(self.A, dtype=float).reshape(b.size, ng)
        if np.any(np.isnan(h)) or np.any(h < 0):
            raise ValueError("generator bounds must be nonnegative")
        if not (np.all(np.isfinite(G)) and np.all(np.isfinite(c))):
            raise ValueError("generators and center must be finite")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("constraint data must be finite")
        for name, val in (("G", G), ("c", c), ("A", A), ("b", b), ("h", h)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def dim(self) -> int:
        return self.c.size

    @property
    def n_gen(self) -> int:
        return self.h.size

    @property
    def n_con(self) -> int:
        return self.b.size

    @property
    def is_bounded_rep(self) -> bool:
        """True when every generator bound is finite (a sufficient boundedness test)."""
        return bool(np.all(np.isfinite(self.h)))

    # -- constructors ---------------------------------------------------------

    @classmethod
    def box(cls, center, half_widths) -> "ConstrainedZonotope":
        center = np.asarray(center, dtype=float).ravel()
        hw = np.broadcast_to(np.asarray(half_widths, dtype=float), center.shape)
        n = center.size
        return cls(np.eye(n), center, np.zeros((0, n)), np.zeros(0), hw)

    @classmethod
    def interval(cls, lower, upper) -> "ConstrainedZonotope":
        lower = np.asarray(lower, dtype=float).ravel()
        upper = np.asarray(upper, dtype=float).ravel()
        return cls.box((lower + upper) / 2, (upper - lower) / 2)

    @classmethod
    def singleton(cls, x) -> "ConstrainedZonotope":
        x = np.asarray(x, dtype=float).ravel()
        return cls(np.zeros((x.size, 0)), x, np.zeros((0, 0)), np.zeros(0), np.zeros(0))

    @classmethod
    def whole_space(cls, n: int) -> "ConstrainedZonotope":
        return cls.box(np.zeros(n), np.inf)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "g": self.G.tolist(),
            "c": self.c.tolist(),
            "a": self.A.tolist(),
            "b": self.b.tolist(),
            "h": ["inf" if np.isinf(v) else float(v) for v in self.h],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConstrainedZonotope":
        h = np.array([np.inf if v in ("inf", "Infinity") else float(v) for v in d["h"]], dtype=float)
        c = np.asarray(d["c"], dtype=float).ravel()
        b = np.asarray(d.get("b", []), dtype=float).ravel()
        G = np.asarray(d["g"], dtype=float).reshape(c.size, h.size)
        A = np.asarray(d.get("a", []), dtype=float).reshape(b.size, h.size)
        return cls(G, c, A, b, h)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "ConstrainedZonotope":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class Box:
    center: np.ndarray
    half_widths: np.ndarray

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.half_widths

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.half_widths

    @property
    def bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.half_widths)))

    def to_cz(self) -> ConstrainedZonotope:
        return ConstrainedZonotope.box(self.center, self.half_widths)


CZ = ConstrainedZonotope


def _check_dim(got: int, want: int, what: str) -> None:
    if got != want:
        raise ValueError(f"dimension mismatch in {what}: {got} != {want}")


# -- affine and Minkowski algebra ---------------------------------------------


def linear_image(M, Z: CZ) -> CZ:
    """``{M x : x in Z}``; a scalar ``M`` scales the set."""
    if np.ndim(M) == 0:
        M = float(M) * np.eye(Z.dim)
    M = as_matrix(M)
    _check_dim(M.shape[1], Z.dim, "linear_image")
    return CZ(M @ Z.G, M @ Z.c, Z.A, Z.b, Z.h)


def translate(Z: CZ, t) -> CZ:
    return CZ(Z.G, Z.c + np.asarray(t, dtype=float), Z.A, Z.b, Z.h)


def minkowski_sum(Z1: CZ, Z2: CZ) -> CZ:
    _check_dim(Z2.dim, Z1.dim, "minkowski_sum")
    return CZ(
        np.hstack([Z1.G, Z2.G]),
        Z1.c + Z2.c,
        block_diag(Z1.A, Z2.A),
        np.concatenate([Z1.b, Z2.b]),
        np.concatenate([Z1.h, Z2.h]),
    )


def intersect(Z1: CZ, Z2: CZ) -> CZ:
    """Exact intersection by tying the two generator spaces together."""
    _check_dim(Z2.dim, Z1.dim, "intersect")
    A = np.vstack([
        block_diag(Z1.A, Z2.A),
        np.hstack([Z1.G, -Z2.G]),
    ])
    return CZ(
        np.hstack([Z1.G, np.zeros((Z1.dim, Z2.n_gen))]),
        Z1.c,
        A,
        np.concatenate([Z1.b, Z2.b, Z2.c - Z1.c]),
        np.concatenate([Z1.h, Z2.h]),
    )


def cartesian_product(Z1: CZ, Z2: CZ) -> CZ:
    return CZ(
        block_diag(Z1.G, Z2.G),
        np.concatenate([Z1.c, Z2.c]),
        block_diag(Z1.A, Z2.A),
        np.concatenate([Z1.b, Z2.b]),
        np.concatenate([Z1.h, Z2.h]),
    )


def project(Z: CZ, idx) -> CZ:
    idx = np.asarray(idx, dtype=int).ravel()
    return CZ(Z.G[idx], Z.c[idx], Z.A, Z.b, Z.h)


# -- filtering primitives -------------------------------------------------------


def predict(Z: CZ, sys) -> CZ:
    """Prior ``A Z + B W`` for a system exposing ``A``, ``B`` and ``W``."""
    A, B, W = as_matrix(sys.A), as_matrix(sys.B), sys.W
    _check_dim(A.shape[1], Z.dim, "predict")
    _check_dim(B.shape[1], W.dim, "predict (noise)")
    return CZ(
        np.hstack([A @ Z.G, B @ W.G]),
        A @ Z.c + B @ W.c,
        block_diag(Z.A, W.A),
        np.concatenate([Z.b, W.b]),
        np.concatenate([Z.h, W.h]),
    )


def update(Z: CZ, C, y, V: CZ) -> CZ:
    """Posterior ``{x in Z : C x + v = y for some v in V}``."""
    C = as_matrix(C)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    _check_dim(C.shape[1], Z.dim, "update")
    _check_dim(C.shape[0], y.size, "update (measurement)")
    _check_dim(V.dim, y.size, "update (noise)")
    A = np.vstack([
        block_diag(Z.A, V.A),
        np.hstack([C @ Z.G, V.G]),
    ])
    return CZ(
        np.hstack([Z.G, np.zeros((Z.dim, V.n_gen))]),
        Z.c,
        A,
        np.concatenate([Z.b, V.b, y - V.c - C @ Z.c]),
        np.concatenate([Z.h, V.h]),
    )


def measurement_set(C, y, V: CZ) -> CZ:
    """States consistent with one measurement: ``ker(C) + C^+ (y - V)``.

    Exact when ``C`` has full row rank.
    """
    C = as_matrix(C)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    _check_dim(V.dim, y.size, "measurement_set")
    K = kernel_basis(C)
    Cp = pinv(C)
    nk = K.shape[1]
    return CZ(
        np.hstack([K, -Cp @ V.G]),
        Cp @ (y - V.c),
        np.hstack([np.zeros((V.n_con, nk)), V.A]),
        V.b,
        np.concatenate([np.full(nk, np.inf), V.h]),
    )


def filter_image(Z_start: CZ, sys, ys) -> CZ:
    """Image of ``Z_start`` (a prior at time ``i``) under measurements ``y_i..y_k``.

    Assembled in one pass. Generator blocks are ordered
    ``[start, v_i, w_i, v_{i+1}, ..., w_{k-1}, v_k]``; constraint rows are
    ordered ``[start, v_i, y_i, w_i, v_{i+1}, y_{i+1}, ...]``. This is the
    same quintuple a fold of :func:`update` and :func:`predict` produces.
    """
    ys = [np.atleast_1d(np.asarray(y, dtype=float)) for y in ys]
    if not ys:
        raise ValueError("filter_image needs at least one measurement")
    A, B, C = as_matrix(sys.A), as_matrix(sys.B), as_matrix(sys.C)
    W, V = sys.W, sys.V
    n = Z_start.dim
    _check_dim(A.shape[0], n, "filter_image")
    steps = len(ys)
    g0, gv, gw = Z_start.n_gen, V.n_gen, W.n_gen
    cv, cw = V.n_con, W.n_con
    m = C.shape[0]

    ng = g0 + steps * gv + (steps - 1) * gw
    nc = Z_start.n_con + steps * (cv + m) + (steps - 1) * cw
    Gk = np.zeros((n, ng))
    Ak = np.zeros((nc, ng))
    bk = np.zeros(nc)
    hk = np.empty(ng)

    # column offsets of each block
    v_cols = [g0 + l * (gv + gw) for l in range(steps)]
    w_cols = [g0 + l * (gv + gw) + gv for l in range(steps - 1)]

    hk[:g0] = Z_start.h
    Ak[: Z_start.n_con, :g0] = Z_start.A
    bk[: Z_start.n_con] = Z_start.b
    row = Z_start.n_con

    BGw = B @ W.G
    Bcw = B @ W.c
    prop_G0 = Z_start.G.copy()  # A^{l-i} G_i^-
    prop_w = []  # A^{l-1-r} B G_w for r < l
    c_prior = Z_start.c.copy()
    for l, y in enumerate(ys):
        if l > 0:
            prop_G0 = A @ prop_G0
            prop_w = [A @ P for P in prop_w]
            prop_w.append(BGw)
            c_prior = A @ c_prior + Bcw
            wc = w_cols[l - 1]
            hk[wc:wc + gw] = W.h
            Ak[row:row + cw, wc:wc + gw] = W.A
            bk[row:row + cw] = W.b
            row += cw
        vc = v_cols[l]
        hk[vc:vc + gv] = V.h
        Ak[row:row + cv, vc:vc + gv] = V.A
        bk[row:row + cv] = V.b
        row += cv
        _check_dim(y.size, m, "filter_image (measurement)")
        Ak[row:row + m, :g0] = C @ prop_G0
        for r, P in enumerate(prop_w):
            Ak[row:row + m, w_cols[r]:w_cols[r] + gw] = C @ P
        Ak[row:row + m, vc:vc + gv] = V.G
        bk[row:row + m] = y - V.c - C @ c_prior
        row += m

    Gk[:, :g0] = prop_G0
    for r, P in enumerate(prop_w):
        Gk[:, w_cols[r]:w_cols[r] + gw] = P
    return CZ(Gk, c_prior, Ak, bk, hk)


# -- LP-backed queries --------------------------------------------------------------


def _lp_data(Z: CZ):
    """Drop generators pinned at zero; they never change the set."""
    keep = Z.h > 0
    if keep.all():
        return Z.G, Z.A, Z.h
    return Z.G[:, keep], Z.A[:, keep], Z.h[keep]


def is_empty(Z: CZ) -> bool:
    if Z.n_con == 0:
        return False
    _, A, h = _lp_data(Z)
    return lpcore.feasible_point(A, Z.b, -h, h) is None


def feasible_point(Z: CZ):
    """Some point of ``Z``, or ``None`` when ``Z`` is empty."""
    G, A, h = _lp_data(Z)
    xi = lpcore.feasible_point(A, Z.b, -h, h)
    if xi is None:
        return None
    return G @ xi + Z.c


def contains_point(Z: CZ, x, tol: float = 1e-9) -> bool:
    x = np.asarray(x, dtype=float).ravel()
    _check_dim(x.size, Z.dim, "contains_point")
    G, A, h = _lp_data(Z)
    A_full = np.vstack([G, A])
    b_full = np.concatenate([x - Z.c, Z.b])
    settings = lpcore.LpSettings(feas_tol=tol)
    return lpcore.feasible_point(A_full, b_full, -h, h, settings) is not None


def support_many(Z: CZ, directions) -> np.ndarray:
    """``max_{x in Z} d @ x`` for each row ``d``; ``+inf`` if unbounded, ``-inf`` if empty."""
    D = np.atleast_2d(np.asarray(directions, dtype=float))
    _check_dim(D.shape[1], Z.dim, "support")
    G, A, h = _lp_data(Z)
    out = lpcore.solve_many(A, Z.b, -h, h, -(D @ G))
    if out is None:
        return np.full(D.shape[0], -np.inf)
    vals = np.array([-o.optimum for o in out])
    return vals + D @ Z.c


def support_points(Z: CZ, directions) -> tuple[np.ndarray, np.ndarray]:
    """Support values and a maximizing point per direction.

    Rows of the point array are NaN where the support is unbounded.
    Raises ``EmptySetError`` for an empty set.
    """
    D = np.atleast_2d(np.asarray(directions, dtype=float))
    _check_dim(D.shape[1], Z.dim, "support")
    G, A, h = _lp_data(Z)
    out = lpcore.solve_many(A, Z.b, -h, h, -(D @ G))
    if out is None:
        raise EmptySetError("support points of an empty set")
    vals = np.empty(D.shape[0])
    pts = np.full(D.shape, np.nan)
    for i, o in enumerate(out):
        if o.optimal:
            pts[i] = G @ o.witness + Z.c
            vals[i] = D[i] @ pts[i]
        else:
            vals[i] = np.inf
    return vals, pts


def support(Z: CZ, direction) -> float:
    return float(support_many(Z, np.atleast_2d(direction))[0])


def interval_hull(Z: CZ) -> Box:
    """Smallest axis-aligned box around ``Z`` (infinite half-widths where unbounded)."""
    n = Z.dim
    s = support_many(Z, np.vstack([np.eye(n), -np.eye(n)]))
    if np.any(np.isneginf(s)):
        raise EmptySetError("interval hull of an empty set")
    upper, lower = s[:n], -s[n:]
    both = np.isfinite(upper) & np.isfinite(lower)
    with np.errstate(invalid="ignore"):
        center = np.where(both, (upper + lower) / 2, Z.c)
        half = np.where(both, np.maximum((upper - lower) / 2, 0.0), np.inf)
    return Box(center, half)
