"""Dense bounded-variable simplex for the LPs that constrained zonotopes need.

Problems have the form::

    minimize    c @ xi
    subject to  A_eq @ xi = b_eq
                lower <= xi <= upper      (bounds may be infinite)

Infinite bounds are handled natively: a nonbasic variable sits at a finite
bound, or at zero when it is free. Phase 1 starts from an all-artificial
basis; in phase 2 the artificials are pinned to ``[0, 0]`` instead of being
removed, which keeps redundant equality rows harmless.

:func:`solve_many` runs phase 1 once and then warm-starts phase 2 for each
objective, which is what interval hulls and support sampling use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .matlib import NumericalFailure

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_AT_LOWER, _AT_UPPER, _FREE, _BASIC = 0, 1, 2, -1


@dataclass(frozen=True)
class LpSettings:
    feas_tol: float = 1e-9
    pivot_tol: float = 1e-11
    opt_tol: float = 1e-9
    max_pivots: int = 10**6
    refactor_every: int = 64
    # consecutive degenerate pivots before switching to Bland's rule
    bland_after: int = 25


DEFAULT_SETTINGS = LpSettings()


@dataclass(frozen=True)
class LpProblem:
    c: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        n = c.size
        A = np.asarray(self.A_eq, dtype=float).reshape(-1, n)
        b = np.asarray(self.b_eq, dtype=float).ravel()
        lo = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)).copy()
        hi = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()
        if A.shape[0] != b.size:
            raise ValueError(f"A_eq has {A.shape[0]} rows but b_eq has {b.size} entries")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("equality data must be finite")
        if np.any(lo > hi) or np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("need lower <= upper for every variable")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A_eq", A)
        object.__setattr__(self, "b_eq", b)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def box(cls, c, lower, upper, A_eq=None, b_eq=None) -> "LpProblem":
        c = np.asarray(c, dtype=float).ravel()
        if A_eq is None:
            A_eq = np.zeros((0, c.size))
            b_eq = np.zeros(0)
        return cls(c, A_eq, b_eq, lower, upper)


@dataclass
class LpOutcome:
    status: str
    optimum: float
    witness: np.ndarray | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


_DONE_OPTIMAL, _DONE_UNBOUNDED, _DONE_BUDGET = 0, 1, 2


@njit(cache=True)
def _pivot_loop(T, x, lo, hi, status, basis, d, opt_tol, pivot_tol, bland_after, budget, degenerate):
    """Primal simplex iterations on the tableau ``T`` (modified in place).

    Stops at optimality, on an unbounded ray, or after ``budget`` basis
    changes so the caller can refactorize. Bound flips do not count toward
    the budget. Returns ``(code, iterations, basis_changes, degenerate)``.
    """
    m, N = T.shape
    lims = np.empty(m)
    iters = 0
    changes = 0
    while changes < budget:
        bland = degenerate >= bland_after
        j = -1
        best = 0.0
        for c in range(N):
            st = status[c]
            if st == _BASIC or hi[c] <= lo[c]:
                continue
            dc = d[c]
            if (dc < -opt_tol and st != _AT_UPPER) or (dc > opt_tol and st != _AT_LOWER):
                if bland:
                    j = c
                    break
                if abs(dc) > best:
                    best = abs(dc)
                    j = c
        if j < 0:
            return _DONE_OPTIMAL, iters, changes, degenerate
        direction = 1.0 if d[j] < 0 else -1.0

        t_row = np.inf
        for i in range(m):
            dxi = -direction * T[i, j]
            b = basis[i]
            if dxi < -pivot_tol:
                lim = (x[b] - lo[b]) / -dxi
            elif dxi > pivot_tol:
                lim = (hi[b] - x[b]) / dxi
            else:
                lim = np.inf
            if lim < 0.0:
                lim = 0.0
            lims[i] = lim
            if lim < t_row:
                t_row = lim
        t_own = hi[j] - lo[j]
        if t_row == np.inf and t_own == np.inf:
            return _DONE_UNBOUNDED, iters, changes, degenerate
        iters += 1

        if t_own <= t_row:
            t = t_own
            for i in range(m):
                x[basis[i]] -= direction * T[i, j] * t
            if direction > 0:
                status[j] = _AT_UPPER
                x[j] = hi[j]
            else:
                status[j] = _AT_LOWER
                x[j] = lo[j]
        else:
            t = t_row
            r = -1
            for i in range(m):
                if lims[i] <= t_row + 1e-12:
                    if r < 0:
                        r = i
                    elif bland:
                        if basis[i] < basis[r]:
                            r = i
                    elif abs(T[i, j]) > abs(T[r, j]):
                        r = i
            for i in range(m):
                x[basis[i]] -= direction * T[i, j] * t
            x[j] += direction * t
            leaving = basis[r]
            if -direction * T[r, j] < 0:
                status[leaving] = _AT_LOWER
                x[leaving] = lo[leaving]
            else:
                status[leaving] = _AT_UPPER
                x[leaving] = hi[leaving]
            pr = T[r, j]
            for c in range(N):
                T[r, c] /= pr
            for i in range(m):
                if i != r:
                    f = T[i, j]
                    if f != 0.0:
                        for c in range(N):
                            T[i, c] -= f * T[r, c]
            dj = d[j]
            for c in range(N):
                d[c] -= dj * T[r, c]
            basis[r] = j
            status[j] = _BASIC
            changes += 1
        degenerate = degenerate + 1 if t <= 1e-12 else 0
    return _DONE_BUDGET, iters, changes, degenerate


class _Simplex:
    """Tableau state shared between phase 1 and any number of phase-2 solves."""

    def __init__(self, A, b, lower, upper, settings: LpSettings):
        self.s = settings
        m, n = A.shape
        self.m, self.n = m, n
        lo = np.concatenate([lower, np.zeros(m)])
        hi = np.concatenate([upper, np.full(m, np.inf)])
        x = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper, 0.0))
        status = np.where(
            np.isfinite(lower), _AT_LOWER, np.where(np.isfinite(upper), _AT_UPPER, _FREE)
        )
        resid = b - A @ x
        sign = np.where(resid >= 0, 1.0, -1.0)
        self.M = np.hstack([A * sign[:, None], np.eye(m)])
        self.rhs = b * sign
        self.T = self.M.copy()
        self.x = np.concatenate([x, np.abs(resid)])
        self.lo, self.hi = lo, hi
        self.status = np.concatenate([status, np.full(m, _BASIC)])
        self.basis = np.arange(n, n + m)
        self.pivots = 0
        self._since_refactor = 0
        self._moved = True

    # -- bookkeeping -------------------------------------------------------

    def _basic_values(self) -> np.ndarray:
        nonbasic = self.status != _BASIC
        return self.rhs - self.M[:, nonbasic] @ self.x[nonbasic]

    def _set_basic(self, xb) -> None:
        self.x[self.basis] = np.clip(xb, self.lo[self.basis], self.hi[self.basis])
        self._moved = False

    def refactor(self):
        if self.m == 0:
            return
        B = self.M[:, self.basis]
        rhs = np.hstack([self.M, self._basic_values()[:, None]])
        try:
            sol = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError:
            return
        self.T = np.ascontiguousarray(sol[:, :-1])
        self._set_basic(sol[:, -1])
        self._since_refactor = 0

    def refresh_point(self):
        """Recompute basic values from the nonbasic ones; the tableau is kept."""
        if self.m == 0 or not self._moved:
            return
        B = self.M[:, self.basis]
        try:
            self._set_basic(np.linalg.solve(B, self._basic_values()))
        except np.linalg.LinAlgError:
            return

    def pin_artificials(self):
        art = slice(self.n, self.n + self.m)
        self.hi[art] = 0.0
        self.x[art] = 0.0

    # -- main loop ---------------------------------------------------------

    def run(self, cost: np.ndarray) -> str:
        s = self.s
        cost = np.ascontiguousarray(cost, dtype=float)
        d = cost - cost[self.basis] @ self.T
        degenerate = 0
        while True:
            budget = max(1, s.refactor_every - self._since_refactor)
            code, iters, changes, degenerate = _pivot_loop(
                self.T, self.x, self.lo, self.hi, self.status, self.basis, d,
                s.opt_tol, s.pivot_tol, s.bland_after, budget, degenerate,
            )
            self.pivots += iters
            self._since_refactor += changes
            self._moved = self._moved or iters > 0
            if self.pivots > s.max_pivots:
                raise NumericalFailure("simplex pivot cap exceeded")
            if code == _DONE_OPTIMAL:
                return OPTIMAL
            if code == _DONE_UNBOUNDED:
                return UNBOUNDED
            self.refactor()
            d = cost - cost[self.basis] @ self.T

    # -- phases -------------------------------------------------------------

    def phase_one(self) -> float:
        cost = np.zeros(self.n + self.m)
        cost[self.n:] = 1.0
        self.run(cost)
        self.refactor()
        return float(self.x[self.n:].sum())

    def phase_two(self, c: np.ndarray) -> LpOutcome:
        cost = np.concatenate([c, np.zeros(self.m)])
        status = self.run(cost)
        witness = self.x[: self.n].copy()
        if status == UNBOUNDED:
            return LpOutcome(UNBOUNDED, -np.inf, witness)
        self.refresh_point()
        witness = self.x[: self.n].copy()
        return LpOutcome(OPTIMAL, float(c @ witness), witness)


def _infeasibility_tol(b: np.ndarray, settings: LpSettings) -> float:
    scale = max(1.0, float(np.max(np.abs(b), initial=0.0)))
    return settings.feas_tol * scale


def _start(A, b, lower, upper, settings):
    lp = _Simplex(A, b, lower, upper, settings)
    infeas = lp.phase_one()
    if infeas > _infeasibility_tol(b, settings):
        return None
    lp.pin_artificials()
    return lp


def solve(p: LpProblem, settings: LpSettings = DEFAULT_SETTINGS) -> LpOutcome:
    """Minimize ``p.c @ xi`` over the feasible set of ``p``."""
    lp = _start(p.A_eq, p.b_eq, p.lower, p.upper, settings)
    if lp is None:
        return LpOutcome(INFEASIBLE, np.inf, None)
    return lp.phase_two(p.c)


def feasible(p: LpProblem, settings: LpSettings = DEFAULT_SETTINGS) -> bool:
    return _start(p.A_eq, p.b_eq, p.lower, p.upper, settings) is not None


def feasible_point(A_eq, b_eq, lower, upper, settings: LpSettings = DEFAULT_SETTINGS):
    """A feasible point of the constraint system, or ``None`` if there is none."""
    A_eq = np.asarray(A_eq, dtype=float)
    lp = _start(A_eq, np.asarray(b_eq, dtype=float), np.asarray(lower, float), np.asarray(upper, float), settings)
    if lp is None:
        return None
    return lp.x[: lp.n].copy()


def solve_many(A_eq, b_eq, lower, upper, objectives, settings: LpSettings = DEFAULT_SETTINGS):
    """Minimize each row of ``objectives`` over one shared feasible set.

    Phase 1 runs once; each phase-2 solve starts from the previous optimal
    basis. Returns ``None`` when the set is infeasible.
    """
    A_eq = np.asarray(A_eq, dtype=float)
    b_eq = np.asarray(b_eq, dtype=float)
    lp = _start(A_eq, b_eq, np.asarray(lower, float), np.asarray(upper, float), settings)
    if lp is None:
        return None
    return [lp.phase_two(np.asarray(c, dtype=float)) for c in np.atleast_2d(objectives)]
