"""Set-membership filters on constrained zonotopes.

``classical_step`` is the exact predict/update recursion. Its estimate can
become empty when the initial guess is inconsistent with the data, and empty
estimates stay empty.

``oitcz_step`` is the windowed filter. For the first ``delta_bar`` steps it
runs the exact recursion, resetting from a growing cube over the observable
coordinates when the estimate empties. After that it restarts every step
from a prior that is unbounded in the observable coordinates, ``delta_bar``
steps back. The unobservable coordinates of that prior come from a box whose
center is propagated through the stable hidden dynamics and whose radius
accounts for the accumulated input from the observable part.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import czono
from .czono import Box, ConstrainedZonotope
from .matlib import NumericalFailure, matrix_norm
from .sysid import ConfigError, LinearSystem, ObservabilityDecomposition, is_detectable, upsilon_inf

TraceHook = Callable[[int, str, dict], None]

MAX_RESET_ALPHA = 2.0**64


# -- classical recursion -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClassicalSmfState:
    prior: ConstrainedZonotope
    posterior: ConstrainedZonotope | None = None
    k: int = -1
    empty: bool = False

    @classmethod
    def fresh(cls, X0_guess: ConstrainedZonotope) -> "ClassicalSmfState":
        return cls(prior=X0_guess)


def classical_step(state: ClassicalSmfState, y, sys: LinearSystem, check_empty: bool = True) -> ClassicalSmfState:
    """One predict/update step; the first call only updates the initial guess."""
    k = state.k + 1
    prior = state.prior if k == 0 else czono.predict(state.posterior, sys)
    post = czono.update(prior, sys.C, y, sys.V)
    if state.empty:
        empty = True
    else:
        empty = czono.is_empty(post) if check_empty else False
    return ClassicalSmfState(prior=prior, posterior=post, k=k, empty=empty)


def run_classical(sys: LinearSystem, X0_guess: ConstrainedZonotope, ys, check_empty: bool = True):
    state = ClassicalSmfState.fresh(X0_guess)
    out = []
    for y in ys:
        state = classical_step(state, y, sys, check_empty)
        out.append(state)
    return out


# -- OIT-CZ filter ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OitCzState:
    dec: ObservabilityDecomposition
    delta_bar: int
    epsilon: float
    upsilon_inf: float
    X0_guess: ConstrainedZonotope
    refine_prior: bool = False
    k: int = -1
    Z: ConstrainedZonotope | None = None
    prior: ConstrainedZonotope | None = None
    hull: Box | None = None
    phase: str = "init"
    reset_alpha: float | None = None
    # measurements y_{max(0, k - delta_bar)} .. y_k
    window: tuple = ()
    # time index -> unobservable box used as the prior at that time
    T_ring: dict = field(default_factory=dict)
    # time index -> interval hull of the estimate (only for OIT-phase estimates)
    hull_ring: dict = field(default_factory=dict)
    ell: float = 0.0
    c_obar: np.ndarray | None = None
    d_inf_ref: float = 0.0
    obar_power: np.ndarray | None = None


def oitcz_init(
    sys: LinearSystem,
    dec: ObservabilityDecomposition,
    delta_bar: int,
    epsilon: float,
    X0_guess: ConstrainedZonotope,
    refine_prior: bool = False,
) -> OitCzState:
    if not is_detectable(dec):
        raise ConfigError("system is not detectable")
    if delta_bar < dec.mu_o - 1:
        raise ConfigError(f"delta_bar must be at least mu_o - 1 = {dec.mu_o - 1}")
    if not epsilon > 0:
        raise ConfigError("epsilon must be positive")
    if X0_guess.dim != sys.n or not X0_guess.is_bounded_rep:
        raise ConfigError("initial guess must be a bounded set in the state space")
    return OitCzState(
        dec=dec,
        delta_bar=int(delta_bar),
        epsilon=float(epsilon),
        upsilon_inf=upsilon_inf(dec.A_obar),
        X0_guess=X0_guess,
        refine_prior=refine_prior,
        obar_power=np.eye(dec.n_obar),
    )


def _fold(Z0: ConstrainedZonotope, sys: LinearSystem, ys):
    """Prior and posterior at the last measurement, starting from prior ``Z0``."""
    prior = Z0
    post = czono.update(prior, sys.C, ys[0], sys.V)
    for y in ys[1:]:
        prior = czono.predict(post, sys)
        post = czono.update(prior, sys.C, y, sys.V)
    return prior, post


def _from_transformed(dec: ObservabilityDecomposition, obs: ConstrainedZonotope, hidden: ConstrainedZonotope):
    """``P^{-1} (obs x hidden)`` as a set in the original coordinates."""
    return czono.linear_image(dec.P_inv, czono.cartesian_product(obs, hidden))


def _obar_hull(dec: ObservabilityDecomposition, Z: ConstrainedZonotope) -> Box:
    if dec.n_obar == 0:
        return Box(np.zeros(0), np.zeros(0))
    return czono.interval_hull(czono.linear_image(dec.P_obar, Z))


def _reset(state: OitCzState, sys: LinearSystem, ys):
    dec = state.dec
    hidden = czono.linear_image(dec.P_obar, state.X0_guess)
    alpha = 1.0
    while alpha <= MAX_RESET_ALPHA:
        cube = ConstrainedZonotope.box(np.zeros(dec.n_o), alpha)
        prior, post = _fold(_from_transformed(dec, cube, hidden), sys, ys)
        if not czono.is_empty(post):
            return prior, post, alpha
        alpha *= 2
    raise NumericalFailure("reset cube exceeded its size cap")


def _window_prior(state: OitCzState, i: int) -> ConstrainedZonotope:
    dec = state.dec
    T = state.T_ring[i]
    hidden = ConstrainedZonotope.box(T.center, T.half_widths)
    hull = state.hull_ring.get(i) if state.refine_prior else None
    if hull is None:
        obs = ConstrainedZonotope.whole_space(dec.n_o)
        return _from_transformed(dec, obs, hidden)
    # P_o applied to the hull box, kept as a generator image for exactness
    obs = czono.linear_image(dec.P_o, hull.to_cz())
    return _from_transformed(dec, obs, hidden)


def oitcz_step(state: OitCzState, y, sys: LinearSystem, trace: TraceHook | None = None) -> OitCzState:
    """Advance the windowed filter by one measurement."""
    dec, db = state.dec, state.delta_bar
    k = state.k + 1
    y = np.atleast_1d(np.asarray(y, dtype=float))
    window = (state.window + (y,))[-(db + 1):]
    T_ring = {i: v for i, v in state.T_ring.items() if i > k - db - 1}
    hull_ring = {i: v for i, v in state.hull_ring.items() if i > k - db - 1}
    upd: dict = {}

    if k < db:
        prior = state.X0_guess if k == 0 else czono.predict(state.Z, sys)
        Z = czono.update(prior, sys.C, y, sys.V)
        phase, alpha = "classical", None
        if czono.is_empty(Z):
            # window still holds every measurement since time 0 here
            prior, Z, alpha = _reset(state, sys, list(window))
            phase = "reset"
        T_ring[k] = _obar_hull(dec, prior)
        upd.update(prior=prior, reset_alpha=alpha)
    else:
        i = k - db
        Z = czono.filter_image(_window_prior(state, i), sys, window)
        phase = "oit"
        if dec.n_obar:
            ell, c_obar, power = state.ell, state.c_obar, state.obar_power
            d_ref = state.d_inf_ref
            if k == db:
                h = _obar_hull(dec, Z)
                c_obar = h.center
                d_ref = float(2 * np.max(h.half_widths))
                ell = 0.0
                power = np.eye(dec.n_obar)
            alpha_k = matrix_norm(power, "inf") * d_ref + state.upsilon_inf * ell + state.epsilon
            T_ring[k] = Box(c_obar.copy(), np.full(dec.n_obar, alpha_k))
            drive = czono.minkowski_sum(
                czono.linear_image(dec.A_21 @ dec.P_o, Z),
                czono.linear_image(dec.B_obar, sys.W),
            )
            h_in = czono.interval_hull(drive)
            ell = max(float(np.max(h_in.half_widths)), ell)
            c_obar = dec.A_obar @ c_obar + h_in.center
            upd.update(ell=ell, c_obar=c_obar, d_inf_ref=d_ref, obar_power=dec.A_obar @ power)
        else:
            T_ring[k] = Box(np.zeros(0), np.zeros(0))
        upd.update(prior=None, reset_alpha=None)

    hull = None
    if state.refine_prior and k >= db:
        hull = czono.interval_hull(Z)
        hull_ring[k] = hull

    new = replace(
        state, k=k, Z=Z, hull=hull, phase=phase, window=window,
        T_ring=T_ring, hull_ring=hull_ring, **upd,
    )
    if trace is not None:
        trace(k, phase, Z.to_dict())
    return new


def run_oitcz(sys: LinearSystem, X0_guess, ys, delta_bar: int, epsilon: float = 1e-3,
              refine_prior: bool = False, dec: ObservabilityDecomposition | None = None):
    from .sysid import decompose

    dec = decompose(sys.A, sys.B, sys.C) if dec is None else dec
    state = oitcz_init(sys, dec, delta_bar, epsilon, X0_guess, refine_prior)
    out = []
    for y in ys:
        state = oitcz_step(state, y, sys)
        out.append(state)
    return out


# -- observation-information tower ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OitSets:
    observation_sets: list
    tower: ConstrainedZonotope
    evolution: ConstrainedZonotope | None = None


def observation_set(sys: LinearSystem, y_i, steps: int) -> ConstrainedZonotope:
    """States at time ``i + steps`` compatible with ``y_i`` alone."""
    O = czono.measurement_set(sys.C, y_i, sys.V)
    for _ in range(steps):
        O = czono.predict(O, sys)
    return O


def state_evolution_set(sys: LinearSystem, X0_guess: ConstrainedZonotope, k: int) -> ConstrainedZonotope:
    E = X0_guess
    for _ in range(k):
        E = czono.predict(E, sys)
    return E


def build_oit(sys: LinearSystem, ys, delta: int, X0_guess=None, k: int | None = None) -> OitSets:
    """Tower over the last ``delta + 1`` measurements in ``ys`` (the last one is time ``k``).

    The tower intersects each observation set separately, so it contains the
    windowed filter image and is in general larger than it.
    """
    ys = list(ys)
    if delta < 0 or len(ys) < delta + 1:
        raise ValueError("need at least delta + 1 measurements")
    window = ys[len(ys) - delta - 1:]
    sets = [observation_set(sys, y, delta - j) for j, y in enumerate(window)]
    tower = sets[0]
    for O in sets[1:]:
        tower = czono.intersect(tower, O)
    evolution = None
    if X0_guess is not None:
        evolution = state_evolution_set(sys, X0_guess, len(ys) - 1 if k is None else k)
    return OitSets(sets, tower, evolution)
