"""Experiment drivers: the two demos, Monte-Carlo runs, timing and the bound check."""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import czono, filters, metrics, sysid
from ..czono import ConstrainedZonotope as CZ
from ..czono import EmptySetError
from ..matlib import rank
from .config import BoundCheckConfig, DemoConfig, MonteCarloConfig, TimingConfig
from .records import Row, TrialRecord
from .simulate import Trajectory, simulate

LABELS = ("alice", "bob", "carol")
GUESSES = {
    "alice": ([0.0, 0.0], [4.0, 4.0]),
    "bob": ([-4.0, -4.0], [4.0, 4.0]),
    "carol": ([-1.0, -1.0], [1.0, 1.0]),
}
PAIRS = (("alice", "bob"), ("alice", "carol"), ("bob", "carol"))
# a realization where the three estimates coincide with the two-step tower at k = 6
OBSERVABLE_DEMO_SEED = 5
DETECTABLE_DEMO_SEED = 0


def measure(Z, x_true, trial: int, k: int, time_ns: int = 0, hull=None, known_empty: bool | None = None) -> Row:
    """Metrics of one estimate against the true state."""
    ngen, ncon = Z.n_gen, Z.n_con
    nan = float("nan")
    if known_empty:
        return Row(trial, k, nan, nan, nan, False, True, time_ns, ngen, ncon)
    try:
        hull = czono.interval_hull(Z) if hull is None else hull
    except EmptySetError:
        return Row(trial, k, nan, nan, nan, False, True, time_ns, ngen, ncon)
    if not hull.bounded:
        inf = float("inf")
        return Row(trial, k, inf, inf, inf, czono.contains_point(Z, x_true), False, time_ns, ngen, ncon)
    gap, _ = metrics.gap_bound_to_state(hull, x_true)
    return Row(
        trial, k, metrics.diameter_hull(hull), metrics.diameter_inf_hull(hull), gap,
        czono.contains_point(Z, x_true), False, time_ns, ngen, ncon,
    )


def default_delta_bar(sys: sysid.LinearSystem, dec: sysid.ObservabilityDecomposition) -> int:
    """Observable-block state count minus its measurement rank, plus three."""
    if dec.n_obar == 0:
        return sys.n - rank(sys.C) + 3
    return dec.n_o - rank(dec.C_o) + 3


# -- two-state demos --------------------------------------------------------------------------


@dataclass
class DemoResult:
    system: sysid.LinearSystem
    dec: sysid.ObservabilityDecomposition
    trajectory: Trajectory
    delta_bar: int
    records: dict
    # (H+1, 3) support-sampled Hausdorff distances for PAIRS; nan if a set is empty
    gaps: np.ndarray
    estimates_at_check: dict = field(default_factory=dict)
    oit_at_check: CZ | None = None
    oit_gaps: dict = field(default_factory=dict)
    carol_phases: list = field(default_factory=list)

    def max_gap(self, k: int) -> float:
        return float(np.max(self.gaps[k]))


def _gap_or_inf(Z1, Z2, grid) -> float:
    try:
        return metrics.hausdorff_lower(Z1, Z2, grid)
    except (ValueError, EmptySetError):
        # unbounded or empty on one side: no finite distance
        return float("inf")


def _run_demo(sys: sysid.LinearSystem, cfg: DemoConfig, default_db: int, default_seed: int) -> DemoResult:
    dec = sysid.decompose(sys.A, sys.B, sys.C)
    db = default_db if cfg.delta_bar is None else cfg.delta_bar
    seed = default_seed if cfg.seed is None else cfg.seed
    traj = simulate(sys, cfg.horizon, seed)
    grid = metrics.DirectionGrid.for_dim(sys.n, cfg.grid)
    guesses = {name: CZ.interval(*GUESSES[name]) for name in LABELS}
    states = {
        "alice": filters.ClassicalSmfState.fresh(guesses["alice"]),
        "bob": filters.ClassicalSmfState.fresh(guesses["bob"]),
        "carol": filters.oitcz_init(sys, dec, db, cfg.epsilon, guesses["carol"], cfg.refine_prior),
    }
    records = {name: TrialRecord(i, name) for i, name in enumerate(LABELS)}
    gaps = np.full((cfg.horizon + 1, len(PAIRS)), np.nan)
    result = DemoResult(sys, dec, traj, db, records, gaps)
    for k in range(cfg.horizon + 1):
        y, x = traj.ys[k], traj.xs[k]
        est = {}
        for i, name in enumerate(LABELS):
            if name == "carol":
                states[name] = filters.oitcz_step(states[name], y, sys)
                result.carol_phases.append(states[name].phase)
                est[name] = states[name].Z
            else:
                states[name] = filters.classical_step(states[name], y, sys)
                est[name] = states[name].posterior
            row = measure(est[name], x, i, k, known_empty=getattr(states[name], "empty", None))
            records[name].rows.append(row)
        prof = {name: metrics.support_profile(Z, grid) for name, Z in est.items() if not records[name].rows[-1].empty}
        for j, (a, b) in enumerate(PAIRS):
            if a in prof and b in prof:
                gaps[k, j] = float(np.max(np.abs(prof[a] - prof[b])))
        if k == cfg.check_k:
            result.estimates_at_check = dict(est)
            if k >= cfg.oit_delta:
                tower = filters.build_oit(sys, traj.ys[: k + 1], cfg.oit_delta).tower
                result.oit_at_check = tower
                result.oit_gaps = {name: _gap_or_inf(Z, tower, grid) for name, Z in est.items()}
    return result


def demo_observable(cfg: DemoConfig | None = None) -> DemoResult:
    cfg = DemoConfig() if cfg is None else cfg
    sys = sysid.double_integrator() if cfg.system is None else cfg.system
    return _run_demo(sys, cfg, default_db=2, default_seed=OBSERVABLE_DEMO_SEED)


def demo_detectable(cfg: DemoConfig | None = None) -> DemoResult:
    cfg = DemoConfig(horizon=30) if cfg is None else cfg
    sys = sysid.detectable_example() if cfg.system is None else cfg.system
    return _run_demo(sys, cfg, default_db=4, default_seed=DETECTABLE_DEMO_SEED)


# -- Monte-Carlo --------------------------------------------------------------------------------


@dataclass
class TrialSummary:
    trial: int
    delta_bar: int
    nonempty: bool
    contained_after: bool
    bounded: bool
    # first step from which the true state stays inside the estimate (None if never)
    first_inclusion: int | None

    @property
    def passed(self) -> bool:
        return self.nonempty and self.contained_after and self.bounded


@dataclass
class MonteCarloResult:
    config: MonteCarloConfig
    records: list
    summaries: list

    def pass_rate(self) -> float:
        return float(np.mean([s.passed for s in self.summaries])) if self.summaries else 0.0

    def rate(self, attr: str) -> float:
        return float(np.mean([getattr(s, attr) for s in self.summaries])) if self.summaries else 0.0

    def aggregate(self, column: str = "diam_hull") -> np.ndarray:
        """Per-step (k, min, mean, max) of ``column`` over trials, ignoring empty rows."""
        data = np.array([rec.column(column) for rec in self.records], dtype=float)
        with np.errstate(all="ignore"):
            ks = np.arange(data.shape[1])
            return np.column_stack([ks, np.nanmin(data, 0), np.nanmean(data, 0), np.nanmax(data, 0)])


def trial_system(cfg: MonteCarloConfig, trial: int):
    """System, trajectory and initial guess of one trial; depends only on (seed, trial)."""
    s_sys, s_traj, s_guess = np.random.SeedSequence([cfg.seed, trial]).spawn(3)
    rng_sys = np.random.default_rng(s_sys)
    if cfg.kind == "observable":
        sys = sysid.random_observable_system(rng_sys, cfg.n, cfg.p, cfg.m)
    else:
        sys = sysid.random_detectable_system(rng_sys, cfg.n, cfg.n_o, cfg.p, cfg.m)
    if cfg.x0_half != 10.0:
        X0 = CZ.box(np.zeros(cfg.n), cfg.x0_half)
        sys = sysid.LinearSystem(sys.A, sys.B, sys.C, sys.W, sys.V, X0)
    traj = simulate(sys, cfg.horizon, np.random.default_rng(s_traj))
    c = np.random.default_rng(s_guess).uniform(-cfg.guess_offset, cfg.guess_offset, cfg.n)
    guess = CZ.box(c, cfg.x0_half)
    return sys, traj, guess


def summarize_trial(rec: TrialRecord, delta_bar: int, horizon: int) -> TrialSummary:
    empty = rec.column("empty").astype(bool)
    contains = rec.column("contains").astype(bool)
    diam = rec.column("diam_hull")
    start = 2 * delta_bar
    mid = horizon // 2
    first = None
    for k in range(len(contains) - 1, -1, -1):
        if not contains[k]:
            break
        first = k
    if start <= mid and not empty.any():
        bounded = bool(np.max(diam[mid:]) <= 1.1 * np.max(diam[start:mid + 1]))
    else:
        bounded = not empty.any()
    return TrialSummary(
        rec.trial, delta_bar, bool(not empty.any()), bool(contains[start:].all()), bounded, first,
    )


def run_trial(cfg: MonteCarloConfig, trial: int):
    sys, traj, guess = trial_system(cfg, trial)
    dec = sysid.decompose(sys.A, sys.B, sys.C)
    db = default_delta_bar(sys, dec) if cfg.delta_bar is None else cfg.delta_bar
    state = filters.oitcz_init(sys, dec, db, cfg.epsilon, guess, cfg.refine_prior)
    rec = TrialRecord(trial, cfg.kind)
    for k in range(cfg.horizon + 1):
        t0 = time.perf_counter_ns()
        state = filters.oitcz_step(state, traj.ys[k], sys)
        dt = time.perf_counter_ns() - t0 if cfg.record_time else 0
        rec.rows.append(measure(state.Z, traj.xs[k], trial, k, dt, hull=state.hull))
    return rec, summarize_trial(rec, db, cfg.horizon)


def worker_count(requested: int | None, jobs: int) -> int:
    cap = os.environ.get("SMFKIT_THREADS")
    n = requested or (int(cap) if cap else os.cpu_count() or 1)
    if cap:
        n = min(n, int(cap))
    return max(1, min(n, jobs))


def montecarlo(cfg: MonteCarloConfig | None = None) -> MonteCarloResult:
    cfg = MonteCarloConfig() if cfg is None else cfg
    workers = worker_count(cfg.workers, cfg.trials)
    trials = list(range(cfg.trials))
    if workers == 1:
        out = [run_trial(cfg, t) for t in trials]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(run_trial, [cfg] * len(trials), trials))
    out.sort(key=lambda o: o[0].trial)
    return MonteCarloResult(cfg, [o[0] for o in out], [o[1] for o in out])


# -- timing ---------------------------------------------------------------------------------------


@dataclass
class TimingResult:
    delta_bar: int
    oit_time_ns: np.ndarray
    classical_time_ns: np.ndarray
    oit_ngen: np.ndarray
    classical_ngen: np.ndarray
    classical_ncon: np.ndarray
    expected_gen_slope: int
    expected_con_slope: int
    warmup: int

    def _window_mean(self, t: np.ndarray, lo: int, hi: int) -> float:
        lo = max(lo, self.warmup)
        return float(np.mean(t[lo:hi + 1]))

    def oit_ratio(self, late=(80, 100)) -> float:
        """Mean late-window step time over mean early-window step time."""
        db = self.delta_bar
        early = self._window_mean(self.oit_time_ns, db, db + 20)
        return self._window_mean(self.oit_time_ns, *late) / early

    def classical_ratio(self, late=(80, 100)) -> float:
        db = self.delta_bar
        early = self._window_mean(self.classical_time_ns, db, db + 20)
        return self._window_mean(self.classical_time_ns, *late) / early

    def slopes(self) -> tuple[set, set]:
        return set(np.diff(self.classical_ngen).tolist()), set(np.diff(self.classical_ncon).tolist())

    def linear_growth(self) -> bool:
        g, c = self.slopes()
        return g == {self.expected_gen_slope} and c == {self.expected_con_slope}

    def records(self):
        out = []
        for trial, (times, ngen) in enumerate(
            [(self.oit_time_ns, self.oit_ngen), (self.classical_time_ns, self.classical_ngen)]
        ):
            rec = TrialRecord(trial, ("oitcz", "classical")[trial])
            for k, (t, g) in enumerate(zip(times, ngen)):
                ncon = int(self.classical_ncon[k]) if trial == 1 else 0
                nan = float("nan")
                rec.rows.append(Row(trial, k, nan, nan, nan, False, False, int(t), int(g), ncon))
            out.append(rec)
        return out


def timing_bench(cfg: TimingConfig | None = None) -> TimingResult:
    """Per-step wall time of both filters; each step keeps its fastest repeat."""
    cfg = TimingConfig() if cfg is None else cfg
    sys = sysid.random_observable_system(cfg.seed, cfg.n, cfg.p, cfg.m)
    traj = simulate(sys, cfg.horizon, cfg.seed)
    dec = sysid.decompose(sys.A, sys.B, sys.C)
    db = default_delta_bar(sys, dec) if cfg.delta_bar is None else cfg.delta_bar
    H = cfg.horizon
    oit_t = np.full(H + 1, np.iinfo(np.int64).max)
    cl_t = np.full(H + 1, np.iinfo(np.int64).max)
    oit_g = np.zeros(H + 1, dtype=int)
    cl_g = np.zeros(H + 1, dtype=int)
    cl_c = np.zeros(H + 1, dtype=int)
    clock = time.perf_counter_ns
    for _ in range(cfg.repeats):
        state = filters.oitcz_init(sys, dec, db, 1e-3, sys.X0_true, refine_prior=False)
        for k in range(H + 1):
            t0 = clock()
            state = filters.oitcz_step(state, traj.ys[k], sys)
            oit_t[k] = min(oit_t[k], clock() - t0)
            oit_g[k] = state.Z.n_gen
        cl = filters.ClassicalSmfState.fresh(sys.X0_true)
        for k in range(H + 1):
            t0 = clock()
            cl = filters.classical_step(cl, traj.ys[k], sys, check_empty=False)
            cl_t[k] = min(cl_t[k], clock() - t0)
            cl_g[k], cl_c[k] = cl.posterior.n_gen, cl.posterior.n_con
    return TimingResult(
        db, oit_t, cl_t, oit_g, cl_g, cl_c,
        expected_gen_slope=sys.W.n_gen + sys.V.n_gen,
        expected_con_slope=sys.m,
        warmup=cfg.warmup,
    )


# -- OIT diameter bound ------------------------------------------------------------------------


@dataclass
class BoundCheckResult:
    # rows of (trial, n, p, m, delta, k, set diameter, hull diameter, bound)
    rows: np.ndarray

    def violations(self, column: int = 6) -> int:
        return int(np.sum(self.rows[:, column] > self.rows[:, 8] * (1 + 1e-9)))

    def worst_ratio(self, column: int = 6) -> float:
        return float(np.max(self.rows[:, column] / self.rows[:, 8]))


def bound_check(cfg: BoundCheckConfig | None = None) -> BoundCheckResult:
    """Diameter of the windowed OIT against its a-priori bound on random systems.

    Both the set diameter (largest width) and the interval-hull diameter are
    recorded; only the former is covered by the bound, the hull can exceed it
    by up to a factor sqrt(n).
    """
    cfg = BoundCheckConfig() if cfg is None else cfg
    rows = []
    for trial in range(cfg.trials):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, trial]))
        n = int(rng.integers(2, cfg.max_n + 1))
        p = int(rng.integers(1, n + 1))
        m = int(rng.integers(1, n + 1))
        sys = sysid.random_observable_system(rng, n, p, m)
        mu = sysid.observability_index(sys.A, sys.C)
        delta = mu - 1 + int(rng.integers(0, cfg.extra_delta + 1))
        bound = sysid.oit_bound(sys.A, sys.B, sys.C, sys.d_w, sys.d_v, delta).d_bar
        traj = simulate(sys, cfg.horizon, rng)
        grid = metrics.DirectionGrid.for_dim(n, cfg.directions, seed=trial)
        for k in range(delta, cfg.horizon + 1):
            tower = filters.build_oit(sys, traj.ys[: k + 1], delta).tower
            rows.append((trial, n, p, m, delta, k, metrics.diameter_width(tower, grid),
                         metrics.diameter_hull(tower), bound))
    return BoundCheckResult(np.array(rows, dtype=float))
