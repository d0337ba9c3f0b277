"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line (collected in the pytest terminal summary)
and asserts the criterion at its stated tolerance and time budget.
"""

import time

import numpy as np
import pytest

from conftest import random_cz, unit_directions
from smfkit import czono, filters, matlib, sysid
from smfkit.czono import CZ
from smfkit.harness import experiments as ex
from smfkit.harness.config import BoundCheckConfig, DemoConfig, MonteCarloConfig, TimingConfig
from smfkit.harness.simulate import simulate


def _dominated(inner, outer, D, tol=1e-7):
    return bool(np.all(czono.support_many(inner, D) <= czono.support_many(outer, D) + tol))


@pytest.fixture(scope="module", autouse=True)
def compiled_kernels():
    # compile the LP kernel once so that criterion timings measure the algorithms
    czono.support(CZ.box([0.0], 1.0), [1.0])


@pytest.fixture(scope="module")
def observable_demo():
    t0 = time.perf_counter()
    res = ex.demo_observable(DemoConfig())
    return res, time.perf_counter() - t0


def test_criterion_1_ill_posed_guess(acceptance_report):
    t0 = time.perf_counter()
    s = sysid.scalar_ill_posed()
    ys = simulate(s, 20, 0).ys.copy()
    ys[0] = -1.0
    states = filters.run_classical(s, CZ.interval([0.0], [2.0]), ys)
    flags = [st.empty and czono.is_empty(st.posterior) for st in states]
    dt = time.perf_counter() - t0
    ok = all(flags) and dt < 1.0
    acceptance_report(1, ok, f"empty at {sum(flags)}/{len(flags)} steps, {dt:.2f} s")
    assert ok


def test_criterion_2_observable_demo_agreement(observable_demo, acceptance_report):
    res, dt = observable_demo
    pair = res.max_gap(6)
    tower = max(res.oit_gaps.values())
    ok = pair <= 1e-6 and tower <= 1e-6 and dt < 10.0
    acceptance_report(2, ok, f"k=6 pairwise gap {pair:.2e}, gap to delta=2 tower {tower:.2e}, "
                             f"seed {res.trajectory.seed}, {dt:.1f} s")
    assert ok


def test_observable_demo_ordering(observable_demo):
    # the tightest guess gives the smallest estimate early on, and nothing empties
    res, _ = observable_demo
    est = ex.demo_observable(DemoConfig(horizon=1, check_k=1)).estimates_at_check
    D = unit_directions(2, 90)
    assert _dominated(est["alice"], est["bob"], D)
    assert not any(np.any(rec.column("empty")) for rec in res.records.values())


def test_criterion_3_oit_diameter_bound(acceptance_report):
    t0 = time.perf_counter()
    res = ex.bound_check(BoundCheckConfig(trials=100, max_n=6, horizon=50))
    dt = time.perf_counter() - t0
    n = res.rows[:, 1]
    hull_over = res.violations(column=7)
    # the interval hull may exceed the set diameter by at most sqrt(n)
    hull_ok = bool(np.all(res.rows[:, 7] <= np.sqrt(n) * res.rows[:, 8] * (1 + 1e-9)))
    ok = res.violations() == 0 and hull_ok and dt < 120.0
    acceptance_report(3, ok, f"set diameter over bound at {res.violations()}/{len(res.rows)} (trial, k) pairs, "
                             f"worst ratio {res.worst_ratio():.4f}; interval-hull diameter over bound at "
                             f"{hull_over} pairs (worst {res.worst_ratio(7):.4f}, within sqrt(n)), {dt:.1f} s")
    assert ok


def test_criterion_4_detectable_demo_convergence(acceptance_report):
    t0 = time.perf_counter()
    res = ex.demo_detectable(DemoConfig(horizon=30))
    dt = time.perf_counter() - t0
    nonempty = not any(np.any(rec.column("empty")) for rec in res.records.values())
    g0, g30 = res.max_gap(0), res.max_gap(30)
    ok = nonempty and g30 <= 0.1 * g0 and dt < 10.0
    acceptance_report(4, ok, f"all nonempty={nonempty}, gap k=0 {g0:.4g}, k=30 {g30:.4g} "
                             f"(ratio {g30 / g0:.3f}), {dt:.1f} s")
    assert ok


def _montecarlo_line(res, dt):
    firsts = [s.first_inclusion for s in res.summaries if s.first_inclusion is not None]
    return (f"pass {res.pass_rate():.2f} (nonempty {res.rate('nonempty'):.2f}, contained {res.rate('contained_after'):.2f}, "
            f"bounded {res.rate('bounded'):.2f}) over {len(res.summaries)} trials, latest first inclusion "
            f"k={max(firsts) if firsts else None}, {dt:.0f} s")


def test_criterion_5_observable_montecarlo(acceptance_report):
    t0 = time.perf_counter()
    res = ex.montecarlo(MonteCarloConfig(kind="observable", n=10, p=10, m=10, trials=100, horizon=100))
    dt = time.perf_counter() - t0
    ok = res.rate("nonempty") == 1.0 and res.pass_rate() >= 0.99 and dt < 600.0
    acceptance_report(5, ok, _montecarlo_line(res, dt))
    assert ok


def test_criterion_6_detectable_montecarlo(acceptance_report):
    t0 = time.perf_counter()
    res = ex.montecarlo(MonteCarloConfig(kind="detectable", n=10, n_o=8, p=10, m=10, epsilon=1e-3,
                                         trials=100, horizon=100))
    dt = time.perf_counter() - t0
    ok = res.pass_rate() >= 0.99 and dt < 600.0
    acceptance_report(6, ok, _montecarlo_line(res, dt))
    assert ok


def test_criterion_7_complexity_trend(acceptance_report):
    t0 = time.perf_counter()
    res = ex.timing_bench(TimingConfig(n=10, p=10, m=10, horizon=100))
    dt = time.perf_counter() - t0
    ratio = res.oit_ratio((80, 100))
    g, c = res.slopes()
    ok = ratio <= 1.5 and res.linear_growth() and dt < 300.0
    acceptance_report(7, ok, f"step time ratio {ratio:.3f} (classical {res.classical_ratio((80, 100)):.1f}); "
                             f"generator increments {sorted(g)} vs {res.expected_gen_slope}, constraint increments "
                             f"{sorted(c)} vs {res.expected_con_slope}, {dt:.1f} s")
    assert ok


# -- criterion 8: property suites over seeded random instances ----------------------------

N_INSTANCES = 200


def _subset_dominance(rng):
    n = int(rng.integers(1, 4))
    S1 = random_cz(rng, n=n)
    # shift S2 onto a point of S1 so the intersection is nonempty
    S2 = random_cz(rng, n=n)
    S2 = czono.translate(S2, czono.feasible_point(S1) - czono.feasible_point(S2))
    T = random_cz(rng, n=n)
    lhs = czono.minkowski_sum(czono.intersect(S1, S2), T)
    rhs = czono.intersect(czono.minkowski_sum(S1, T), czono.minkowski_sum(S2, T))
    return _dominated(lhs, rhs, unit_directions(n, 16, int(rng.integers(1 << 30))))


def _linear_map_of_sums(rng):
    n = int(rng.integers(1, 4))
    S1, S2 = random_cz(rng, n=n), random_cz(rng, n=n)
    M = rng.standard_normal((int(rng.integers(1, 4)), n))
    lhs = czono.linear_image(M, czono.minkowski_sum(S1, S2))
    rhs = czono.minkowski_sum(czono.linear_image(M, S1), czono.linear_image(M, S2))
    D = unit_directions(M.shape[0], 16, int(rng.integers(1 << 30)))
    return bool(np.allclose(czono.support_many(lhs, D), czono.support_many(rhs, D), atol=1e-7))


def _penrose(rng):
    m, n = int(rng.integers(1, 8)), int(rng.integers(1, 8))
    r = int(rng.integers(0, min(m, n) + 1))
    F = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
    P = matlib.pinv(F)
    tol = 1e-8 * max(1.0, np.abs(F).max()) * max(1.0, np.abs(P).max()) ** 2
    return bool(
        np.allclose(F @ P @ F, F, atol=tol) and np.allclose(P @ F @ P, P, atol=tol)
        and np.allclose((F @ P).T, F @ P, atol=tol) and np.allclose((P @ F).T, P @ F, atol=tol)
    )


def _outer_bounds(rng):
    n = int(rng.integers(1, 4))
    s = sysid.random_observable_system(rng, n, int(rng.integers(1, 3)), int(rng.integers(1, 3)))
    k = int(rng.integers(0, 5))
    traj = simulate(s, k, rng)
    post = filters.run_classical(s, s.X0_true, traj.ys)[-1].posterior
    D = unit_directions(n, 16, int(rng.integers(1 << 30)))
    outer = [filters.observation_set(s, traj.ys[i], k - i) for i in range(k + 1)]
    outer.append(filters.state_evolution_set(s, s.X0_true, k))
    return all(_dominated(post, O, D, tol=1e-6) for O in outer)


def _image_vs_fold(rng):
    n, p, m = int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 3))
    s = sysid.LinearSystem(np.eye(n) + 0.3 * rng.standard_normal((n, n)), rng.standard_normal((n, p)),
                           rng.standard_normal((m, n)), CZ.box(np.zeros(p), 1.0), random_cz(rng, n=m),
                           CZ.box(np.zeros(n), 1.0))
    Z0 = random_cz(rng, n=n)
    ys = [rng.standard_normal(m) for _ in range(int(rng.integers(1, 5)))]
    a = czono.filter_image(Z0, s, ys)
    b = czono.update(Z0, s.C, ys[0], s.V)
    for y in ys[1:]:
        b = czono.update(czono.predict(b, s), s.C, y, s.V)
    return all(np.allclose(x, y, atol=1e-9) for x, y in zip((a.G, a.c, a.A, a.b, a.h), (b.G, b.c, b.A, b.b, b.h)))


def test_criterion_8_property_suites(acceptance_report):
    t0 = time.perf_counter()
    suites = {"subset dominance": _subset_dominance, "linear map of sums": _linear_map_of_sums, "Penrose": _penrose,
              "outer bounds": _outer_bounds, "image vs fold": _image_vs_fold}
    failures = {}
    for j, (name, check) in enumerate(suites.items()):
        failures[name] = sum(not check(np.random.default_rng([j, i])) for i in range(N_INSTANCES))
    dt = time.perf_counter() - t0
    ok = not any(failures.values()) and dt < 300.0
    detail = ", ".join(f"{name} {N_INSTANCES - f}/{N_INSTANCES}" for name, f in failures.items())
    acceptance_report(8, ok, f"{detail}, {dt:.1f} s")
    assert ok
