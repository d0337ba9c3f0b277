import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from smfkit.czono import ConstrainedZonotope

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repo")


def random_cz(rng, n=None, n_gen=None, n_con=None, scale=1.0) -> ConstrainedZonotope:
    """Bounded nonempty constrained zonotope; a generator point is planted to keep it feasible."""
    n = int(rng.integers(1, 4)) if n is None else n
    n_gen = int(rng.integers(1, 6)) if n_gen is None else n_gen
    n_con = int(rng.integers(0, min(3, n_gen))) if n_con is None else n_con
    G = rng.standard_normal((n, n_gen)) * scale
    c = rng.standard_normal(n) * scale
    h = rng.uniform(0.2, 2.0, n_gen)
    A = rng.standard_normal((n_con, n_gen))
    xi = rng.uniform(-0.8, 0.8, n_gen) * h
    return ConstrainedZonotope(G, c, A, A @ xi, h)


@st.composite
def czs(draw, n=None, n_gen=None, n_con=None):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_cz(np.random.default_rng(seed), n, n_gen, n_con)


def support_oracle(Z: ConstrainedZonotope, d) -> float:
    """Support value through HiGHS; +inf when unbounded, -inf when empty."""
    d = np.asarray(d, dtype=float)
    bounds = [(-h if np.isfinite(h) else None, h if np.isfinite(h) else None) for h in Z.h]
    res = linprog(
        -(d @ Z.G), A_eq=Z.A if Z.n_con else None, b_eq=Z.b if Z.n_con else None,
        bounds=bounds, method="highs",
    )
    if res.status == 2:
        return -np.inf
    if res.status == 3:
        return np.inf
    assert res.status == 0, res.message
    return float(-res.fun + d @ Z.c)


def unit_directions(n: int, count: int, seed: int = 0) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    D = np.random.default_rng(seed).standard_normal((count, n))
    return D / np.linalg.norm(D, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def report(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
