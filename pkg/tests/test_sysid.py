import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smfkit import sysid
from smfkit.czono import CZ
from smfkit.matlib import spectral_radius
from smfkit.sysid import ConfigError, LinearSystem


def test_observability_index():
    s = sysid.double_integrator()
    assert sysid.observability_index(s.A, s.C) == 2
    assert sysid.observability_index(np.eye(3), np.eye(3)) == 1
    assert sysid.observability_index(np.diag([1.0, 2.0]), [[1.0, 0.0]]) is None


def test_decompose_detectable_example():
    s = sysid.detectable_example()
    dec = sysid.decompose(s.A, s.B, s.C)
    assert dec.n_o == 1 and dec.n_obar == 1 and dec.mu_o == 1
    assert dec.A_obar[0, 0] == pytest.approx(0.5)
    assert abs(dec.A_21[0, 0]) == pytest.approx(1.0)
    assert sysid.is_detectable(dec)


def test_decompose_observable_is_identity():
    s = sysid.double_integrator()
    dec = sysid.decompose(s.A, s.B, s.C)
    assert dec.n_o == 2 and dec.n_obar == 0
    assert np.array_equal(dec.P, np.eye(2))
    assert sysid.is_detectable(dec)


def test_undetectable():
    A = np.array([[0.5, 0.0], [0.0, 2.0]])
    dec = sysid.decompose(A, np.ones((2, 1)), [[1.0, 0.0]])
    assert dec.n_o == 1 and not sysid.is_detectable(dec)


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_decomposition_block_structure(seed, nb):
    n = 6
    s = sysid.random_detectable_system(seed, n, n - nb, 2, 2)
    dec = sysid.decompose(s.A, s.B, s.C)
    P = dec.P
    assert np.allclose(P @ P.T, np.eye(n), atol=1e-10)
    At, Ct = P @ s.A @ P.T, s.C @ P.T
    assert dec.n_o == n - nb
    assert np.allclose(At[: dec.n_o, dec.n_o:], 0, atol=1e-8)
    assert np.allclose(Ct[:, dec.n_o:], 0, atol=1e-8)
    assert spectral_radius(dec.A_obar) <= 0.5 + 1e-8
    assert sysid.observability_index(dec.A_o, dec.C_o) == dec.mu_o


def test_upsilon_scalar():
    # for scalar a the peak is 1 for every gamma >= a, so the infimum is 1 / (1 - a)
    assert sysid.upsilon_inf([[0.5]]) == pytest.approx(2.0, rel=1e-4)
    assert sysid.upsilon_inf([[-0.2]]) == pytest.approx(1.25, rel=1e-4)
    assert sysid.upsilon_inf(np.zeros((0, 0))) == 0.0
    with pytest.raises(ConfigError):
        sysid.upsilon_inf([[1.0]])


def test_upsilon_is_attained_bound():
    F = np.array([[0.5, 3.0], [0.0, 0.4]])
    u = sysid.upsilon_inf(F)
    # no gamma on a fine grid does better
    for g in np.linspace(0.5 + 1e-3, 1 - 1e-3, 50):
        peak = max(np.abs(np.linalg.matrix_power(F, k)).sum(1).max() / g**k for k in range(400))
        assert u <= peak / (1 - g) * (1 + 1e-9)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.95))
def test_peak_scaled_power_finite_stopping(seed, frac):
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((3, 3))
    F *= rng.uniform(0.1, 0.9) / spectral_radius(F)
    gamma = spectral_radius(F) + frac * (1 - spectral_radius(F))
    peak = sysid._peak_scaled_power(F, gamma)
    P, brute = np.eye(3), 1.0
    for _ in range(3000):
        P = P @ (F / gamma)
        brute = max(brute, np.abs(P).sum(1).max())
    assert peak == pytest.approx(brute, rel=1e-9)


def test_oit_bound_scalar_values():
    # A = B = C = 1: numerator sqrt((d_v + d_w)^2 + d_v^2), window matrix [1; 1] has sigma_min sqrt(2)
    assert sysid.oit_bound(1, 1, 1, d_w=2.0, d_v=1.0, delta=1).d_bar == pytest.approx(math.sqrt(10) / math.sqrt(2))
    assert sysid.oit_bound(1, 1, 1, d_w=2.0, d_v=2.0, delta=0).d_bar == pytest.approx(2.0)


def test_oit_bound_double_integrator():
    s = sysid.double_integrator()
    b = sysid.oit_bound(s.A, s.B, s.C, s.d_w, s.d_v, 2)
    O = np.array([[1.0, -2.0], [1.0, -1.0], [1.0, 0.0]])
    assert np.allclose(b.O_delta, O)
    g1 = np.linalg.norm(s.C @ np.linalg.inv(s.A) @ s.B)
    g2 = np.linalg.norm(s.C @ np.linalg.matrix_power(np.linalg.inv(s.A), 2) @ s.B)
    total = (2 + (g1 + g2) * 2) ** 2 + (2 + g1 * 2) ** 2 + 2**2
    sigma = np.linalg.svd(O, compute_uv=False)[-1]
    assert b.d_bar == pytest.approx(math.sqrt(total) / sigma)
    assert b.d_bar == pytest.approx(7.6480019759874818)


def test_oit_bound_rejects_short_window_and_unobservable():
    s = sysid.double_integrator()
    with pytest.raises(ConfigError):
        sysid.oit_bound(s.A, s.B, s.C, 2.0, 2.0, 0)
    with pytest.raises(ConfigError):
        sysid.oit_bound(np.eye(2), np.ones((2, 1)), [[1.0, 0.0]], 2.0, 2.0, 3)


def test_linear_system_validation():
    W, V, X0 = CZ.box([0.0], 1.0), CZ.box([0.0], 1.0), CZ.box([0.0, 0.0], 1.0)
    with pytest.raises(ConfigError):
        LinearSystem(np.zeros((2, 2)), np.ones((2, 1)), np.ones((1, 2)), W, V, X0)
    with pytest.raises(ConfigError):
        LinearSystem(np.eye(2), np.ones((3, 1)), np.ones((1, 2)), W, V, X0)
    with pytest.raises(ConfigError):
        LinearSystem(np.eye(2), np.ones((2, 1)), np.ones((1, 2)), CZ.whole_space(1), V, X0)


def test_noise_diameters():
    s = sysid.random_observable_system(0, 4, 3, 2)
    assert s.d_w == pytest.approx(2 * math.sqrt(3))
    assert s.d_v == pytest.approx(2 * math.sqrt(2))


def test_system_dict_roundtrip():
    s = sysid.detectable_example()
    s2 = LinearSystem.from_dict(s.to_dict())
    assert np.array_equal(s.A, s2.A) and np.array_equal(s.C, s2.C)
    assert np.array_equal(s.X0_true.h, s2.X0_true.h)


def test_system_dict_box_shorthand_and_errors():
    d = {"a": [[1.0]], "b": [[1.0]], "c": [[1.0]], "w": {"lower": [-1], "upper": [1]},
         "v": {"lower": [0], "upper": [1]}, "x0": {"lower": [-1], "upper": [1]}}
    assert LinearSystem.from_dict(d).V.c[0] == 0.5
    with pytest.raises(ConfigError):
        LinearSystem.from_dict({"a": [[1.0]]})


def test_random_systems_are_seeded():
    a = sysid.random_observable_system(3, 5, 2, 2)
    b = sysid.random_observable_system(3, 5, 2, 2)
    assert np.array_equal(a.A, b.A)
    assert sysid.observability_index(a.A, a.C) is not None
    assert spectral_radius(a.A) < 1


def test_random_detectable_system_shape():
    s = sysid.random_detectable_system(1, 10, 8, 10, 10)
    dec = sysid.decompose(s.A, s.B, s.C)
    assert dec.n_o == 8 and sysid.is_detectable(dec)
    with pytest.raises(ConfigError):
        sysid.random_detectable_system(1, 4, 0, 1, 1)
