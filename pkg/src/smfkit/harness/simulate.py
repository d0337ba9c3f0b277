"""Seeded trajectories of a linear system with set-bounded noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..czono import ConstrainedZonotope
from ..sysid import ConfigError, LinearSystem


@dataclass(frozen=True, eq=False)
class Trajectory:
    xs: np.ndarray  # (H+1, n)
    ys: np.ndarray  # (H+1, m)
    ws: np.ndarray  # (H, p)
    vs: np.ndarray  # (H+1, m)
    seed: object

    @property
    def horizon(self) -> int:
        return self.xs.shape[0] - 1


def sample_uniform(Z: ConstrainedZonotope, rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform samples of an unconstrained generator set with bounded generators.

    Exact for boxes (diagonal generators); for other zonotopes the samples are
    images of uniform generator coefficients.
    """
    if Z.n_con:
        raise ConfigError("sampling needs a range without equality constraints")
    if not Z.is_bounded_rep:
        raise ConfigError("sampling needs a bounded range")
    xi = rng.uniform(-1.0, 1.0, (size, Z.n_gen)) * Z.h
    return xi @ Z.G.T + Z.c


def simulate(sys: LinearSystem, horizon: int, seed) -> Trajectory:
    """Noise is drawn step by step, so a shorter horizon gives a prefix of a longer one."""
    rng = np.random.default_rng(seed)
    xs = np.empty((horizon + 1, sys.n))
    vs = np.empty((horizon + 1, sys.m))
    ws = np.empty((horizon, sys.p))
    xs[0] = sample_uniform(sys.X0_true, rng, 1)[0]
    for k in range(horizon + 1):
        vs[k] = sample_uniform(sys.V, rng, 1)[0]
        if k < horizon:
            ws[k] = sample_uniform(sys.W, rng, 1)[0]
            xs[k + 1] = sys.A @ xs[k] + sys.B @ ws[k]
    ys = xs @ sys.C.T + vs
    return Trajectory(xs, ys, ws, vs, seed)
