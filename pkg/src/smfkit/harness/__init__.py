"""Experiment configuration, simulation, drivers and output."""

from .config import BoundCheckConfig, DemoConfig, MonteCarloConfig, SystemConfig, TimingConfig
from .experiments import bound_check, demo_detectable, demo_observable, montecarlo, timing_bench
from .simulate import Trajectory, simulate

__all__ = [
    "BoundCheckConfig",
    "DemoConfig",
    "MonteCarloConfig",
    "SystemConfig",
    "TimingConfig",
    "Trajectory",
    "bound_check",
    "demo_detectable",
    "demo_observable",
    "montecarlo",
    "simulate",
    "timing_bench",
]
