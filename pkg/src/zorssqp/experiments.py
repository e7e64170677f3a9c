"""Preset configurations for the two benchmark families."""

import numpy as np
from scipy.optimize import brentq

from .benchmarks.power import (DEFAULT_DELTA_MAX, baseline_qp, default_power_spec,
                               make_power_problem, max_angle_separation, simulate_network)
from .benchmarks.synthetic import make_synthetic_nlp
from .solver import SolverConfig, run

__all__ = [
    "DEFAULT_DELTA_MAX",
    "synthetic_config",
    "power_config",
    "feasible_synthetic_start",
    "run_synthetic",
    "run_power",
]

def synthetic_config(mode="fixed", **overrides):
    """Nonlinear-programming preset: n = 100, d = 10, L = 5, eta = 1."""
    kw = dict(d=10, T=2000, L=5.0, eta=1.0, mode=mode, seed=1)
    kw.update(overrides)
    return SolverConfig(**kw)


def power_config(mode="linesearch", **overrides):
    """Network preset: d = 3 of 6 setpoints, L = 2, 300 iterations."""
    kw = dict(d=3, T=300, L=2.0, mode=mode, seed=1)
    kw.update(overrides)
    return SolverConfig(**kw)


def feasible_synthetic_start(n):
    """The point ``c * ones`` on the cubic equality ``n c + 0.1 n c^3 = 1``."""
    c = brentq(lambda c: n * c + 0.1 * n * c ** 3 - 1.0, 0.0, 1.0, xtol=1e-15)
    return np.full(n, c)


def run_synthetic(config, n=100, m_ineq=10, seed=0, x0=None):
    problem = make_synthetic_nlp(n, m_ineq, seed)
    return problem, run(config, problem, x0=x0)


def run_power(config, spec=None, x0="baseline"):
    """
    Run on the network problem starting from the economic dispatch.

    Returns the problem, the trace and the final max angle separation.
    """
    spec = default_power_spec() if spec is None else spec
    problem = make_power_problem(spec)
    if isinstance(x0, str):
        x0 = baseline_qp(spec) if x0 == "baseline" else problem.x0
    trace = run(config, problem, x0=x0)
    sep = max_angle_separation(simulate_network(spec, trace.x_final), spec.edges)
    return problem, trace, sep
