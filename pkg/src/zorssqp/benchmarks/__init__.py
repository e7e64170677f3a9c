"""Benchmark problems: a synthetic constrained NLP and a transient-stable dispatch."""

from .power import (DEFAULT_DELTA_MAX, InfeasibleDispatch, PowerNetworkSpec, Trajectory,
                    TrajectoryBlowUp, baseline_qp, default_power_spec, make_power_problem,
                    max_angle_separation, simulate_network)
from .synthetic import SyntheticNlpSpec, make_synthetic_nlp

__all__ = [
    "DEFAULT_DELTA_MAX", "InfeasibleDispatch", "PowerNetworkSpec", "Trajectory",
    "TrajectoryBlowUp", "baseline_qp", "default_power_spec", "make_power_problem",
    "max_angle_separation", "simulate_network", "SyntheticNlpSpec", "make_synthetic_nlp",
]
