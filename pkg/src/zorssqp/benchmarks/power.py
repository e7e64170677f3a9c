"""
Fault-disturbed structure-preserving network model.

Generator buses follow second-order swing dynamics, load buses first-order
dynamics, coupled through ``sum_j B_ij sin(theta_i - theta_j)``. The
decision variable is the generator setpoint vector.
"""

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

import numba
import numpy as np

from ..estimator import ReducedModel
from ..problem import BlackBoxProblem, ProblemDims
from ..qp import QPStatus, solve_reduced_qp
from ..subspace import make_rng

__all__ = [
    "DEFAULT_DELTA_MAX",
    "TrajectoryBlowUp",
    "InfeasibleDispatch",
    "PowerNetworkSpec",
    "Trajectory",
    "default_power_spec",
    "simulate_network",
    "max_angle_separation",
    "make_power_problem",
    "baseline_qp",
]

BLOWUP = 1e6
X_SAFETY = 1e3
# Calibrated so the economic dispatch of the default network violates the
# separation bound while feasible dispatches exist (least separation ~0.26).
DEFAULT_DELTA_MAX = 0.30


class TrajectoryBlowUp(FloatingPointError):
    pass


class InfeasibleDispatch(ValueError):
    """Total demand cannot be met within the generator bounds."""


@dataclass(frozen=True)
class PowerNetworkSpec:
    """
    Network, dynamics and dispatch-cost data.

    ``edges`` lists undirected pairs ``(i, j)`` with ``i < j``; ``weights`` and
    ``fault_weights`` hold ``B_ij`` before and during the fault. ``demand`` is
    indexed by load bus in increasing bus order; ``a``, ``b``, ``x_min``,
    ``x_max`` by generator in the order of ``generators``.
    """

    n_buses: int
    generators: tuple
    edges: tuple
    weights: tuple
    fault_weights: tuple
    demand: tuple
    a: tuple
    b: tuple
    x_min: tuple
    x_max: tuple
    M_g: float = 1.0
    D_g: float = 0.5
    D_l: float = 1.0
    t_clear: float = 0.5
    T_horizon: float = 10.0
    dt: float = 0.01
    delta_max: float = DEFAULT_DELTA_MAX
    softmax_temperature: float = None

    def __post_init__(self):
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("duplicate generator buses")
        if not all(0 <= i < self.n_buses for i in self.generators):
            raise ValueError("generator bus out of range")
        for i, j in self.edges:
            if not 0 <= i < j < self.n_buses:
                raise ValueError(f"edge {(i, j)} must satisfy 0 <= i < j < n_buses")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("duplicate edges")
        if not len(self.edges) == len(self.weights) == len(self.fault_weights):
            raise ValueError("edge data lengths disagree")
        ng = len(self.generators)
        if not len(self.a) == len(self.b) == len(self.x_min) == len(self.x_max) == ng:
            raise ValueError("generator data lengths disagree")
        if len(self.demand) != self.n_buses - ng:
            raise ValueError("one demand per load bus required")
        if not all(v > 0 for v in self.a):
            raise ValueError("cost coefficients a_i must be positive")
        if not (self.M_g > 0 and self.D_g > 0 and self.D_l > 0 and self.dt > 0):
            raise ValueError("inertia, damping and dt must be positive")
        if not 0 <= self.t_clear < self.T_horizon:
            raise ValueError("need 0 <= t_clear < T_horizon")

    @property
    def n_gen(self):
        return len(self.generators)

    @property
    def loads(self):
        gens = set(self.generators)
        return tuple(i for i in range(self.n_buses) if i not in gens)

    @property
    def n_steps(self):
        return int(round(self.T_horizon / self.dt))

    @property
    def n_fault_steps(self):
        return int(round(self.t_clear / self.dt))

    def coupling(self, fault=False):
        """Dense symmetric ``B`` (or ``B_fault``)."""
        B = np.zeros((self.n_buses, self.n_buses))
        w = self.fault_weights if fault else self.weights
        for (i, j), v in zip(self.edges, w):
            B[i, j] = B[j, i] = v
        return B

    def to_dict(self):
        out = asdict(self)
        out["edges"] = [list(e) for e in self.edges]
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["edges"] = tuple(tuple(int(v) for v in e) for e in data["edges"])
        for k in ("generators",):
            data[k] = tuple(int(v) for v in data[k])
        for k in ("weights", "fault_weights", "demand", "a", "b", "x_min", "x_max"):
            data[k] = tuple(float(v) for v in data[k])
        return cls(**data)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def default_power_spec(n_buses=20, n_generators=6, seed=0, demand=0.3,
                       fault_fraction=0.3, fault_scale=0.1, edge_weight=1.0,
                       **overrides):
    """
    Ring with second-neighbour chords, evenly spaced generators.

    A seeded ``fault_fraction`` of the edges is weakened by ``fault_scale``
    during the fault; cost slopes ``a_i`` are uniform on ``[0.5, 1.5]``.
    Remaining :class:`PowerNetworkSpec` fields may be overridden by keyword.
    """
    if n_buses < 3 or not 1 <= n_generators < n_buses:
        raise ValueError("need n_buses >= 3 and 1 <= n_generators < n_buses")
    edges = set()
    for i in range(n_buses):
        for k in (1, 2):
            j = (i + k) % n_buses
            edges.add((min(i, j), max(i, j)))
    edges = tuple(sorted(edges))
    rng = make_rng(seed)
    n_fault = int(round(fault_fraction * len(edges)))
    faulted = set(rng.choice(len(edges), size=n_fault, replace=False).tolist())
    weights = tuple(float(edge_weight) for _ in edges)
    fault_weights = tuple(w * (fault_scale if e in faulted else 1.0)
                          for e, w in enumerate(weights))
    gens = tuple(int(k * n_buses // n_generators) for k in range(n_generators))
    a = tuple(float(v) for v in rng.uniform(0.5, 1.5, n_generators))
    fields_ = dict(
        n_buses=n_buses, generators=gens, edges=edges, weights=weights,
        fault_weights=fault_weights, demand=(float(demand),) * (n_buses - n_generators),
        a=a, b=(0.1,) * n_generators, x_min=(0.0,) * n_generators,
        x_max=(2.0,) * n_generators)
    fields_.update(overrides)
    return PowerNetworkSpec(**fields_)


@dataclass
class Trajectory:
    times: np.ndarray
    theta: np.ndarray
    omega: np.ndarray

    def write_csv(self, path, generators=None):
        n = self.theta.shape[1]
        gens = range(self.omega.shape[1]) if generators is None else generators
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"theta_{i}" for i in range(n)]
                       + [f"omega_{i}" for i in gens])
            for k in range(self.times.shape[0]):
                w.writerow([format(v, ".17g") for v in
                            (self.times[k], *self.theta[k], *self.omega[k])])


@numba.njit(cache=True)
def _rhs(theta, omega, x, gen_idx, load_idx, demand, ei, ej, w, M_g, D_g, D_l,
         dtheta, domega):
    flow = np.zeros(theta.shape[0])
    for e in range(ei.shape[0]):
        s = w[e] * np.sin(theta[ei[e]] - theta[ej[e]])
        flow[ei[e]] += s
        flow[ej[e]] -= s
    for k in range(gen_idx.shape[0]):
        i = gen_idx[k]
        dtheta[i] = omega[k]
        domega[k] = (x[k] - D_g * omega[k] - flow[i]) / M_g
    for k in range(load_idx.shape[0]):
        i = load_idx[k]
        dtheta[i] = (-demand[k] - flow[i]) / D_l


@numba.njit(cache=True)
def _rk4(theta0, omega0, x, gen_idx, load_idx, demand, ei, ej, w, w_fault,
         M_g, D_g, D_l, dt, n_steps, n_fault):
    n = theta0.shape[0]
    ng = omega0.shape[0]
    thetas = np.empty((n_steps + 1, n))
    omegas = np.empty((n_steps + 1, ng))
    thetas[0] = theta0
    omegas[0] = omega0
    th = theta0.copy()
    om = omega0.copy()
    k1t = np.empty(n); k2t = np.empty(n); k3t = np.empty(n); k4t = np.empty(n)
    k1o = np.empty(ng); k2o = np.empty(ng); k3o = np.empty(ng); k4o = np.empty(ng)
    for s in range(n_steps):
        ww = w_fault if s < n_fault else w
        _rhs(th, om, x, gen_idx, load_idx, demand, ei, ej, ww, M_g, D_g, D_l, k1t, k1o)
        _rhs(th + 0.5 * dt * k1t, om + 0.5 * dt * k1o, x, gen_idx, load_idx, demand,
             ei, ej, ww, M_g, D_g, D_l, k2t, k2o)
        _rhs(th + 0.5 * dt * k2t, om + 0.5 * dt * k2o, x, gen_idx, load_idx, demand,
             ei, ej, ww, M_g, D_g, D_l, k3t, k3o)
        _rhs(th + dt * k3t, om + dt * k3o, x, gen_idx, load_idx, demand,
             ei, ej, ww, M_g, D_g, D_l, k4t, k4o)
        th = th + (dt / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
        om = om + (dt / 6.0) * (k1o + 2.0 * k2o + 2.0 * k3o + k4o)
        thetas[s + 1] = th
        omegas[s + 1] = om
        if np.max(np.abs(th)) > 1e6 or np.max(np.abs(om)) > 1e6:
            return thetas[: s + 2], omegas[: s + 2], False
    return thetas, omegas, True


def simulate_network(spec, x, theta0=None, omega0=None):
    """
    Classical RK4 on the uniform grid ``0, dt, ..., T_horizon``.

    Steps starting before ``t_clear`` use the fault couplings. The initial
    state is zero unless `theta0` / `omega0` are given.

    Raises
    ------
    TrajectoryBlowUp
        When any state exceeds ``1e6`` in magnitude.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.n_gen,):
        raise ValueError(f"x has shape {x.shape}, expected ({spec.n_gen},)")
    if np.max(np.abs(x), initial=0.0) > X_SAFETY:
        raise ValueError(f"setpoints outside the safety box |x| <= {X_SAFETY}")
    theta0 = np.zeros(spec.n_buses) if theta0 is None else np.asarray(theta0, dtype=float)
    omega0 = np.zeros(spec.n_gen) if omega0 is None else np.asarray(omega0, dtype=float)
    ei = np.array([e[0] for e in spec.edges], dtype=np.int64)
    ej = np.array([e[1] for e in spec.edges], dtype=np.int64)
    thetas, omegas, ok = _rk4(
        theta0, omega0, x, np.array(spec.generators, dtype=np.int64),
        np.array(spec.loads, dtype=np.int64), np.array(spec.demand, dtype=float),
        ei, ej, np.array(spec.weights, dtype=float),
        np.array(spec.fault_weights, dtype=float), float(spec.M_g), float(spec.D_g),
        float(spec.D_l), float(spec.dt), spec.n_steps, spec.n_fault_steps)
    if not ok:
        raise TrajectoryBlowUp(f"state exceeded {BLOWUP:g} at t={(len(thetas) - 1) * spec.dt:g}")
    times = np.arange(spec.n_steps + 1) * spec.dt
    return Trajectory(times, thetas, omegas)


def max_angle_separation(traj, edges, temperature=None):
    """
    ``max_t max_{(i,j)} |theta_i(t) - theta_j(t)|`` over the time grid.

    With `temperature` set, a log-sum-exp upper approximation replaces the
    hard max.
    """
    if len(edges) == 0:
        raise ValueError("edge set is empty")
    ei = np.array([e[0] for e in edges])
    ej = np.array([e[1] for e in edges])
    sep = np.abs(traj.theta[:, ei] - traj.theta[:, ej])
    if temperature is None:
        return float(np.max(sep))
    top = np.max(sep)
    return float(top + temperature * np.log(np.sum(np.exp((sep - top) / temperature))))


def make_power_problem(spec, x0=None):
    """
    Dispatch problem over generator setpoints.

    ``f = sum a_i x_i^2 + b_i x_i``; one equality ``sum x - sum d``;
    inequalities ``x_min - x``, ``x - x_max`` and finally the simulated
    ``max_angle_separation - delta_max``.
    """
    a = np.array(spec.a)
    b = np.array(spec.b)
    lo = np.array(spec.x_min)
    hi = np.array(spec.x_max)
    total = float(np.sum(spec.demand))

    def fun(x):
        f = float(np.sum(a * x ** 2 + b * x))
        h = [np.sum(x) - total]
        if np.isinf(spec.delta_max):
            g_sim = -np.inf
        else:
            traj = simulate_network(spec, x)
            g_sim = max_angle_separation(traj, spec.edges, spec.softmax_temperature) - spec.delta_max
        g = np.concatenate([lo - x, x - hi, [g_sim]])
        if np.isneginf(g[-1]):
            g[-1] = -1.0
        return f, h, g

    if x0 is None:
        x0 = np.full(spec.n_gen, total / spec.n_gen)
    prob = BlackBoxProblem(fun, ProblemDims(spec.n_gen, 1, 2 * spec.n_gen + 1), x0=x0,
                           name="power-network", concurrent_safe=True)
    prob.spec = spec
    return prob


def baseline_qp(spec, tol=1e-10):
    """
    Economic dispatch ignoring the angle constraint.

    ``y_i = sqrt(2 a_i) x_i`` turns the diagonal cost into ``|y|^2 / 2``, so
    the proximal QP solver applies directly with ``L = 1``.

    Raises
    ------
    InfeasibleDispatch
        When demand cannot be met within the bounds.
    """
    a = np.array(spec.a)
    s = np.sqrt(2 * a)
    lo = np.array(spec.x_min)
    hi = np.array(spec.x_max)
    total = float(np.sum(spec.demand))
    ng = spec.n_gen
    D = np.diag(1.0 / s)
    model = ReducedModel(
        c_hat=np.array(spec.b) / s,
        A_hat=(1.0 / s)[None, :],
        B_hat=np.vstack([-D, D]),
        h_t=np.array([-total]),
        g_t=np.concatenate([lo, -hi]),
        f_t=0.0, L=1.0)
    out = solve_reduced_qp(model, tol=tol)
    if out.status is QPStatus.INFEASIBLE:
        raise InfeasibleDispatch(f"demand {total:g} outside [{lo.sum():g}, {hi.sum():g}]")
    if not out.optimal:
        raise RuntimeError(f"baseline QP failed: {out.status.value}")
    return out.alpha / s
