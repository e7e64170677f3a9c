"""Zeroth-order random-subspace SQP with fixed steps or Armijo backtracking."""

import logging
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .estimator import build_exact_model, build_reduced_model, default_radius
from .metrics import SolverTrace, TraceRow, kkt_gap, problem_gradients, violations
from .problem import EvalCounter
from .qp import DEFAULT_TOL, solve_reduced_qp
from .subspace import make_rng, sample_subspace

__all__ = [
    "RejectionBudgetExhausted",
    "SolverConfig",
    "SolverState",
    "StepResult",
    "ArmijoResult",
    "accept",
    "merit",
    "directional_surrogate",
    "armijo",
    "step",
    "run",
]

log = logging.getLogger(__name__)

FIXED = "fixed"
LINESEARCH = "linesearch"
TWO_POINT = "twopoint"
EXACT = "exact"


class RejectionBudgetExhausted(RuntimeError):
    def __init__(self, t, rejections):
        super().__init__(f"iteration {t}: no acceptable subspace after {rejections} draws")
        self.t = t
        self.rejections = rejections


Schedule = Union[float, Sequence[float]]


def _at(schedule, t):
    if np.ndim(schedule) == 0:
        return float(schedule)
    return float(schedule[min(t, len(schedule) - 1)])


@dataclass
class SolverConfig:
    """
    Run parameters.

    ``L`` and ``eta`` are constants or per-iteration sequences (the last entry
    repeats). ``eta=None`` means ``1/L_t``. ``r=None`` means
    ``1e-4 * max(1, |x_t|_inf)``. ``eta`` only matters in fixed-step mode.
    """

    d: int = 10
    T: int = 100
    r: Optional[float] = None
    L: Schedule = 10.0
    eta: Optional[Schedule] = None
    Lambda: float = 100.0
    M: float = 100.0
    tau: float = 100.0
    sigma: float = 1e-4
    beta: float = 0.5
    max_backtracks: int = 30
    max_rejections: int = 100
    seed: int = 0
    mode: str = FIXED
    model_mode: str = TWO_POINT
    qp_tol: float = DEFAULT_TOL
    metrics_radius: float = 1e-6
    timing: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if self.T < 0:
            raise ValueError("T must be nonnegative")
        if self.r is not None and not self.r > 0:
            raise ValueError("r must be positive")
        if not 0 < self.sigma < 1 or not 0 < self.beta < 1:
            raise ValueError("sigma and beta must lie in (0, 1)")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        for name in ("L", "eta"):
            val = getattr(self, name)
            if val is not None and np.any(np.asarray(val, dtype=float) <= 0):
                raise ValueError(f"{name} schedule must be positive")
        if self.mode not in (FIXED, LINESEARCH):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.model_mode not in (TWO_POINT, EXACT):
            raise ValueError(f"unknown model_mode {self.model_mode!r}")
        if self.tau < max(self.Lambda, self.M):
            warnings.warn(f"tau={self.tau} < max(Lambda, M)={max(self.Lambda, self.M)}; "
                          "merit decrease is not guaranteed", stacklevel=3)

    def L_at(self, t):
        return _at(self.L, t)

    def eta_at(self, t):
        if self.eta is None:
            return 1.0 / self.L_at(t)
        return _at(self.eta, t)

    def to_dict(self):
        out = asdict(self)
        for k in ("L", "eta"):
            if out[k] is not None and np.ndim(out[k]) > 0:
                out[k] = [float(v) for v in out[k]]
        return out


@dataclass
class SolverState:
    x: np.ndarray
    t: int
    rng: np.random.Generator
    counter: EvalCounter = field(default_factory=EvalCounter)
    lam: np.ndarray = None
    mu: np.ndarray = None


@dataclass
class StepResult:
    model: object
    qp: object
    U: np.ndarray
    dx: np.ndarray
    eta: float
    rejections: int
    D: Optional[float] = None
    x_prev: np.ndarray = None
    ls_evals: int = 0
    no_decrease: bool = False


class ArmijoResult(NamedTuple):
    eta: float
    evals_used: int
    no_decrease: bool = False
    merit_new: Optional[float] = None


def accept(qp, Lambda, M):
    """Optimal with ``|lam|_inf <= Lambda`` and ``|mu|_inf <= M``."""
    if not qp.optimal:
        return False
    return (np.max(np.abs(qp.lam), initial=0.0) <= Lambda
            and np.max(np.abs(qp.mu), initial=0.0) <= M)


def merit(ev, tau):
    """Exact penalty ``f + tau |h|_1 + tau |[g]_+|_1``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    return float(ev.f + tau * np.sum(np.abs(ev.h)) + tau * np.sum(np.maximum(ev.g, 0.0)))


def directional_surrogate(model, alpha, tau):
    """Model estimate of the directional derivative of the merit along ``U alpha``."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (model.d,):
        raise ValueError(f"alpha has shape {alpha.shape}, expected ({model.d},)")
    D = model.c_hat @ alpha
    D += tau * np.sign(model.h_t) @ (model.A_hat @ alpha)
    D += tau * (model.g_t > 0).astype(float) @ (model.B_hat @ alpha)
    return float(D)


def armijo(problem, x, dx, D, tau, sigma=1e-4, beta=0.5, max_backtracks=30,
           merit0=None, counter=None):
    """
    Backtracking on the merit function from ``eta = 1``.

    Tries ``eta = beta**k`` for ``k = 0..max_backtracks`` and returns the first
    one with ``merit(x + eta dx) <= merit(x) + sigma eta D``. A nonnegative `D`
    returns ``eta = 0`` without evaluating anything; exhausting the trials
    returns ``eta = 0`` with ``no_decrease`` set.

    `merit0` is the merit at `x`; if omitted it costs one extra evaluation.
    """
    if not 0 < sigma < 1 or not 0 < beta < 1:
        raise ValueError("sigma and beta must lie in (0, 1)")
    if D >= 0:
        return ArmijoResult(0.0, 0)
    used = 0
    if merit0 is None:
        merit0 = merit(problem.evaluate(x, counter), tau)
        used += 1
    eta = 1.0
    for _ in range(max_backtracks + 1):
        trial = merit(problem.evaluate(x + eta * dx, counter), tau)
        used += 1
        if trial <= merit0 + sigma * eta * D:
            return ArmijoResult(eta, used, False, trial)
        eta *= beta
    return ArmijoResult(0.0, used, True)


def _model(problem, x, U, config, t, counter):
    L = config.L_at(t)
    if config.model_mode == EXACT:
        return build_exact_model(problem, x, U, L, counter)
    r = default_radius(x) if config.r is None else config.r
    return build_reduced_model(problem, x, U, r, L, counter)


def step(state, config, problem):
    """
    One outer iteration: resample until the reduced QP is accepted, then move.

    Mutates ``state`` (iterate, iteration index, multipliers, RNG, counter).

    Raises
    ------
    RejectionBudgetExhausted
        After ``config.max_rejections`` consecutive rejected subspaces.
    """
    if state.t >= config.T:
        raise ValueError("iteration budget already spent")
    x = state.x
    rejections = 0
    while True:
        U = sample_subspace(problem.n, config.d, state.rng)
        model = _model(problem, x, U, config, state.t, state.counter)
        qp = solve_reduced_qp(model, tol=config.qp_tol)
        if accept(qp, config.Lambda, config.M):
            break
        rejections += 1
        log.debug("t=%d: rejected subspace (%s)", state.t, qp.status.value)
        if rejections >= config.max_rejections:
            raise RejectionBudgetExhausted(state.t, rejections)

    dx = U @ qp.alpha
    result = StepResult(model, qp, U, dx, 0.0, rejections, x_prev=x)
    if config.mode == LINESEARCH:
        D = directional_surrogate(model, qp.alpha, config.tau)
        merit0 = model.f_t + config.tau * (np.sum(np.abs(model.h_t))
                                           + np.sum(np.maximum(model.g_t, 0.0)))
        ls = armijo(problem, x, dx, D, config.tau, config.sigma, config.beta,
                    config.max_backtracks, merit0=merit0, counter=state.counter)
        result.D = D
        result.eta = ls.eta
        result.ls_evals = ls.evals_used
        result.no_decrease = ls.no_decrease
    else:
        result.eta = config.eta_at(state.t)

    state.x = x + result.eta * dx
    state.lam = qp.lam
    state.mu = qp.mu
    state.t += 1
    return result


def _row(problem, x, lam, mu, config, t, step_norm, eta, rejections, evals, t0, metric_counter):
    ev = problem.evaluate(x, metric_counter)
    info = problem_gradients(problem, x, config.metrics_radius, metric_counter)
    viol_h, viol_g = violations(ev)
    gap = kkt_gap(info.grad_f, info.J_h, info.J_g, ev.h, ev.g, lam, mu)
    wall = (time.perf_counter() - t0) * 1e3 if config.timing else 0.0
    row = TraceRow(t, ev.f, viol_h, viol_g, gap, step_norm, eta, rejections, evals, wall)
    return row, merit(ev, config.tau)


def run(config, problem, x0=None, callback=None):
    """
    Run ``config.T`` iterations from `x0` (the problem's default if omitted).

    Row ``t`` of the trace describes ``x_t``; its KKT gap uses the most recent
    accepted multipliers (zero for the initial row). Metric evaluations go to a
    separate counter, so ``evals_cum`` is the solver's own cost.

    `callback(step_result, state)` is called after every iteration.
    """
    x = np.array(problem.x0 if x0 is None else x0, dtype=float)
    me, mi = problem.dims.m_e, problem.dims.m_i
    state = SolverState(x, 0, make_rng(config.seed), EvalCounter(),
                        np.zeros(me), np.zeros(mi))
    metric_counter = EvalCounter()
    trace = SolverTrace(config=config.to_dict())
    t0 = time.perf_counter()
    row, phi = _row(problem, x, state.lam, state.mu, config, 0, 0.0, 0.0, 0, 0, t0,
                    metric_counter)
    trace.rows.append(row)
    trace.merit.append(phi)
    while state.t < config.T:
        try:
            res = step(state, config, problem)
        except RejectionBudgetExhausted as exc:
            log.warning("%s", exc)
            trace.termination = "rejection_budget_exhausted"
            break
        if callback is not None:
            callback(res, state)
        row, phi = _row(problem, state.x, state.lam, state.mu, config, state.t,
                        float(np.linalg.norm(res.dx)), res.eta, res.rejections,
                        state.counter.n_full, t0, metric_counter)
        trace.rows.append(row)
        trace.merit.append(phi)
        trace.ls_evals.append(res.ls_evals)
    else:
        trace.termination = "completed"
    trace.x_final = state.x
    trace.metric_evals = metric_counter.n_full
    return trace
