"""Black-box access to ``min f(x) s.t. h(x) = 0, g(x) <= 0``."""

import threading
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NonFiniteOutput",
    "DimensionMismatch",
    "Unsupported",
    "ProblemDims",
    "Evaluation",
    "EvalCounter",
    "GradientInfo",
    "BlackBoxProblem",
    "evaluate",
    "gradients",
]


class NonFiniteOutput(FloatingPointError):
    """The oracle returned NaN or Inf."""


class DimensionMismatch(ValueError):
    """An input or an oracle output has the wrong shape."""


class Unsupported(NotImplementedError):
    """The problem does not provide analytic gradients."""


@dataclass(frozen=True)
class ProblemDims:
    n: int
    m_e: int = 0
    m_i: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m_e < 0 or self.m_i < 0:
            raise ValueError(f"invalid dimensions {self}")


@dataclass(frozen=True)
class Evaluation:
    """Values ``(f, h, g)`` at one query point."""

    f: float
    h: np.ndarray
    g: np.ndarray


@dataclass(frozen=True)
class GradientInfo:
    grad_f: np.ndarray
    J_h: np.ndarray
    J_g: np.ndarray


class EvalCounter:
    """Thread-safe count of full ``(f, h, g)`` evaluations."""

    def __init__(self):
        self._lock = threading.Lock()
        self.n_full = 0
        self.n_points = 0
        self._seen = set()

    def record(self, x):
        key = np.ascontiguousarray(x, dtype=float).tobytes()
        with self._lock:
            self.n_full += 1
            if key not in self._seen:
                self._seen.add(key)
                self.n_points += 1

    def reset(self):
        with self._lock:
            self.n_full = 0
            self.n_points = 0
            self._seen.clear()

    def __repr__(self):
        return f"EvalCounter(n_full={self.n_full}, n_points={self.n_points})"


class BlackBoxProblem:
    """
    A constrained problem seen only through function values.

    Parameters
    ----------
    fun : callable
        ``fun(x) -> (f, h, g)`` with ``f`` scalar and ``h``, ``g`` sequences of
        lengths ``m_e`` and ``m_i``.
    dims : ProblemDims
    x0 : array_like, optional
        Default starting point, zero if omitted.
    grad : callable, optional
        ``grad(x) -> (grad_f, J_h, J_g)``. Used by metrics and exact-model
        tests only; the zeroth-order solver never calls it.
    name : str, optional
    concurrent_safe : bool, optional
        Whether ``fun`` may be called from several threads at once.
    """

    def __init__(self, fun, dims, x0=None, grad=None, name="problem",
                 concurrent_safe=False):
        self._fun = fun
        self._grad = grad
        self.dims = dims
        self.name = name
        self.concurrent_safe = concurrent_safe
        self.x0 = np.zeros(dims.n) if x0 is None else np.array(x0, dtype=float)
        if self.x0.shape != (dims.n,):
            raise DimensionMismatch(f"x0 has shape {self.x0.shape}, expected ({dims.n},)")
        self.counter = EvalCounter()

    @property
    def n(self):
        return self.dims.n

    @property
    def has_gradients(self):
        return self._grad is not None

    def _check_x(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dims.n,):
            raise DimensionMismatch(f"x has shape {x.shape}, expected ({self.dims.n},)")
        return x

    def evaluate(self, x, counter=None):
        """Evaluate ``(f, h, g)`` at `x`, charging one evaluation to `counter`."""
        x = self._check_x(x)
        f, h, g = self._fun(x.copy())
        f = float(f)
        h = np.asarray(h, dtype=float).reshape(-1)
        g = np.asarray(g, dtype=float).reshape(-1)
        if h.shape[0] != self.dims.m_e or g.shape[0] != self.dims.m_i:
            raise DimensionMismatch(
                f"oracle returned |h|={h.shape[0]}, |g|={g.shape[0]}; "
                f"expected {self.dims.m_e}, {self.dims.m_i}")
        (self.counter if counter is None else counter).record(x)
        if not (np.isfinite(f) and np.all(np.isfinite(h)) and np.all(np.isfinite(g))):
            raise NonFiniteOutput(f"{self.name}: non-finite oracle output at x={x!r}")
        return Evaluation(f, h, g)

    def gradients(self, x):
        if self._grad is None:
            raise Unsupported(f"{self.name} is gradient-free")
        x = self._check_x(x)
        gf, Jh, Jg = self._grad(x.copy())
        n, me, mi = self.dims.n, self.dims.m_e, self.dims.m_i
        gf = np.asarray(gf, dtype=float).reshape(n)
        Jh = np.asarray(Jh, dtype=float).reshape(me, n)
        Jg = np.asarray(Jg, dtype=float).reshape(mi, n)
        return GradientInfo(gf, Jh, Jg)

    def __repr__(self):
        d = self.dims
        return f"BlackBoxProblem({self.name!r}, n={d.n}, m_e={d.m_e}, m_i={d.m_i})"


def evaluate(problem, x):
    return problem.evaluate(x)


def gradients(problem, x):
    return problem.gradients(x)
