"""KKT gap, constraint violations and per-iteration traces."""

import csv
import io
import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .problem import DimensionMismatch, EvalCounter, GradientInfo

__all__ = [
    "TRACE_COLUMNS",
    "TraceRow",
    "SolverTrace",
    "kkt_gap",
    "kkt_terms",
    "violations",
    "fd_gradients",
    "problem_gradients",
]

TRACE_COLUMNS = ("t", "f", "viol_h", "viol_g", "kkt_gap", "step_norm", "eta",
                 "rejections", "evals_cum", "wall_ms")


def kkt_terms(grad_f, J_h, J_g, h, g, lam, mu):
    """
    The four residuals whose maximum is the KKT gap.

    Returns ``(stationarity, |h|_inf, |[g]_+|_inf, |mu * g|_inf)`` with the
    stationarity term in the 2-norm. Negative multiplier noise is clamped to
    zero before the complementarity product.
    """
    grad_f = np.asarray(grad_f, dtype=float)
    n = grad_f.shape[0]
    h = np.asarray(h, dtype=float).reshape(-1)
    g = np.asarray(g, dtype=float).reshape(-1)
    lam = np.asarray(lam, dtype=float).reshape(-1)
    mu = np.asarray(mu, dtype=float).reshape(-1)
    J_h = np.asarray(J_h, dtype=float).reshape(-1, n)
    J_g = np.asarray(J_g, dtype=float).reshape(-1, n)
    if not (J_h.shape[0] == h.shape[0] == lam.shape[0]):
        raise DimensionMismatch("equality blocks disagree in length")
    if not (J_g.shape[0] == g.shape[0] == mu.shape[0]):
        raise DimensionMismatch("inequality blocks disagree in length")
    mu_plus = np.maximum(mu, 0.0)
    stat = np.linalg.norm(grad_f + J_h.T @ lam + J_g.T @ mu)
    viol_h, viol_g = _viol(h, g)
    comp = float(np.max(np.abs(mu_plus * g), initial=0.0))
    return float(stat), viol_h, viol_g, comp


def kkt_gap(grad_f, J_h, J_g, h, g, lam, mu):
    return max(kkt_terms(grad_f, J_h, J_g, h, g, lam, mu))


def _viol(h, g):
    return (float(np.max(np.abs(h), initial=0.0)),
            float(np.max(g, initial=0.0)))


def violations(ev):
    """``(|h|_inf, |[g]_+|_inf)`` of an :class:`Evaluation`; empty blocks give 0."""
    return _viol(ev.h, ev.g)


def fd_gradients(problem, x, radius=1e-6, counter=None):
    """
    Full-space central differences of ``f``, ``h`` and ``g``.

    Costs ``2 n`` evaluations, charged to `counter` (a fresh private counter
    if omitted) and never to the problem's solver counter.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    counter = EvalCounter() if counter is None else counter
    x = np.asarray(x, dtype=float)
    n, me, mi = problem.dims.n, problem.dims.m_e, problem.dims.m_i
    gf = np.empty(n)
    Jh = np.empty((me, n))
    Jg = np.empty((mi, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = radius
        plus = problem.evaluate(x + e, counter)
        minus = problem.evaluate(x - e, counter)
        gf[i] = (plus.f - minus.f) / (2 * radius)
        Jh[:, i] = (plus.h - minus.h) / (2 * radius)
        Jg[:, i] = (plus.g - minus.g) / (2 * radius)
    return GradientInfo(gf, Jh, Jg)


def problem_gradients(problem, x, radius=1e-6, counter=None):
    """Analytic gradients when the problem has them, else :func:`fd_gradients`."""
    if problem.has_gradients:
        return problem.gradients(x)
    return fd_gradients(problem, x, radius, counter)


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


@dataclass
class TraceRow:
    t: int
    f: float
    viol_h: float
    viol_g: float
    kkt_gap: float
    step_norm: float
    eta: float
    rejections: int
    evals_cum: int
    wall_ms: float

    def csv_fields(self):
        return [_fmt(getattr(self, c)) for c in TRACE_COLUMNS]


@dataclass
class SolverTrace:
    rows: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    x_final: np.ndarray = None
    termination: str = "running"
    # per-iteration extras, not serialized to trace.csv
    merit: list = field(default_factory=list)
    ls_evals: list = field(default_factory=list)
    metric_evals: int = 0

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in self.rows:
            w.writerow(row.csv_fields())
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def to_dict(self):
        last = self.rows[-1] if self.rows else None
        return {
            "termination": self.termination,
            "x_final": None if self.x_final is None else [float(v) for v in self.x_final],
            "final": None if last is None else asdict(last),
            "iterations": len(self.rows) - 1,
            "metric_evals": self.metric_evals,
            "config": self.config,
        }

    @classmethod
    def read_csv(cls, path):
        names = [f.name for f in fields(TraceRow)]
        types = {f.name: f.type for f in fields(TraceRow)}
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                rows.append(TraceRow(**{k: (int(rec[k]) if types[k] in (int, "int")
                                            else float(rec[k])) for k in names}))
        return cls(rows=rows)


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
