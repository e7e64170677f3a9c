"""
Property suites behind ``zorssqp verify`` and the acceptance tests.

Each suite returns a list of :class:`Check` records; nothing here raises on
a failed property.
"""

import time
from dataclasses import dataclass

import numpy as np

from .benchmarks.power import (baseline_qp, default_power_spec, max_angle_separation,
                               simulate_network)
from .benchmarks.synthetic import make_synthetic_nlp
from .estimator import ReducedModel, build_exact_model, build_reduced_model
from .experiments import feasible_synthetic_start, power_config, run_power, synthetic_config
from .linalg import thin_qr
from .problem import BlackBoxProblem, EvalCounter, ProblemDims
from .qp import QPStatus, brute_force_qp, solve_reduced_qp
from .solver import SolverConfig, armijo, merit, run
from .subspace import make_rng, sample_subspace
from .theory import gradient_bounds, lipschitz_estimates, merit_constant, projected_residual

__all__ = ["Check", "SUITES", "run_suite"]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return passed, detail, time.perf_counter() - t0


# -- qp-oracle ---------------------------------------------------------------

def random_model(rng, d_max=6, me_max=2, mi_max=5):
    d = int(rng.integers(1, d_max + 1))
    me = int(rng.integers(0, me_max + 1))
    mi = int(rng.integers(0, mi_max + 1))
    L = float(rng.choice([0.5, 1.0, 5.0]))
    return ReducedModel(rng.standard_normal(d), rng.standard_normal((me, d)),
                        rng.standard_normal((mi, d)), rng.standard_normal(me),
                        rng.standard_normal(mi), 0.0, L)


def qp_oracle_check(n_instances=500, seed=2024):
    """Active-set solver against enumeration on random reduced models."""
    def body():
        rng = make_rng(seed)
        status_bad = obj_bad = alpha_bad = 0
        worst_obj = worst_alpha = 0.0
        n_opt = 0
        for _ in range(n_instances):
            m = random_model(rng)
            a, b = solve_reduced_qp(m), brute_force_qp(m)
            if a.status is not b.status:
                status_bad += 1
                continue
            if a.status is QPStatus.OPTIMAL:
                n_opt += 1
                go = abs(m.objective(a.alpha) - m.objective(b.alpha))
                ga = float(np.linalg.norm(a.alpha - b.alpha))
                worst_obj, worst_alpha = max(worst_obj, go), max(worst_alpha, ga)
                obj_bad += go > 1e-8
                alpha_bad += ga > 1e-6
        ok = status_bad == 0 and obj_bad == 0 and alpha_bad == 0
        return ok, (f"{n_instances} models ({n_opt} optimal): status mismatches {status_bad}, "
                    f"max objective gap {worst_obj:.1e}, max |alpha diff| {worst_alpha:.1e}")
    passed, detail, sec = _timed(body)
    within = sec < 30.0
    return [Check("QP oracle equivalence", passed and within,
                  detail + ("" if within else " [runtime over 30 s]"), sec)]


# -- estimator ---------------------------------------------------------------

def _quadratic_affine_problem(n, me, mi, seed):
    rng = make_rng(seed)
    Q = rng.standard_normal((n, n))
    Q = Q @ Q.T / n
    p = rng.standard_normal(n)
    A, a0 = rng.standard_normal((me, n)), rng.standard_normal(me)
    B, b0 = rng.standard_normal((mi, n)), rng.standard_normal(mi)
    return BlackBoxProblem(lambda x: (0.5 * x @ Q @ x + p @ x, A @ x + a0, B @ x + b0),
                           ProblemDims(n, me, mi),
                           grad=lambda x: (Q @ x + p, A, B), name="quadratic-affine")


def _model_error(a, b):
    return float(np.sqrt(np.sum((a.c_hat - b.c_hat) ** 2) + np.sum((a.A_hat - b.A_hat) ** 2)
                         + np.sum((a.B_hat - b.B_hat) ** 2)))


def estimator_checks(seed=7):
    checks = []

    def exactness():
        worst = 0.0
        for k in range(20):
            prob = _quadratic_affine_problem(30, 2, 3, seed + k)
            rng = make_rng(seed + 100 + k)
            x = rng.standard_normal(30)
            U = sample_subspace(30, 5, rng)
            ex = build_exact_model(prob, x, U, 1.0)
            for r in (1e-1, 1e-2, 1e-3):
                worst = max(worst, float(np.max(np.abs(np.concatenate([
                    (build_reduced_model(prob, x, U, r, 1.0).c_hat - ex.c_hat),
                    (build_reduced_model(prob, x, U, r, 1.0).A_hat - ex.A_hat).ravel(),
                    (build_reduced_model(prob, x, U, r, 1.0).B_hat - ex.B_hat).ravel()])))))
        return worst <= 1e-10, f"max entry error {worst:.1e} (quadratic f, affine h, g; r in 1e-1..1e-3)"
    checks.append(Check("two-point exact on quadratic/affine", *_timed(exactness)))

    def slope():
        prob = make_synthetic_nlp()
        rng = make_rng(seed)
        x = 0.05 * rng.standard_normal(prob.n)
        U = sample_subspace(prob.n, 10, rng)
        ex = build_exact_model(prob, x, U, 1.0)
        rs = np.array([1e-1, 1e-2, 1e-3, 1e-4])
        errs = np.array([_model_error(build_reduced_model(prob, x, U, r, 1.0), ex) for r in rs])
        k = float(np.polyfit(np.log(rs), np.log(errs), 1)[0])
        return 1.9 <= k <= 2.1, f"log-log slope {k:.4f} on the n=100 synthetic problem"
    checks.append(Check("two-point error order", *_timed(slope)))
    return checks


# -- subspace ----------------------------------------------------------------

def subspace_checks(n_draws=10_000, seed=11):
    checks = []
    for n, d in ((100, 5), (100, 20), (20, 5)):
        def body(n=n, d=d):
            rng = make_rng(seed + 1000 * n + d)
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            proj = np.empty(n_draws)
            worst = 0.0
            eye = np.eye(d)
            for k in range(n_draws):
                U = sample_subspace(n, d, rng)
                worst = max(worst, float(np.max(np.abs(U.T @ U - eye))))
                proj[k] = np.sum((U.T @ v) ** 2)
            mean = proj.mean()
            se = proj.std(ddof=1) / np.sqrt(n_draws)
            z = (mean - d / n) / se
            ok = worst <= 1e-12 and abs(z) <= 3.0
            return ok, (f"(n={n}, d={d}) mean {mean:.5f} vs d/n {d / n:.5f}, "
                        f"{z:+.2f} s.e.; max |U^T U - I| {worst:.1e}")
        checks.append(Check(f"subspace law n={n} d={d}", *_timed(body)))
    return checks


# -- theory ------------------------------------------------------------------

def merit_decrease_check(T=200, d=10, seed=3, m_ineq=10):
    """Exact-model steps with eta = 1 and L above the sampled merit constant."""
    def body():
        prob = make_synthetic_nlp(100, m_ineq, 0)
        x0 = feasible_synthetic_start(prob.n)
        tau = 100.0
        ell_f, ell_h, ell_g = lipschitz_estimates(prob, x0, radius=1.0, n_pairs=200, seed=seed)
        C = merit_constant(ell_f, ell_h, ell_g, tau)
        L = 1.1 * C
        cfg = SolverConfig(d=d, T=T, L=L, eta=1.0, tau=tau, Lambda=100.0, M=100.0,
                           mode="fixed", model_mode="exact", seed=seed)
        aux = EvalCounter()
        held = []

        def cb(res, state):
            before = merit(prob.evaluate(res.x_prev, aux), tau)
            after = merit(prob.evaluate(state.x, aux), tau)
            held.append(after - before <= -(L - C) * float(res.dx @ res.dx) + 1e-8)

        trace = run(cfg, prob, x0=x0, callback=cb)
        frac = float(np.mean(held)) if held else 0.0
        ok = trace.termination == "completed" and len(held) == T and frac >= 0.99
        return ok, (f"C_hat={C:.2f}, L={L:.2f}; bound held at {sum(held)}/{len(held)} "
                    f"steps ({trace.termination})")
    passed, detail, sec = _timed(body)
    return Check("merit decrease per step", passed and sec < 60, detail, sec)


def residual_bounds_check(T=200, d=10, seed=5, L=5.0):
    """Projected stationarity identity and one-step feasibility bounds."""
    def body():
        prob = make_synthetic_nlp(100, 10, 0)
        cfg = SolverConfig(d=d, T=T, L=L, eta=1.0, mode="fixed", model_mode="exact", seed=seed)
        records = []

        def cb(res, state):
            records.append((res.x_prev, res.U, res.qp.lam, res.qp.mu, res.dx,
                            res.model.L, res.model.h_t, res.model.g_t))

        trace = run(cfg, prob, callback=cb)
        H_h, H_g = gradient_bounds(prob, [r[0] for r in records])
        tol = cfg.qp_tol
        worst_id = 0.0
        bad_h = bad_g = 0
        for x, U, lam, mu, dx, Lt, h, g in records:
            nd = float(np.linalg.norm(dx))
            worst_id = max(worst_id, abs(projected_residual(prob, x, U, lam, mu) - Lt * nd))
            bad_h += np.max(np.abs(h), initial=0.0) > H_h * nd + tol
            bad_g += np.max(np.maximum(g, 0.0), initial=0.0) > H_g * nd + tol
        ok = (trace.termination == "completed" and len(records) == T
              and worst_id <= 1e-7 and bad_h == 0 and bad_g == 0)
        return ok, (f"max | |U^T r| - L|dx| | = {worst_id:.1e}; H_h={H_h:.3f}, H_g={H_g:.3f}; "
                    f"bound failures h:{bad_h} g:{bad_g} over {len(records)} steps")
    passed, detail, sec = _timed(body)
    return Check("one-step residual bounds", passed and sec < 60, detail, sec)


def armijo_contract_check(n_cases=300, seed=9):
    """eta = 0 exactly when D >= 0 or backtracking runs out; decrease otherwise."""
    def body():
        prob = make_synthetic_nlp(20, 5, 1)
        rng = make_rng(seed)
        tau = 10.0
        bad = 0
        zero_cases = pos_cases = 0
        for k in range(n_cases):
            x = 0.5 * rng.standard_normal(prob.n)
            dx = rng.standard_normal(prob.n) * 10 ** rng.uniform(-3, 1)
            D = float(rng.normal() * 10 ** rng.uniform(-2, 2))
            if k % 10 == 0:
                D = 0.0
            mb = int(rng.integers(0, 12))
            res = armijo(prob, x, dx, D, tau, sigma=1e-4, beta=0.5, max_backtracks=mb)
            phi0 = merit(prob.evaluate(x, EvalCounter()), tau)
            if res.eta > 0:
                pos_cases += 1
                phi = merit(prob.evaluate(x + res.eta * dx, EvalCounter()), tau)
                bad += not (D < 0 and phi <= phi0 + 1e-4 * res.eta * D)
            else:
                zero_cases += 1
                # eta = 0 iff D >= 0 or no trial passed
                if D < 0:
                    trials = [0.5 ** j for j in range(mb + 1)]
                    passes = [merit(prob.evaluate(x + e * dx, EvalCounter()), tau)
                              <= phi0 + 1e-4 * e * D for e in trials]
                    bad += any(passes) or not res.no_decrease
        return bad == 0, (f"{n_cases} cases ({pos_cases} with eta > 0, {zero_cases} with eta = 0); "
                          f"violations {bad}")
    return Check("Armijo contract", *_timed(body))


def theory_checks():
    return [merit_decrease_check(), residual_bounds_check(), armijo_contract_check()]


# -- experiments -------------------------------------------------------------

def synthetic_checks(T=2000):
    checks = []
    for mode in ("fixed", "linesearch"):
        def body(mode=mode):
            prob = make_synthetic_nlp()
            trace = run(synthetic_config(mode, T=T), prob)
            first, last = trace.rows[0], trace.rows[-1]
            drop = first.kkt_gap / max(last.kkt_gap, 1e-300)
            ok = (trace.termination == "completed" and last.viol_h <= 1e-3
                  and last.viol_g <= 1e-3 and drop >= 100.0)
            detail = (f"|h|={last.viol_h:.1e}, |g+|={last.viol_g:.1e}, KKT gap "
                      f"{first.kkt_gap:.2e} -> {last.kkt_gap:.2e} ({drop:.1e}x)")
            if mode == "linesearch":
                steps = np.diff(trace.merit)
                mono = bool(np.all(steps <= 0.0))
                ok = ok and mono
                detail += f"; merit nonincreasing: {mono} (max increase {steps.max():.1e})"
            return ok, detail
        passed, detail, sec = _timed(body)
        checks.append(Check(f"synthetic NLP ({mode})", passed, detail, sec))
    return checks


def power_check():
    def body():
        spec = default_power_spec()
        xb = baseline_qp(spec)
        sep_b = max_angle_separation(simulate_network(spec, xb), spec.edges)
        _, tr_ls, sep_ls = run_power(power_config("linesearch"), spec)
        _, tr_fx, sep_fx = run_power(power_config("fixed"), spec)
        balance = abs(float(np.sum(tr_ls.x_final)) - float(np.sum(spec.demand)))
        gap_ls, gap_fx = tr_ls.rows[-1].kkt_gap, tr_fx.rows[-1].kkt_gap
        ok = (sep_b > spec.delta_max and sep_ls <= spec.delta_max + 1e-2
              and balance <= 1e-3 and gap_ls <= gap_fx
              and tr_ls.termination == tr_fx.termination == "completed")
        return ok, (f"delta_max={spec.delta_max}; baseline sep {sep_b:.4f}; LS sep {sep_ls:.4f}, "
                    f"balance {balance:.1e}; KKT gap LS {gap_ls:.2e} vs fixed {gap_fx:.2e} "
                    f"(fixed sep {sep_fx:.4f})")
    passed, detail, sec = _timed(body)
    return Check("network dispatch under angle bound", passed and sec < 600, detail, sec)


def accounting_check(T=15):
    """Identical seeds give identical traces; evaluation counts add up exactly."""
    def body():
        prob = make_synthetic_nlp(30, 5, 2)
        texts = []
        bad = 0
        for mode in ("fixed", "linesearch", "linesearch"):
            cfg = SolverConfig(d=4, T=T, L=5.0, eta=1.0, mode=mode, seed=17)
            trace = run(cfg, prob)
            if mode == "linesearch":
                texts.append(trace.to_csv())
            ev = trace.column("evals_cum")
            rej = trace.column("rejections")
            for t in range(1, len(trace.rows)):
                expect = (1 + rej[t]) * (2 * cfg.d + 1) + trace.ls_evals[t - 1]
                bad += ev[t] - ev[t - 1] != expect
        same = texts[0] == texts[1]
        return same and bad == 0, f"byte-identical traces: {same}; count mismatches: {bad}"
    return Check("determinism and evaluation accounting", *_timed(body))


def experiment_checks():
    return synthetic_checks() + [power_check(), accounting_check()]


SUITES = {
    "qp-oracle": qp_oracle_check,
    "estimator": estimator_checks,
    "subspace": subspace_checks,
    "theory": theory_checks,
    "experiments": experiment_checks,
}


def run_suite(name, echo=print):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    checks = SUITES[name]()
    for c in checks:
        echo(c.line())
    return checks
