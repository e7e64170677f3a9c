"""
Command-line front end.

Subcommands ``run``, ``sweep``, ``baseline`` and ``verify``. Configuration is
an INI file with ``[solver]``, ``[problem]`` and ``[output]`` sections;
command-line flags override file values. Exit codes: 0 success, 1 bad
configuration, 2 solver failure.
"""

import argparse
import configparser
import csv
import dataclasses
import hashlib
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .benchmarks.power import (InfeasibleDispatch, PowerNetworkSpec, TrajectoryBlowUp,
                               baseline_qp, default_power_spec, make_power_problem,
                               max_angle_separation, simulate_network)
from .benchmarks.synthetic import make_synthetic_nlp
from .experiments import feasible_synthetic_start
from .metrics import dump_json
from .problem import NonFiniteOutput
from .solver import RejectionBudgetExhausted, SolverConfig, run
from .verify import SUITES, run_suite

__all__ = ["main", "load_config", "config_hash", "build_problem", "cmd_run", "cmd_sweep",
           "cmd_baseline", "cmd_verify", "ConfigError"]

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2
SOLVER_FAILURES = (RejectionBudgetExhausted, TrajectoryBlowUp, NonFiniteOutput,
                   InfeasibleDispatch)

_SOLVER_FIELDS = {f.name: f for f in dataclasses.fields(SolverConfig)}
_SYNTHETIC_KEYS = {"n": int, "m_ineq": int, "seed": int}
_POWER_KEYS = {"n_buses": int, "n_generators": int, "seed": int, "demand": float,
               "fault_fraction": float, "fault_scale": float, "edge_weight": float}
_POWER_OVERRIDES = {"M_g": float, "D_g": float, "D_l": float, "t_clear": float,
                    "T_horizon": float, "dt": float, "delta_max": float,
                    "softmax_temperature": float}
_X0_CHOICES = {"synthetic": ("default", "feasible"), "power": ("baseline", "equal")}


class ConfigError(ValueError):
    pass


def _solver_value(name, text):
    text = text.strip()
    if name in ("mode", "model_mode"):
        return text
    if name == "timing":
        return text.lower() in ("1", "true", "yes", "on")
    if text.lower() == "none":
        if name in ("r", "eta"):
            return None
        raise ConfigError(f"[solver] {name} cannot be none")
    if name in ("L", "eta"):
        parts = [float(v) for v in text.split(",")]
        return parts[0] if len(parts) == 1 else parts
    if isinstance(_SOLVER_FIELDS[name].default, int) and not isinstance(
            _SOLVER_FIELDS[name].default, bool):
        return int(text)
    return float(text)


def load_config(path=None, overrides=None):
    """
    Read an INI file and apply overrides.

    Returns a plain dict ``{"solver": {...}, "problem": {...}, "output": {...}}``
    holding only parsed values, which is also what the manifest records.
    Every unknown key is an error.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep "L" and "T" as written
    if path is not None:
        try:
            found = parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file: {exc}") from exc
        if not found:
            raise ConfigError(f"cannot read config file {path}")
    for sec in parser.sections():
        if sec not in ("solver", "problem", "output"):
            raise ConfigError(f"unknown section [{sec}]")
    raw_solver = dict(parser["solver"]) if parser.has_section("solver") else {}
    raw_problem = dict(parser["problem"]) if parser.has_section("problem") else {}
    raw_output = dict(parser["output"]) if parser.has_section("output") else {}
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k == "out":
            raw_output["dir"] = str(v)
        else:
            raw_solver[k] = str(v)

    try:
        solver = {}
        for k, v in raw_solver.items():
            if k not in _SOLVER_FIELDS:
                raise ConfigError(f"unknown [solver] key {k!r}")
            solver[k] = _solver_value(k, v)
        kind = raw_problem.pop("kind", "synthetic").strip()
        if kind not in _X0_CHOICES:
            raise ConfigError(f"unknown problem kind {kind!r}")
        problem = {"kind": kind}
        x0 = raw_problem.pop("x0", _X0_CHOICES[kind][0]).strip()
        if x0 not in _X0_CHOICES[kind]:
            raise ConfigError(f"x0 for {kind} must be one of {_X0_CHOICES[kind]}")
        problem["x0"] = x0
        if kind == "power" and "spec_file" in raw_problem:
            problem["spec_file"] = raw_problem.pop("spec_file").strip()
        allowed = _SYNTHETIC_KEYS if kind == "synthetic" else {**_POWER_KEYS, **_POWER_OVERRIDES}
        for k, v in raw_problem.items():
            if k not in allowed:
                raise ConfigError(f"unknown [problem] key {k!r} for kind {kind}")
            problem[k] = allowed[k](v)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    output = {"dir": raw_output.pop("dir", "runs/out")}
    if raw_output:
        raise ConfigError(f"unknown [output] keys {sorted(raw_output)}")
    return {"solver": solver, "problem": problem, "output": output}


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def config_hash(config):
    """SHA-256 of the config as sorted-key JSON; independent of key order."""
    blob = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def solver_config(config):
    try:
        return SolverConfig(**config["solver"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver settings: {exc}") from exc


def power_spec(pconf):
    if "spec_file" in pconf:
        with open(pconf["spec_file"]) as fh:
            spec = PowerNetworkSpec.from_dict(json.load(fh))
        extra = {k: v for k, v in pconf.items() if k in _POWER_OVERRIDES}
        return dataclasses.replace(spec, **extra) if extra else spec
    kw = {k: v for k, v in pconf.items() if k in _POWER_KEYS or k in _POWER_OVERRIDES}
    return default_power_spec(**kw)


def build_problem(pconf):
    """
    Problem, starting point, identifier and content hash for a [problem] section.
    """
    try:
        if pconf["kind"] == "synthetic":
            kw = {k: pconf[k] for k in _SYNTHETIC_KEYS if k in pconf}
            prob = make_synthetic_nlp(**kw)
            x0 = feasible_synthetic_start(prob.n) if pconf["x0"] == "feasible" else prob.x0
            spec = dataclasses.asdict(prob.spec)
            ident = "synthetic-n{n}-m{m_ineq}-s{seed}".format(**spec)
            digest = config_hash(spec)
            return prob, x0, ident, digest
        spec = power_spec(pconf)
    except (TypeError, ValueError, OSError, KeyError) as exc:
        raise ConfigError(f"invalid problem settings: {exc}") from exc
    prob = make_power_problem(spec)
    x0 = baseline_qp(spec) if pconf["x0"] == "baseline" else prob.x0
    return prob, x0, f"power-{spec.n_buses}bus-{spec.n_gen}gen", spec.digest()


def _write_series(path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for vals in zip(*columns):
            w.writerow([v if isinstance(v, str) else format(v, ".17g")
                        if isinstance(v, float) else v for v in vals])


def _plotdata(trace, outdir):
    pd = outdir / "plotdata"
    pd.mkdir(exist_ok=True)
    t = [r.t for r in trace.rows]
    _write_series(pd / "objective.csv", ["t", "f"], [t, [r.f for r in trace.rows]])
    _write_series(pd / "violation.csv", ["t", "viol_h", "viol_g"],
                  [t, [r.viol_h for r in trace.rows], [r.viol_g for r in trace.rows]])
    _write_series(pd / "kkt_gap.csv", ["t", "kkt_gap"], [t, [r.kkt_gap for r in trace.rows]])


def _run_one(config, outdir):
    """Shared body of ``run`` and each ``sweep`` worker. Returns an exit code."""
    outdir = Path(outdir)
    cfg = solver_config(config)
    try:
        prob, x0, ident, digest = build_problem(config["problem"])
    except InfeasibleDispatch as exc:
        log.error("%s", exc)
        return EXIT_SOLVER
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {"trace": str(outdir / "trace.csv"), "summary": str(outdir / "summary.json"),
             "plotdata": str(outdir / "plotdata")}
    if config["problem"]["kind"] == "power":
        paths["trajectory"] = str(outdir / "trajectory.csv")
    manifest = {
        "config": _jsonable(config),
        "config_hash": config_hash(config),
        "problem": {"id": ident, "hash": digest},
        "mode": cfg.mode,
        "seed": cfg.seed,
        "version": __version__,
        "paths": paths,
    }
    dump_json(manifest, outdir / "manifest.json")

    code = EXIT_OK
    try:
        trace = run(cfg, prob, x0=x0)
    except SOLVER_FAILURES as exc:
        log.error("solver failure: %s", exc)
        dump_json({"manifest": manifest, "termination": type(exc).__name__,
                   "error": str(exc)}, outdir / "summary.json")
        return EXIT_SOLVER
    if trace.termination != "completed":
        code = EXIT_SOLVER
    trace.write_csv(outdir / "trace.csv")
    _plotdata(trace, outdir)
    summary = _jsonable(trace.to_dict())
    summary["manifest"] = manifest
    summary["evals"] = {"solver": trace.rows[-1].evals_cum, "metrics": trace.metric_evals}
    if config["problem"]["kind"] == "power":
        try:
            traj = simulate_network(prob.spec, trace.x_final)
        except TrajectoryBlowUp as exc:
            log.error("final dispatch diverges: %s", exc)
            code = EXIT_SOLVER
        else:
            traj.write_csv(outdir / "trajectory.csv", prob.spec.generators)
            summary["max_separation"] = max_angle_separation(traj, prob.spec.edges)
    dump_json(summary, outdir / "summary.json")
    log.info("%s: %s after %d iterations, kkt_gap %.3e", outdir, trace.termination,
             len(trace.rows) - 1, trace.rows[-1].kkt_gap)
    return code


def _guard(fn, *args):
    try:
        return fn(*args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG


def cmd_run(config_file, overrides=None):
    def body():
        config = load_config(config_file, overrides)
        return _run_one(config, config["output"]["dir"])
    return _guard(body)


def cmd_sweep(config_file, seeds, workers=1, overrides=None):
    """Independent runs over `seeds`, each in ``<out>/seed_<k>``; worst exit code wins."""
    def body():
        base = load_config(config_file, overrides)
        solver_config(base)
        root = Path(base["output"]["dir"])
        jobs = []
        for s in seeds:
            cfg = json.loads(json.dumps(base))
            cfg["solver"]["seed"] = int(s)
            cfg["output"]["dir"] = str(root / f"seed_{s}")
            jobs.append(cfg)
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            codes = list(pool.map(lambda c: _guard(_run_one, c, c["output"]["dir"]), jobs))
        for s, c in zip(seeds, codes):
            print(f"seed {s}: exit {c}")
        return max(codes, default=EXIT_OK)
    return _guard(body)


def cmd_baseline(config_file, out=None):
    """Economic dispatch without the angle bound, simulated and summarized."""
    def body():
        config = load_config(config_file, {"out": out})
        if config["problem"]["kind"] != "power":
            raise ConfigError("baseline needs a power problem")
        try:
            spec = power_spec(config["problem"])
        except (TypeError, ValueError, OSError, KeyError) as exc:
            raise ConfigError(f"invalid problem settings: {exc}") from exc
        outdir = Path(config["output"]["dir"])
        outdir.mkdir(parents=True, exist_ok=True)
        try:
            x = baseline_qp(spec)
            traj = simulate_network(spec, x)
        except (InfeasibleDispatch, TrajectoryBlowUp) as exc:
            log.error("%s", exc)
            return EXIT_SOLVER
        traj.write_csv(outdir / "trajectory.csv", spec.generators)
        sep = max_angle_separation(traj, spec.edges)
        report = {"x": [float(v) for v in x], "max_separation": sep,
                  "delta_max": _jsonable(spec.delta_max),
                  "satisfies_bound": bool(sep <= spec.delta_max),
                  "spec_hash": spec.digest()}
        dump_json(report, outdir / "baseline.json")
        print(f"baseline max separation {sep:.6f} (delta_max {spec.delta_max})")
        return EXIT_OK
    return _guard(body)


def cmd_verify(suites):
    names = list(SUITES) if suites == ["all"] else suites
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        log.error("unknown suite(s) %s; choose from %s", unknown, sorted(SUITES))
        return EXIT_CONFIG
    failed = 0
    for name in names:
        print(f"== {name}")
        failed += sum(not c.passed for c in run_suite(name))
    print(f"{'FAILED' if failed else 'OK'}: {failed} failing check(s)")
    return 1 if failed else EXIT_OK


def _parser():
    p = argparse.ArgumentParser(prog="zorssqp", description=__doc__.strip().splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def overrides(sp):
        sp.add_argument("config", nargs="?", help="INI configuration file")
        sp.add_argument("--d", type=int)
        sp.add_argument("--r", type=float)
        sp.add_argument("--L", type=str, help="constant or comma-separated schedule")
        sp.add_argument("--tau", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--mode", choices=("fixed", "linesearch"))
        sp.add_argument("--T", type=int)
        sp.add_argument("--out", help="output directory")

    overrides(sub.add_parser("run", help="run the solver once"))
    sw = sub.add_parser("sweep", help="independent seeded runs in worker threads")
    overrides(sw)
    sw.add_argument("--seeds", type=int, nargs="+", required=True)
    sw.add_argument("--workers", type=int, default=1)
    bl = sub.add_parser("baseline", help="simulate the dispatch that ignores the angle bound")
    bl.add_argument("config")
    bl.add_argument("--out")
    vf = sub.add_parser("verify", help="run property suites")
    vf.add_argument("suites", nargs="+", metavar="suite",
                    help=f"one or more of {', '.join(SUITES)}, or 'all'")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify":
        return cmd_verify(args.suites)
    if args.command == "baseline":
        return cmd_baseline(args.config, args.out)
    ov = {k: getattr(args, k) for k in ("d", "r", "L", "tau", "seed", "mode", "T", "out")}
    if args.command == "run":
        return cmd_run(args.config, ov)
    ov.pop("seed")
    return cmd_sweep(args.config, args.seeds, args.workers, ov)


if __name__ == "__main__":
    sys.exit(main())
