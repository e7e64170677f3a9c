import json
import subprocess
import sys

import pytest

from zorssqp import __version__
from zorssqp.benchmarks.power import PowerNetworkSpec
from zorssqp.cli import config_hash, load_config, main
from zorssqp.metrics import TRACE_COLUMNS

SYNTH = """
[solver]
d = 4
T = {T}
L = 5.0
eta = 1.0
mode = linesearch
seed = 2

[problem]
kind = synthetic
n = 20
m_ineq = 3
"""

POWER = """
[solver]
d = 2
T = 2
L = 2.0
mode = linesearch
seed = 1

[problem]
kind = power
{extra}
"""


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestRun:

    def test_zero_iterations(self, tmp_path):
        cfg = write(tmp_path, SYNTH.format(T=0))
        assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 0
        lines = (tmp_path / "o" / "trace.csv").read_text().splitlines()
        assert lines[0] == ",".join(TRACE_COLUMNS)
        assert len(lines) == 2

    def test_outputs_and_manifest(self, tmp_path):
        cfg = write(tmp_path, SYNTH.format(T=5))
        out = tmp_path / "o"
        assert main(["run", cfg, "--out", str(out)]) == 0
        for name in ("trace.csv", "summary.json", "manifest.json", "plotdata/objective.csv",
                     "plotdata/violation.csv", "plotdata/kkt_gap.csv"):
            assert (out / name).exists(), name
        summary = json.loads((out / "summary.json").read_text())
        man = summary["manifest"]
        assert man == json.loads((out / "manifest.json").read_text())
        assert config_hash(man["config"]) == man["config_hash"]
        assert man["version"] == __version__
        assert man["mode"] == "linesearch" and man["seed"] == 2
        assert summary["termination"] == "completed"
        assert len(summary["x_final"]) == 20

    def test_byte_identical(self, tmp_path):
        cfg = write(tmp_path, SYNTH.format(T=10))
        main(["run", cfg, "--out", str(tmp_path / "a")])
        main(["run", cfg, "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()

    def test_flags_override_file(self, tmp_path):
        cfg = write(tmp_path, SYNTH.format(T=10))
        out = tmp_path / "o"
        main(["run", cfg, "--T", "3", "--d", "2", "--mode", "fixed", "--L", "1,2",
              "--tau", "150", "--r", "1e-5", "--seed", "9", "--out", str(out)])
        solver = json.loads((out / "manifest.json").read_text())["config"]["solver"]
        assert solver == {"d": 2, "T": 3, "L": [1.0, 2.0], "eta": 1.0, "mode": "fixed",
                          "seed": 9, "tau": 150.0, "r": 1e-5}
        assert len((out / "trace.csv").read_text().splitlines()) == 5

    @pytest.mark.parametrize("text", [
        "[solver]\nbogus = 1\n",
        "[solver]\nd = ten\n",
        "[solver]\nd = 0\n",
        "[problem]\nkind = quantum\n",
        "[weird]\n",
        "[problem]\nkind = power\nx0 = feasible\n",
        "[solver\n",
    ])
    def test_config_errors(self, tmp_path, text):
        assert main(["run", write(tmp_path, text), "--out", str(tmp_path / "o")]) == 1

    def test_missing_file(self, tmp_path):
        assert main(["run", str(tmp_path / "nope.ini")]) == 1

    def test_solver_failure(self, tmp_path):
        cfg = write(tmp_path, POWER.format(extra="demand = 5.0"))
        assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_power_modes(self, tmp_path):
        cfg = write(tmp_path, POWER.format(extra=""))
        for mode in ("fixed", "linesearch"):
            out = tmp_path / mode
            assert main(["run", cfg, "--mode", mode, "--out", str(out)]) == 0
            summary = json.loads((out / "summary.json").read_text())
            assert summary["manifest"]["problem"]["id"] == "power-20bus-6gen"
            assert (out / "trajectory.csv").exists()
            assert "max_separation" in summary


class TestConfig:

    def test_hash_ignores_order(self):
        a = {"solver": {"d": 1, "T": 2}, "problem": {"kind": "synthetic"}}
        b = {"problem": {"kind": "synthetic"}, "solver": {"T": 2, "d": 1}}
        assert config_hash(a) == config_hash(b)
        assert config_hash(a) != config_hash({"solver": {"d": 1, "T": 3}})

    def test_defaults(self):
        cfg = load_config(None)
        assert cfg["problem"] == {"kind": "synthetic", "x0": "default"}
        assert cfg["solver"] == {}

    def test_shipped_configs(self):
        import pathlib
        root = pathlib.Path(__file__).resolve().parents[1] / "configs"
        for path in sorted(root.glob("*.ini")):
            load_config(str(path))


class TestBaseline:

    def test_default_scenario(self, tmp_path, capsys):
        cfg = write(tmp_path, POWER.format(extra=""))
        assert main(["baseline", cfg, "--out", str(tmp_path / "b")]) == 0
        rep = json.loads((tmp_path / "b" / "baseline.json").read_text())
        assert rep["max_separation"] > rep["delta_max"]
        assert not rep["satisfies_bound"]
        assert (tmp_path / "b" / "trajectory.csv").exists()

    def test_infinite_bound(self, tmp_path):
        cfg = write(tmp_path, POWER.format(extra="delta_max = inf"))
        assert main(["baseline", cfg, "--out", str(tmp_path / "b")]) == 0
        assert json.loads((tmp_path / "b" / "baseline.json").read_text())["satisfies_bound"]

    def test_tiny_spec_file(self, tmp_path):
        spec = PowerNetworkSpec(n_buses=3, generators=(0, 1), edges=((0, 1), (0, 2), (1, 2)),
                                weights=(1.0,) * 3, fault_weights=(1.0,) * 3, demand=(2.0,),
                                a=(1.0, 1.0), b=(0.0, 0.0), x_min=(0.0, 0.0), x_max=(2.0, 2.0))
        (tmp_path / "spec.json").write_text(json.dumps(spec.to_dict()))
        cfg = write(tmp_path, POWER.format(extra=f"spec_file = {tmp_path / 'spec.json'}"))
        assert main(["baseline", cfg, "--out", str(tmp_path / "b")]) == 0
        x = json.loads((tmp_path / "b" / "baseline.json").read_text())["x"]
        assert x == pytest.approx([1.0, 1.0], abs=1e-10)

    def test_infeasible(self, tmp_path):
        cfg = write(tmp_path, POWER.format(extra="demand = 5.0"))
        assert main(["baseline", cfg, "--out", str(tmp_path / "b")]) == 2

    def test_needs_power(self, tmp_path):
        assert main(["baseline", write(tmp_path, SYNTH.format(T=1))]) == 1


class TestSweepAndVerify:

    def test_sweep(self, tmp_path, capsys):
        cfg = write(tmp_path, SYNTH.format(T=3))
        out = tmp_path / "s"
        assert main(["sweep", cfg, "--seeds", "1", "2", "3", "--workers", "3",
                     "--out", str(out)]) == 0
        traces = [(out / f"seed_{s}" / "trace.csv").read_text() for s in (1, 2, 3)]
        assert len(set(traces)) == 3
        seeds = [json.loads((out / f"seed_{s}" / "manifest.json").read_text())["seed"]
                 for s in (1, 2, 3)]
        assert seeds == [1, 2, 3]

    def test_sweep_matches_single_run(self, tmp_path):
        cfg = write(tmp_path, SYNTH.format(T=3))
        main(["sweep", cfg, "--seeds", "7", "--out", str(tmp_path / "s")])
        main(["run", cfg, "--seed", "7", "--out", str(tmp_path / "r")])
        assert ((tmp_path / "s" / "seed_7" / "trace.csv").read_bytes()
                == (tmp_path / "r" / "trace.csv").read_bytes())

    def test_unknown_suite(self):
        assert main(["verify", "nope"]) == 1

    def test_estimator_suite(self, capsys):
        assert main(["verify", "estimator"]) == 0
        out = capsys.readouterr().out
        assert out.count("[PASS]") == 2

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "zorssqp", "--version"],
                             capture_output=True, text=True)
        assert res.returncode == 0
        assert res.stdout.strip() == __version__
