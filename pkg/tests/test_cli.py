import json
import os

import numpy as np
import pytest

from nlspec.cli import (RunConfig, cmd_spectrum, fmt_num, load_config, main,
                        run_dir)
from nlspec.errors import ConfigError

BASE_CONFIG = """\
[problem]
kind = symbol
symbol = stable
alpha = 1.0
potential = power
c = 1.0
theta = 2.0
d = 1

[grid]
l = 10
n = 256

[solver]
k = 30
tol = 1e-8
seed = 0
method = lanczos

[bounds]
curves = thm24,trace

[ritz]
n_list = 3,4,5,6

[output]
format = csv
directory = {out}
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(BASE_CONFIG.format(out=tmp_path / "runs"))
    return str(path)


class TestLoadConfig:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "nope.ini"))

    def test_missing_field_named(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[problem]\nkind = symbol\nsymbol = stable\n"
                        "alpha = 1.0\npotential = power\nd = 1\n"
                        "[grid]\nl = 10\nn = 64\n")
        cfg = load_config(str(path))
        with pytest.raises(ConfigError, match="problem.theta"):
            cfg.get_float("problem", "theta")

    def test_bad_number_named(self, config_path):
        cfg = load_config(config_path)
        cfg.set("grid", "l", "wide")
        with pytest.raises(ConfigError, match="grid.l"):
            cfg.get_float("grid", "l")

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "extra.ini"
        path.write_text("[problem]\nkind = symbol\n[grid]\nl = 1\nn = 8\n"
                        "[mystery]\nx = 1\n")
        with pytest.raises(ConfigError, match="mystery"):
            load_config(str(path))


class TestDigest:
    def test_output_section_excluded(self, config_path):
        cfg = load_config(config_path)
        before = cfg.digest()
        cfg.set("output", "directory", "elsewhere")
        assert cfg.digest() == before

    def test_solver_seed_included(self, config_path):
        cfg = load_config(config_path)
        before = cfg.digest()
        cfg.set("solver", "seed", "99")
        assert cfg.digest() != before


class TestNumberFormatting:
    def test_round_trip(self):
        for x in (1.0 / 3.0, 1e-17, 123456.789, 2.0):
            assert float(fmt_num(x)) == x


class TestCommands:
    def test_spectrum_idempotent(self, config_path, tmp_path):
        out = str(tmp_path / "runs")
        assert main(["spectrum", "--config", config_path]) == 0
        cfg = load_config(config_path)
        csv_path = os.path.join(run_dir(cfg, out), "spectrum.csv")
        first = open(csv_path, "rb").read()
        first_mtime = os.path.getmtime(csv_path)
        assert main(["spectrum", "--config", config_path]) == 0
        assert open(csv_path, "rb").read() == first
        assert os.path.getmtime(csv_path) == first_mtime  # cache hit, no rewrite

    def test_force_recomputes_identically(self, config_path, tmp_path):
        out = str(tmp_path / "runs")
        main(["spectrum", "--config", config_path])
        cfg = load_config(config_path)
        csv_path = os.path.join(run_dir(cfg, out), "spectrum.csv")
        first = open(csv_path, "rb").read()
        main(["spectrum", "--config", config_path, "--force"])
        assert open(csv_path, "rb").read() == first

    def test_corrupt_cache_recomputed(self, config_path, tmp_path, capsys):
        out = str(tmp_path / "runs")
        main(["spectrum", "--config", config_path])
        cfg = load_config(config_path)
        manifest = os.path.join(run_dir(cfg, out), "manifest-spectrum.json")
        doc = json.load(open(manifest))
        doc["digest"] = "tampered"
        open(manifest, "w").write(json.dumps(doc))
        assert main(["spectrum", "--config", config_path]) == 0
        assert "recomputing" in capsys.readouterr().err
        assert json.load(open(manifest))["digest"] == cfg.digest()

    def test_manifest_reproduces_run(self, config_path, tmp_path):
        out = str(tmp_path / "runs")
        main(["spectrum", "--config", config_path])
        cfg = load_config(config_path)
        base = run_dir(cfg, out)
        first = open(os.path.join(base, "spectrum.csv"), "rb").read()
        manifest = os.path.join(base, "manifest-spectrum.json")
        out2 = str(tmp_path / "runs2")
        assert main(["spectrum", "--config", manifest, "--out", out2]) == 0
        cfg2 = load_config(manifest)
        second = open(os.path.join(run_dir(cfg2, out2), "spectrum.csv"), "rb").read()
        assert first == second

    def test_seed_override_changes_digest(self, config_path, tmp_path):
        cfg = load_config(config_path)
        out = str(tmp_path / "runs")
        main(["spectrum", "--config", config_path, "--seed", "123"])
        assert not os.path.exists(os.path.join(run_dir(cfg, out), "spectrum.csv"))
        cfg.set("solver", "seed", "123")
        assert os.path.exists(os.path.join(run_dir(cfg, out), "spectrum.csv"))

    def test_json_format(self, config_path, tmp_path):
        out = str(tmp_path / "runs")
        assert main(["spectrum", "--config", config_path, "--format", "json"]) == 0
        cfg = load_config(config_path)
        doc = json.load(open(os.path.join(run_dir(cfg, out), "spectrum.json")))
        assert len(doc["eigenvalues"]) == 30
        assert doc["converged"]

    def test_bounds_and_fit(self, config_path, tmp_path):
        out = str(tmp_path / "runs")
        assert main(["bounds", "--config", config_path]) == 0
        assert main(["fit", "--config", config_path]) == 0
        cfg = load_config(config_path)
        base = run_dir(cfg, out)
        header = open(os.path.join(base, "bounds.csv")).readline().strip().split(",")
        assert header[:2] == ["n", "lambda"]
        assert any(h.startswith("thm2.4") for h in header)
        fit = json.load(open(os.path.join(base, "manifest-fit.json")))
        assert abs(fit["results"]["slope"] - 2.0 / 3.0) < 0.1

    def test_ritz_command(self, config_path, tmp_path):
        out = str(tmp_path / "runs")
        assert main(["ritz", "--config", config_path, "--threads", "2"]) == 0
        cfg = load_config(config_path)
        rows = open(os.path.join(run_dir(cfg, out), "ritz.csv")).read().splitlines()
        assert rows[0] == "n,j,mu"
        assert len(rows) == 1 + 3 + 4 + 5 + 6

    def test_report_with_check(self, config_path, tmp_path):
        out = str(tmp_path / "runs")
        assert main(["report", "--config", config_path, "--check"]) == 0
        cfg = load_config(config_path)
        base = run_dir(cfg, out)
        assert os.path.exists(os.path.join(base, "report.txt"))
        assert os.path.exists(os.path.join(base, "report_spectrum.png"))

    def test_report_check_failure_exits_3(self, tmp_path):
        path = tmp_path / "strict.ini"
        text = BASE_CONFIG.format(out=tmp_path / "runs")
        text = text.replace("curves = thm24,trace",
                            "curves = thm24,trace\nslope_tol = 1e-9")
        path.write_text(text)
        assert main(["report", "--config", str(path), "--check"]) == 3

    def test_config_error_exit_code(self, tmp_path):
        assert main(["spectrum", "--config", str(tmp_path / "absent.ini")]) == 1


class TestKernelProblem:
    def test_variable_order_spectrum(self, tmp_path):
        path = tmp_path / "kernel.ini"
        path.write_text(
            "[problem]\nkind = kernel\nkernel = variable\nalpha0 = 0.5\n"
            "beta1 = 1.0\nbeta2 = 2.718281828459045\nkappa = 2.0\n"
            "potential = power\nc = 1.0\ntheta = 2.0\nd = 1\n"
            "[grid]\nl = 8\nn = 256\n"
            "[solver]\nk = 5\nmethod = dense\n"
            f"[output]\ndirectory = {tmp_path / 'runs'}\n")
        assert main(["spectrum", "--config", str(path)]) == 0
        cfg = load_config(str(path))
        rows = open(os.path.join(run_dir(cfg, str(tmp_path / "runs")),
                                 "spectrum.csv")).read().splitlines()
        lam = [float(r.split(",")[1]) for r in rows[1:]]
        assert lam == sorted(lam)
        assert lam[0] > 0
