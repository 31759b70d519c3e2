import csv
import io
import json
import subprocess
import sys

import pytest

from fracperim.cli import main
from fracperim.coercivity import SCAN_FIELDS, compute_constants
from fracperim.experiments import STABILITY_FIELDS, VARIATION_FIELDS
from fracperim.specfun import FracParams
from fracperim.sphere import SphereFunction


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestSpectrum:
    def test_n2(self, capsys):
        code, out, _ = run(["spectrum", "--n", "2", "--alpha", "0.5", "--K", "10"], capsys)
        rows = read_csv(out)
        assert code == 0 and len(rows) == 11
        assert list(rows[0]) == ["k", "dim", "lambda", "A"]
        assert float(rows[1]["A"]) == pytest.approx(0.5, rel=1e-12)
        assert float(rows[0]["lambda"]) == 0.0 and float(rows[0]["A"]) == 0.0

    def test_n3(self, capsys):
        code, out, _ = run(["spectrum", "--n", "3", "--alpha", "0.5", "--K", "10"], capsys)
        rows = read_csv(out)
        assert float(rows[2]["A"]) == pytest.approx(1.2, rel=1e-12)
        assert rows[2]["dim"] == "5"

    def test_json(self, capsys):
        code, out, _ = run(["spectrum", "--K", "3", "--format", "json"], capsys)
        data = json.loads(out)
        assert code == 0 and data[1]["k"] == 1

    def test_bad_order(self, capsys):
        code, _, err = run(["spectrum", "--alpha", "1.5"], capsys)
        assert code == 2 and "alpha" in err


class TestConfig:
    def test_flags_override_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("n = 3\nalpha = 0.25  # lower order\nK = 6\n")
        code, out, _ = run(["spectrum", "--config", str(cfg), "--K", "2"], capsys)
        rows = read_csv(out)
        assert code == 0 and len(rows) == 3
        assert rows[1]["dim"] == "3"
        assert float(rows[1]["A"]) == pytest.approx(0.25, rel=1e-12)

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("colour = blue\n")
        assert run(["spectrum", "--config", str(cfg)], capsys)[0] == 2

    def test_bad_value(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("K = many\n")
        assert run(["spectrum", "--config", str(cfg)], capsys)[0] == 2

    def test_missing_file(self, tmp_path, capsys):
        assert run(["spectrum", "--config", str(tmp_path / "none.cfg")], capsys)[0] == 2

    def test_bad_flag(self, capsys):
        assert run(["spectrum", "--nope"], capsys)[0] == 2

    def test_unwritable_output(self, tmp_path, capsys):
        assert run(["spectrum", "--out", str(tmp_path / "no" / "dir.csv")], capsys)[0] == 2


class TestCoercivityScan:
    def test_single_point_echo(self, tmp_path, capsys):
        out = tmp_path / "scan.csv"
        code, summary, _ = run(["coercivity-scan", "--n", "2", "--s", "0.89", "--t", "0.9", "--out", str(out)], capsys)
        assert code == 0
        info = json.loads(summary)
        lib = compute_constants(FracParams(2, 0.89, 0.9)).to_dict()
        assert info["constants"] == lib
        assert 0 < info["min_margin"] < 0.05
        rows = read_csv(out.read_text())
        assert list(rows[0]) == list(SCAN_FIELDS) and len(rows) == 200

    def test_violation_exit(self, tmp_path, capsys):
        code, summary, _ = run(["coercivity-scan", "--n", "2", "--s", "0.25", "--t", "0.75", "--out", str(tmp_path / "s.csv")], capsys)
        assert code == 1
        assert json.loads(summary)["gap_violations"] == 1

    def test_default_grid_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(["coercivity-scan", "--K", "20", "--out", str(a)], capsys)
        run(["coercivity-scan", "--K", "20", "--out", str(b)], capsys)
        assert a.read_bytes() == b.read_bytes()
        assert len(read_csv(a.read_text())) == 216 * 20


class TestPerimeter:
    def test_input_file(self, tmp_path, capsys):
        f = tmp_path / "u.json"
        f.write_text(SphereFunction.zeros(2, 2).to_json())
        code, out, _ = run(["perimeter", "--input", str(f), "--alpha", "0.5"], capsys)
        row = read_csv(out)[0]
        assert code == 0
        assert float(row["perimeter"]) == pytest.approx(float(row["ball_perimeter"]), rel=1e-12)

    def test_random_sample(self, capsys):
        code, out, _ = run(["perimeter", "--seed", "3", "--K", "4", "--eps", "0.02"], capsys)
        row = read_csv(out)[0]
        assert code == 0 and float(row["c1_norm"]) <= 0.02 * (1 + 1e-9)

    def test_grid_flag_and_tolerance(self, tmp_path, capsys):
        f = tmp_path / "u.json"
        f.write_text(SphereFunction.harmonic(2, 8, 1, 0.05).to_json())
        code, _, _ = run(["perimeter", "--input", str(f), "--grid", "12", "--tol", "1e-14"], capsys)
        assert code == 1

    def test_bad_input(self, tmp_path, capsys):
        f = tmp_path / "u.json"
        f.write_text("{not json")
        assert run(["perimeter", "--input", str(f)], capsys)[0] == 2


class TestRegraph:
    def test_zero(self, tmp_path, capsys):
        f = tmp_path / "u.json"
        f.write_text(SphereFunction.zeros(2, 2).to_json())
        code, out, _ = run(["regraph", "--input", str(f), "--format", "json"], capsys)
        info = json.loads(out)
        assert code == 0 and info["r"] == pytest.approx(1.0) and max(map(abs, info["y"])) < 1e-15
        assert max(abs(c) for c in info["v"]["coefficients"]) < 1e-13

    def test_constant(self, tmp_path, capsys):
        f = tmp_path / "u.json"
        f.write_text(SphereFunction.constant(2, 0.1).to_json())
        code, out, _ = run(["regraph", "--input", str(f)], capsys)
        row = read_csv(out)[0]
        assert code == 0 and float(row["r"]) == pytest.approx(1.1)

    def test_example(self, tmp_path, capsys):
        u = SphereFunction.harmonic(2, 1, 1, 0.03, K=3) + SphereFunction.harmonic(2, 3, 2, 0.02)
        f = tmp_path / "u.json"
        f.write_text(u.to_json())
        code, out, _ = run(["regraph", "--input", str(f)], capsys)
        row = read_csv(out)[0]
        assert code == 0 and float(row["residual"]) < 1e-8
        assert float(row["c1_norm_v"]) <= 5 * float(row["c1_norm_u"])

    def test_requires_input(self, capsys):
        assert run(["regraph"], capsys)[0] == 2


class TestExperiments:
    def test_variation_check(self, tmp_path, capsys):
        out = tmp_path / "v.csv"
        code, summary, _ = run(["variation-check", "--K", "3", "--out", str(out)], capsys)
        rows = read_csv(out.read_text())
        assert code == 0 and list(rows[0]) == list(VARIATION_FIELDS)
        assert all(r["ok"] == "true" for r in rows)
        assert json.loads(summary)["failed"] == []

    def test_stability_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["stability-experiment", "--samples", "3", "--K", "4", "--seed", "7", "--eps", "0.02"]
        code_a, _, _ = run(args + ["--out", str(a)], capsys)
        code_b, _, _ = run(args + ["--out", str(b)], capsys)
        assert a.read_bytes() == b.read_bytes()
        rows = read_csv(a.read_text())
        assert list(rows[0]) == list(STABILITY_FIELDS) and len(rows) == 3
        assert all(r["positive_ok"] == "true" for r in rows)
        # the c_spectral/2 floor is not met (see the coercivity tests)
        assert code_a == code_b == 1

    def test_stability_summary_on_stderr(self, capsys):
        code, out, err = run(["stability-experiment", "--samples", "2", "--K", "3"], capsys)
        assert read_csv(out)[0]["sample"] == "0"
        assert "checks" in json.loads(err)


def test_console_script(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "fracperim.cli", "spectrum", "--K", "2"], capture_output=True, text=True, check=False
    )
    assert out.returncode == 0 and out.stdout.startswith("k,dim,lambda,A")
