import csv
import io
import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from capillary_hk.cli import main
from capillary_hk.surfaces import cap_generator, write_surface
from capillary_hk.verify import REPORT_SCHEMA


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestVerify:
    def test_hemisphere_report(self, capsys):
        code, out, _ = run(capsys, "verify-halfspace", "--theta0", "1.5707963", "--n", "2",
                           "--resolution", "512", "--surface", "cap")
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc, REPORT_SCHEMA)
        assert abs(doc["deficit"]) <= 1e-4
        assert doc["lhs"] == pytest.approx(np.pi, rel=1e-3)
        assert doc["monotonicity_violation"] is not None
        assert [r["resolution"] for r in doc["convergence"]] == [64, 128, 256, 512]
        assert doc["config"]["resolution"] == 512 and doc["config"]["failures"] == []

    def test_ball_cap_and_perturbed(self, capsys):
        code, out, _ = run(capsys, "verify-ball", "--resolution", "128", "--no-flow")
        assert code == 0
        assert json.loads(out)["equality"]
        code, out, _ = run(capsys, "verify-ball", "--resolution", "128", "--no-flow", "--surface", "perturbed",
                           "--seed", "1")
        doc = json.loads(out)
        assert code == 0 and doc["deficit"] > 0 and not doc["equality"]

    def test_ball_with_flow(self, capsys):
        code, out, _ = run(capsys, "verify-ball", "--resolution", "64", "--theta0", "2.0943951")
        doc = json.loads(out)
        assert code == 0 and doc["monotonicity_violation"] >= 0

    def test_check_failure_exit_1(self, capsys):
        # eight segments are too coarse for the equality tolerance
        code, out, _ = run(capsys, "verify-halfspace", "--resolution", "8", "--no-flow")
        assert code == 1
        assert "equality" in json.loads(out)["config"]["failures"]

    def test_deterministic(self, capsys):
        args = ("verify-ball", "--resolution", "64", "--no-flow", "--surface", "perturbed", "--seed", "3")
        a = json.loads(run(capsys, *args)[1])
        b = json.loads(run(capsys, *args)[1])
        a.pop("runtime_ms"), b.pop("runtime_ms")
        assert a == b

    def test_csv_and_out(self, capsys, tmp_path):
        target = tmp_path / "rep.csv"
        code, out, _ = run(capsys, "verify-halfspace", "--resolution", "64", "--no-flow", "--format", "csv",
                           "--out", str(target))
        assert code == 0 and out == ""
        rows = list(csv.DictReader(target.open()))
        assert len(rows) == 1
        assert {"lhs", "rhs", "deficit", "minkowski_residual"} <= set(rows[0])

    def test_surface_file(self, capsys, tmp_path):
        path = tmp_path / "cap.txt"
        write_surface(cap_generator("ball-capillary", np.pi / 3, 128), path)
        code, out, _ = run(capsys, "verify-ball", "--surface", f"file:{path}", "--no-flow")
        doc = json.loads(out)
        assert code == 0 and doc["convergence"] == [] and doc["resolution"] == 128


class TestInvalidInput:
    def test_bad_file(self, capsys, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("axisymmetric 2 1.0 4\n0 0.9\n0.1 0.9\n0.2 0.4\n2.0 3.0\n")
        code, _, err = run(capsys, "verify-ball", "--surface", f"file:{bad}")
        assert code == 2
        assert "support" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "verify-ball", "--surface", f"file:{tmp_path / 'nope.txt'}")
        assert code == 2 and "invalid input" in err

    @pytest.mark.parametrize("argv", [
        ["verify-ball", "--theta0", "abc"],
        ["verify-ball", "--surface", "torus"],
        ["verify-ball", "--format", "xml"],
        ["transmogrify"],
        [],
    ])
    def test_malformed_flags(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 2
        assert "usage" in err

    def test_hypothesis_violation(self, capsys):
        code, _, err = run(capsys, "verify-ball", "--theta0", "2.0943951", "--radius", "0.6")
        assert code == 2 and "domain" in err

    def test_theta0_out_of_range(self, capsys):
        code, _, err = run(capsys, "curvature", "--theta0", "4.0")
        assert code == 2

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0


class TestOtherCommands:
    def test_curvature_table(self, capsys):
        code, out, _ = run(capsys, "curvature", "--theta0", "1.0471976")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert list(rows[0]) == ["point", "plane", "K_closed", "K_fd"]
        assert len(rows) == 5 * 3
        assert all(float(r["K_closed"]) < 0 and float(r["K_fd"]) < 0 for r in rows)
        horizontal = [r for r in rows if json.loads(r["plane"]) == [1, 2]]
        assert all(abs(float(r["K_fd"]) + 1) < 1e-4 for r in horizontal)

    def test_geodesic(self, capsys):
        code, out, _ = run(capsys, "geodesic", "--theta0", "1.0471976", "--point", "0", "1",
                           "--direction", "1", "0", "--length", "0.5", "--samples", "11")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert list(rows[0]) == ["t", "x1", "x2"] and len(rows) == 11
        assert float(rows[-1]["t"]) == pytest.approx(0.5)

    def test_geodesic_dimension_mismatch(self, capsys):
        code, _, _ = run(capsys, "geodesic", "--point", "0", "0", "1", "--direction", "1", "0")
        assert code == 2

    def test_flow(self, capsys):
        code, out, _ = run(capsys, "flow", "--mode", "capillary-halfspace", "--resolution", "64")
        doc = json.loads(out)
        assert code == 0
        assert doc["monotonicity_violation"] <= doc["tolerance"]
        assert doc["focal_time"] == pytest.approx(1.0, abs=0.03)
        assert doc["history"][0]["t"] == 0.0

    def test_convergence(self, capsys):
        code, out, _ = run(capsys, "convergence", "--kind", "halfspace", "--resolutions", "64", "128", "256")
        doc = json.loads(out)
        assert code == 0 and doc["passed"]
        assert min(doc["orders"]["lhs_error"]) >= 1.9

    def test_convergence_too_coarse(self, capsys):
        code, out, _ = run(capsys, "convergence", "--kind", "ball", "--resolutions", "6", "12")
        assert code == 1 and not json.loads(out)["passed"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "capillary_hk", "curvature", "--samples", "2", "--format", "json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["all_negative"] is True
