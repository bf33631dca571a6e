"""Tests for the command line front end."""

from __future__ import annotations

import json
import logging

import numpy as np
import pytest

from randers_curvature import cli, zoo
from randers_curvature.cli import main
from randers_curvature.const import ExitCode
from randers_curvature.zoo import catalogue_entry


def _write_spec(path, a, b, domain):
    path.write_text(json.dumps({"dim": len(b), "a": a, "b": b, "domain": domain}))
    return str(path)


class TestEval:
    def test_flat_norm(self, capsys):
        assert main(["eval", "zoo:flat_b05", "--x", "0,0", "--y", "1,0", "F"]) == ExitCode.PASS
        assert capsys.readouterr().out == "F = 1.5\n"

    def test_several_quantities(self, capsys):
        code = main(["eval", "zoo:funk2", "--x", "0.3,0", "--y", "1,0", "S,Ric", "beta.norm"])
        assert code == ExitCode.PASS
        lines = dict(line.split(" = ") for line in capsys.readouterr().out.splitlines())
        assert float(lines["S"]) == pytest.approx(1.5 * 1.3 / 0.91, rel=1e-9)
        assert float(lines["Ric"]) == pytest.approx(-0.25 * (1.3 / 0.91) ** 2, rel=1e-7)
        assert float(lines["beta.norm"]) == pytest.approx(0.3, rel=1e-12)

    def test_inadmissible_point(self, tmp_path, caplog):
        spec = _write_spec(tmp_path / "m.json", [["1", "0"], ["0", "1"]], ["x1", "0"], [[-2, 2], [-1, 1]])
        with caplog.at_level(logging.ERROR):
            assert main(["eval", spec, "--x", "1.5,0", "--y", "1,0", "F"]) == ExitCode.ERROR
        assert "|b|=1.5" in caplog.text

    def test_unknown_quantity(self):
        assert main(["eval", "zoo:flat_b05", "--x", "0,0", "--y", "1,0", "flag"]) == ExitCode.ERROR

    def test_wrong_vector_length(self):
        assert main(["eval", "zoo:flat_b05", "--x", "0,0,0", "--y", "1,0", "F"]) == ExitCode.ERROR


class TestVerify:
    def test_funk_flat(self, capsys):
        assert main(["verify", "zoo:funk2", "flat", "--samples", "6"]) == ExitCode.PASS
        assert capsys.readouterr().out.rstrip().endswith("verdict: pass")

    def test_killing_not_reversible(self):
        assert main(["verify", "zoo:killing", "reversible", "--samples", "6"]) == ExitCode.FAIL

    def test_sphere_fit(self, tmp_path):
        report = tmp_path / "report.json"
        code = main(
            ["verify", "zoo:sphere", "isotropic", "--c", "fit", "--samples", "5", "--report", str(report)]
        )
        assert code == ExitCode.PASS
        summary = json.loads(report.read_text())["summary"]
        assert summary["extras"]["c_constant"] is True
        assert summary["samples_requested"] == 5

    def test_constant_expression(self):
        args = ["verify", "zoo:sphere", "isotropic", "--c", "sin(x1)^2 + cos(x1)^2", "--samples", "5"]
        assert main(args) == ExitCode.PASS

    def test_report_is_reproducible(self, tmp_path):
        summaries = []
        for name in ("a.json", "b.json"):
            path = tmp_path / name
            main(["verify", "zoo:shear", "flat", "--samples", "4", "--seed", "3", "--report", str(path)])
            summary = json.loads(path.read_text())["summary"]
            summary.pop("command")
            summaries.append(summary)
        assert summaries[0] == summaries[1]

    def test_csv_export(self, tmp_path):
        path = tmp_path / "records.csv"
        main(["verify", "zoo:flat_b03", "square", "--samples", "2", "--csv", str(path)])
        lines = path.read_text().splitlines()
        assert lines[0].startswith("x1,x2,y1,y2,residual:")
        assert len(lines) == 3

    def test_settings_file(self, tmp_path):
        settings = tmp_path / "settings.json"
        settings.write_text(json.dumps({"samples": 3, "tolerances": {"identity": 1e-6}}))
        report = tmp_path / "report.json"
        code = main(["--config", str(settings), "verify", "zoo:polar", "flat", "--report", str(report)])
        assert code == ExitCode.PASS
        summary = json.loads(report.read_text())["summary"]
        assert summary["samples_evaluated"] == 3
        assert set(summary["tolerances"].values()) == {1e-6}


class TestIdentity:
    def test_epoly_fixed_c(self):
        assert main(["identity", "zoo:flat_b05", "epoly", "--c", "0", "--samples", "4"]) == 0

    def test_random_spec(self):
        assert main(["identity", "random:42", "eq7", "--samples", "5"]) == ExitCode.PASS

    def test_random_spec_options(self):
        assert main(["identity", "random:7,3,1,0.02", "sTwoPath", "--samples", "3"]) == 0

    def test_tolerance_override(self, tmp_path):
        report = tmp_path / "report.json"
        main(["identity", "random:1", "eq7", "--samples", "2", "--tol", "1e-3", "--report", str(report)])
        tolerances = json.loads(report.read_text())["summary"]["tolerances"]
        assert tolerances == {"closed_form": 1e-3, "expanded_offset": 1e-3}

    def test_bad_random_spec(self):
        assert main(["identity", "random:abc", "eq7"]) == ExitCode.ERROR

    def test_unknown_identity(self):
        with pytest.raises(SystemExit) as e:
            main(["identity", "zoo:funk2", "eq8"])
        assert e.value.code == 2


class TestZoo:
    def test_list(self, capsys):
        assert main(["zoo", "--list"]) == ExitCode.PASS
        assert capsys.readouterr().out.startswith("flat_b0: ")

    def test_export_round_trip(self, tmp_path, capsys):
        assert main(["zoo", "--export", str(tmp_path)]) == ExitCode.PASS
        capsys.readouterr()
        path = tmp_path / "funk2.json"
        assert main(["eval", str(path), "--x", "0.3,0", "--y", "1,0", "F"]) == ExitCode.PASS
        value = float(capsys.readouterr().out.split(" = ")[1])
        assert value == pytest.approx(1.3 / 0.91, rel=1e-14)

    def test_run_all(self, monkeypatch, capsys):
        entries = [catalogue_entry("flat_b05"), catalogue_entry("killing")]
        monkeypatch.setattr(zoo, "catalogue", lambda: entries)
        assert main(["zoo", "--run-all", "--samples", "3"]) == ExitCode.PASS
        out = capsys.readouterr().out
        assert out.rstrip().endswith("documented verdicts reproduced")

    def test_asymmetric_file(self, tmp_path):
        spec = _write_spec(tmp_path / "m.json", [["1", "x2"], ["x1", "1"]], ["0", "0"], [[-1, 1], [-1, 1]])
        assert main(["eval", spec, "--x", "0,0", "--y", "1,0", "F"]) == ExitCode.ERROR

    def test_missing_file(self, tmp_path):
        assert main(["eval", str(tmp_path / "nope.json"), "--x", "0,0", "--y", "1,0", "F"]) == 2

    def test_unknown_entry(self):
        assert main(["eval", "zoo:hyperbolic", "--x", "0,0", "--y", "1,0", "F"]) == 2


def test_numpy_version_gate(monkeypatch, caplog):
    monkeypatch.setattr(np, "__version__", "1.21.6")
    with caplog.at_level(logging.ERROR):
        assert main(["eval", "zoo:flat_b05", "--x", "0,0", "--y", "1,0", "F"]) == ExitCode.ERROR
    assert "1.22.0" in caplog.text


def test_resolve_spec_prefixes():
    assert cli.resolve_spec("zoo:funk3").dimension == 3
    assert cli.resolve_spec("random:3,4").name == "random-n4-d2-s3"
