"""The imcf-profile command: flags, files, schemas, exit codes."""

import csv
import json
from pathlib import Path

import jsonschema
import pytest

from imcfprofile.cli import load_profile_json, main

SCHEMA_DIR = Path(__file__).parent.parent / "src" / "imcfprofile" / "schemas"


def _schema(name):
    return json.loads((SCHEMA_DIR / name).read_text())


def run_cli(*argv):
    return main(list(argv))


class TestSolve:
    def test_basic_run_csv(self, tmp_path):
        out = tmp_path / "run"
        code = run_cli(
            "solve", "--n", "2", "--lambda", "2", "--mu", "-1",
            "--r-max", "100", "--out", str(out),
        )
        assert code == 0
        text = (out.with_suffix(".csv")).read_text()
        assert text.startswith("r,f,fr,frr,w,q\n")
        assert "\r" not in text
        rows = list(csv.DictReader(text.splitlines()))
        rs = [float(row["r"]) for row in rows]
        assert rs == sorted(rs) and len(set(rs)) == len(rs)
        assert all(float(row["w"]) > 0.0 for row in rows)
        # q empty exactly where f <= 0
        for row in rows:
            assert (row["q"] == "") == (float(row["f"]) <= 0.0)

    def test_manifest_schema(self, tmp_path):
        out = tmp_path / "run"
        assert run_cli(
            "solve", "--n", "2", "--lambda", "2", "--mu", "-1",
            "--r-max", "100", "--out", str(out),
        ) == 0
        manifest = json.loads(out.with_suffix(".manifest.json").read_text())
        jsonschema.validate(manifest, _schema("manifest.schema.json"))
        assert manifest["summary"]["alpha0"] == pytest.approx(2.0)

    def test_json_profile_roundtrip(self, tmp_path):
        out = tmp_path / "run"
        assert run_cli(
            "solve", "--n", "2", "--lambda", "2", "--mu", "-1",
            "--r-max", "50", "--out", str(out), "--format", "json",
        ) == 0
        payload = json.loads(out.with_suffix(".json").read_text())
        jsonschema.validate(payload, _schema("profile.schema.json"))
        prof = load_profile_json(out.with_suffix(".json"))
        assert prof.params.lam == 2.0
        assert prof.r_max == pytest.approx(50.0)

    def test_certified_refusal_names_threshold(self, tmp_path, capsys):
        code = run_cli(
            "solve", "--n", "2", "--lambda", "1", "--mu", "-1",
            "--r-max", "10", "--out", str(tmp_path / "r"),
        )
        assert code == 1
        err = capsys.readouterr().err
        assert "1/(n-1)" in err

    def test_exploratory_records_events(self, tmp_path):
        out = tmp_path / "expl"
        code = run_cli(
            "solve", "--n", "2", "--lambda", "0.5", "--mu", "-1",
            "--r-max", "10", "--out", str(out), "--mode", "exploratory",
        )
        assert code == 0
        manifest = json.loads(out.with_suffix(".manifest.json").read_text())
        kinds = {e["kind"] for e in manifest["summary"]["events"]}
        assert kinds <= {
            "w_nonpositive", "fr_nonpositive", "frr_nonpositive", "step_underflow",
        }
        assert manifest["summary"]["events"]  # breakdown at finite radius recorded

    def test_plot_emits_static_svg(self, tmp_path):
        out = tmp_path / "plot"
        assert run_cli(
            "solve", "--n", "2", "--lambda", "2", "--mu", "-1",
            "--r-max", "100", "--out", str(out), "--plot",
        ) == 0
        for suffix in (".f.svg", ".q.svg"):
            svg = out.with_suffix(suffix).read_text()
            assert "<svg" in svg
            assert "<script" not in svg

    def test_usage_error_exit_one(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("solve", "--n", "2", "--badflag")
        assert exc.value.code == 1

    def test_missing_params_exit_one(self, capsys):
        assert run_cli("solve", "--n", "2") == 1

    def test_config_file_precedence(self, tmp_path):
        cfg = tmp_path / "base.cfg"
        cfg.write_text("n = 2\nlambda = 2\nmu = -1\nr_max = 60\n# comment\n")
        out = tmp_path / "cfgrun"
        # flag overrides the file's r_max
        assert run_cli(
            "solve", "--config", str(cfg), "--r-max", "40", "--out", str(out),
        ) == 0
        manifest = json.loads(out.with_suffix(".manifest.json").read_text())
        assert manifest["config"]["r_max"] == 40.0
        assert manifest["params"]["lambda"] == 2.0


class TestSweep:
    def test_alpha0_column(self, tmp_path):
        out = tmp_path / "sw"
        code = run_cli(
            "sweep", "--n-list", "2", "--lambda-list", "1.5 2 4",
            "--mu-list", "-1", "--r-max", "1000", "--out", str(out),
        )
        assert code == 0
        rows = list(csv.DictReader(out.with_suffix(".sweep.csv").read_text().splitlines()))
        got = [float(r["alpha0"]) for r in rows]
        assert got == pytest.approx([3.0, 2.0, 4.0 / 3.0])
        assert all(r["passed"] == "true" for r in rows)

    def test_empty_grid_usage_error(self, tmp_path, capsys):
        assert run_cli("sweep", "--n-list", "", "--out", str(tmp_path / "x")) == 1
        assert "empty" in capsys.readouterr().err

    def test_non_certifiable_rows_skipped(self, tmp_path):
        """Certified-mode sweep over a grid containing lambda <= 1/(n-1):
        those rows are marked skipped, the rest decide the exit code."""
        out = tmp_path / "mix"
        code = run_cli(
            "sweep", "--n-list", "2", "--lambda-list", "0.5 2",
            "--mu-list", "-1", "--r-max", "1000", "--out", str(out),
        )
        assert code == 0
        rows = list(csv.DictReader(out.with_suffix(".sweep.csv").read_text().splitlines()))
        assert rows[0]["status"] == "skipped_not_certified"
        assert rows[1]["status"] == "ok" and rows[1]["passed"] == "true"

    def test_deterministic_data_files(self, tmp_path, monkeypatch):
        monkeypatch.setenv("IMCF_PROFILE_THREADS", "2")
        args = (
            "sweep", "--n-list", "2", "--lambda-list", "1.5 2",
            "--mu-list", "-1", "--r-max", "1000",
        )
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_cli(*args, "--out", str(out1)) == 0
        assert run_cli(*args, "--out", str(out2)) == 0
        data1 = out1.with_suffix(".sweep.csv").read_bytes()
        data2 = out2.with_suffix(".sweep.csv").read_bytes()
        assert data1 == data2
        m1 = json.loads(out1.with_suffix(".manifest.json").read_text())
        m2 = json.loads(out2.with_suffix(".manifest.json").read_text())
        m1.pop("timestamp"), m2.pop("timestamp")
        assert m1["summary"] == m2["summary"]


class TestVerify:
    def test_default_probes_pass(self, tmp_path):
        out = tmp_path / "ver"
        code = run_cli(
            "verify", "--n", "2", "--lambda", "2", "--mu", "-1",
            "--r-max", "10", "--out", str(out),
        )
        assert code == 0
        report = json.loads(out.with_suffix(".verification.json").read_text())
        jsonschema.validate(report, _schema("verification.schema.json"))
        assert report["passed"] is True

    def test_loose_tolerance_report_well_formed(self, tmp_path):
        """tol x 1e4: defects grow but the report is still a valid document."""
        tight = tmp_path / "t"
        loose = tmp_path / "l"
        assert run_cli("verify", "--n", "2", "--lambda", "2", "--mu", "-1",
                       "--r-max", "10", "--out", str(tight)) == 0
        code = run_cli("verify", "--n", "2", "--lambda", "2", "--mu", "-1",
                       "--r-max", "10", "--tol", "1e-8", "--out", str(loose))
        assert code in (0, 2)
        rep_t = json.loads(tight.with_suffix(".verification.json").read_text())
        rep_l = json.loads(loose.with_suffix(".verification.json").read_text())
        jsonschema.validate(rep_l, _schema("verification.schema.json"))
        assert (
            rep_l["integral_identity_defect_max"]
            >= rep_t["integral_identity_defect_max"]
        )

    def test_corrupted_profile_rejected(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"schema": "imcf-profile/profile-v1", "params": {"n": 2}}))
        code = run_cli("verify", "--profile", str(bad), "--out", str(tmp_path / "v"))
        assert code == 1
        assert "schema error" in capsys.readouterr().err

    def test_probe_radii_flag(self, tmp_path):
        out = tmp_path / "probes"
        code = run_cli(
            "verify", "--n", "2", "--lambda", "2", "--mu", "-1",
            "--r-max", "10", "--probe-radii", "0.3 0.7", "--out", str(out),
        )
        assert code == 0
        report = json.loads(out.with_suffix(".verification.json").read_text())
        assert "(0.3, 0.7)" in report["grids_used"]

    def test_verify_stored_profile(self, tmp_path):
        out = tmp_path / "solved"
        assert run_cli(
            "solve", "--n", "2", "--lambda", "2", "--mu", "-1",
            "--r-max", "10", "--out", str(out), "--format", "json",
        ) == 0
        code = run_cli(
            "verify", "--profile", str(out.with_suffix(".json")),
            "--out", str(tmp_path / "v2"),
        )
        assert code == 0
