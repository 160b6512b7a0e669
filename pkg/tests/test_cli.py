import json

import pytest

from main import cli, cli_main
from scan.schemas import ScanRecord

DECOUPLED = ["--f56", "0.75", "--ft56", "0.25"]
MIXED = ["--f56", "0.3", "--ft56", "0.1", "--ft3", "0.3", "--ftp", "0.2", "--ftm", "0.1", "--n", "1"]


class TestWindows:
    def test_decoupled_a(self, runner):
        result = runner.invoke(cli, ["windows", *DECOUPLED, "--ftp", "0", "--ftm", "0", "--ft3", "0", "--branch", "A"])
        assert result.exit_code == 0, result.stderr
        assert result.stdout == "A plus: (-1, 2)\nA minus: (-1, 2)\n"

    def test_b_lists_both_conventions(self, runner):
        result = runner.invoke(cli, ["windows", "--ft56", "0.5", "--branch", "B", "--sign", "plus"])
        assert result.exit_code == 0, result.stderr
        assert result.stdout.splitlines() == [
            "B plus paper_literal: (-1, 1)",
            "B plus shifted_index: (-2, 0)",
        ]

    def test_json(self, runner):
        result = runner.invoke(cli, ["windows", *DECOUPLED, "--branch", "A", "--sign", "plus", "--format", "json"])
        assert result.exit_code == 0, result.stderr
        (interval,) = json.loads(result.stdout)
        assert (interval["lower"], interval["upper"], interval["branch"]) == (-1.0, 2.0, "A")


class TestConfig:
    def test_flags_override_file(self, runner, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"f56": 0.75, "ft56": 0.1, "branch": "A", "sign": "plus"}))
        result = runner.invoke(cli, ["windows", "--config", str(config), "--ft56", "0.25"])
        assert result.exit_code == 0, result.stderr
        assert result.stdout == "A plus: (-1, 2)\n"

    def test_unknown_key(self, runner, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"f56": 0.75, "coupling": 1.0}))
        result = runner.invoke(cli, ["windows", "--config", str(config)])
        assert result.exit_code == 2
        assert "coupling" in result.stderr

    def test_missing_file(self, runner, tmp_path):
        result = runner.invoke(cli, ["windows", "--config", str(tmp_path / "absent.json")])
        assert result.exit_code == 2


class TestValidation:
    @pytest.mark.parametrize("args", [["--f56", "nan"], ["--ftm", "inf"], ["--rho0", "0"]])
    def test_bad_parameters(self, runner, args):
        result = runner.invoke(cli, ["norm", *args])
        assert result.exit_code == 2
        assert result.stderr.startswith("Error:")

    def test_unknown_choice(self, runner):
        result = runner.invoke(cli, ["windows", "--sign", "both"])
        assert result.exit_code == 2


class TestVerify:
    def test_passes(self, runner):
        result = runner.invoke(cli, ["verify", *MIXED])
        assert result.exit_code == 0, result.stderr
        lines = result.stdout.splitlines()
        assert len(lines) == 2
        assert all(line.startswith("PASS sign=") for line in lines)

    def test_decoupled_couplings(self, runner):
        result = runner.invoke(cli, ["verify", *DECOUPLED, "--n", "1"])
        assert result.exit_code == 0, result.stderr
        assert all(line.startswith("PASS sign=") for line in result.stdout.splitlines())

    def test_failure_exit_code(self, runner):
        result = runner.invoke(cli, ["verify", *MIXED, "--sign", "plus", "--tol", "0"])
        assert result.exit_code == 1
        assert result.stdout.startswith("FAIL sign=plus")

    def test_secular_needs_degenerate_couplings(self, runner):
        result = runner.invoke(cli, ["verify", *MIXED, "--secular"])
        assert result.exit_code == 2


class TestNorm:
    def test_b_conventions_and_quadrature(self, runner):
        result = runner.invoke(cli, ["norm", "--ft56", "0.5", "--n", "0", "--branch", "B", "--sign", "plus"])
        assert result.exit_code == 0, result.stderr
        out = result.stdout
        assert "window[paper_literal] (-1, 1): normalizable" in out
        assert "window[shifted_index] (-2, 0): not normalizable" in out
        assert "conventions matching quadrature: shifted_index (reported: shifted_index)" in out
        assert "quadrature: divergent at origin (origin_slope)" in out
        assert "agree: yes" in out

    def test_json_reports(self, runner):
        result = runner.invoke(cli, ["norm", "--f56", "0.5", "--ft56", "0.5", "--sign", "minus", "--format", "json"])
        assert result.exit_code == 0, result.stderr
        reports = json.loads(result.stdout)
        assert [r["branch"] for r in reports] == ["A", "B"]
        assert reports[0]["closed_form"] == pytest.approx(1.0)
        assert reports[0]["quadrature"]["value"] == pytest.approx(1.0, rel=1e-9)


class TestScan:
    def test_csv_to_stdout(self, runner):
        result = runner.invoke(cli, ["scan", *DECOUPLED, "--sign", "plus"])
        assert result.exit_code == 0, result.stderr
        lines = result.stdout.splitlines()
        assert lines[0] == ",".join(ScanRecord.model_fields)
        assert len(lines) == 3

    def test_range_and_file_output(self, runner, tmp_path):
        out = tmp_path / "scan.csv"
        args = ["scan", "--f56-range", "0", "1", "3", "--sign", "minus", "--out", str(out)]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.stderr
        assert result.stdout == ""
        assert len(out.read_text().splitlines()) == 1 + 3 * 2

    def test_quad_check_reports_b_reading(self, runner):
        result = runner.invoke(cli, ["scan", "--ft56", "0.5", "--quad-check", "--n-min", "-3", "--n-max", "3"])
        assert result.exit_code == 0, result.stderr
        assert (
            "B window reading confirmed by quadrature: shifted_index "
            "(mismatches over 14 checks: paper_literal 4, shifted_index 0)"
        ) in result.stderr

    def test_rejects_plot_columns(self, runner):
        result = runner.invoke(cli, ["scan", "--format", "plot_columns"])
        assert result.exit_code == 2

    @pytest.mark.parametrize("args", [["--n-min", "3", "--n-max", "1"], ["--f56-range", "1", "0", "2"]])
    def test_bad_grid(self, runner, args):
        assert runner.invoke(cli, ["scan", *args]).exit_code == 2


class TestProfile:
    def test_integrand_columns(self, runner):
        args = ["profile", "--f56", "0.5", "--ft56", "0.5", "--quantity", "integrand",
                "--rho-min", "1", "--rho-max", "4", "--points", "3"]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.stderr
        lines = result.stdout.splitlines()
        assert lines[0] == "# rho value"
        assert len(lines) == 4
        rho, value = lines[1].split()
        assert rho == "1.0000000000000000"
        assert float(value) == pytest.approx(1.25 ** -3)

    def test_normalize(self, runner):
        args = ["profile", "--f56", "0.5", "--ft56", "0.5", "--rho0", "2", "--sign", "minus", "--normalize",
                "--rho-min", "1", "--rho-max", "4", "--points", "3"]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.stderr
        _, value = result.stdout.splitlines()[1].split()
        # norm (2 rho0)^2 / 4 = 4 halves the amplitude
        assert float(value) == pytest.approx(0.5 * 1.0625 ** -0.5, rel=1e-9)

    def test_normalize_divergent(self, runner):
        result = runner.invoke(cli, ["profile", *DECOUPLED, "--n", "3", "--sign", "minus", "--normalize"])
        assert result.exit_code == 1
        assert result.stderr.startswith("Error: Profile is not normalizable")

    def test_bad_radii(self, runner):
        result = runner.invoke(cli, ["profile", "--rho-min", "2", "--rho-max", "1"])
        assert result.exit_code == 2


class TestEntryPoint:
    def test_exit_codes(self, capsys):
        assert cli_main(["windows", *DECOUPLED, "--branch", "A", "--sign", "plus"]) == 0
        assert capsys.readouterr().out == "A plus: (-1, 2)\n"
        assert cli_main(["windows", "--f56", "nan"]) == 2
        assert cli_main(["windows", "--no-such-flag"]) == 2
        assert cli_main(["verify", *MIXED, "--sign", "plus", "--tol", "0"]) == 1

    def test_verbose_flag(self, runner):
        result = runner.invoke(cli, ["--verbose", "windows", *DECOUPLED, "--branch", "A", "--sign", "minus"])
        assert result.exit_code == 0, result.stderr
        assert result.stdout == "A minus: (-1, 2)\n"
