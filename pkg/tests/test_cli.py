import pytest

from timeschwarz import cli
from timeschwarz.experiments import left_grid
from timeschwarz.spectral import SpectralParams, optimal_theta, sweep
from timeschwarz.validation import Check


def test_theta_prints_reference_value(capsys):
    assert cli.main(["theta", "--variant", "SD1", "--nu", "0.1", "--gamma", "10",
                     "--T", "1", "--alpha", "0.4"]) == 0
    out, err = capsys.readouterr()
    assert float(out) == pytest.approx(0.692, abs=5e-4)
    assert '"alpha": 0.4' in err  # resolved parameters


def test_scientific_notation(capsys):
    assert cli.main(["theta", "--variant", "SN1", "--nu", "1e-1", "--gamma", "1.0e1"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.640, abs=5e-4)


def test_rho_sweep_is_byte_identical(tmp_path):
    out = tmp_path / "cli.csv"
    assert cli.main(["rho-sweep", "--variant", "SN1", "--theta-opt", "--out", str(out)]) == 0
    p = SpectralParams()
    direct = tmp_path / "direct.csv"
    sweep("SN1", left_grid(), p, theta=optimal_theta("SN1", p)).to_csv(direct)
    assert out.read_bytes() == direct.read_bytes()


def test_rho_sweep_sd3_all_ones(tmp_path):
    out = tmp_path / "sd3.csv"
    assert cli.main(["rho-sweep", "--variant", "SD3", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()[1:]
    assert rows and all(r.split(",")[1] == "1" for r in rows)


def test_default_outdir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTDIR_ENV, str(tmp_path / "env"))
    assert cli.main(["rho-sweep", "--variant", "SD1"]) == 0
    assert (tmp_path / "env" / "rho_SD1.csv").exists()


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["theta", "--variant", "SD1", "--unknown", "1"],
    ["theta", "--variant", "SD3"],
    ["schwarz", "--variant", "SD1", "--nt", "3.5"],
    ["theta", "--variant", "SD1", "--alpha", "2"],
    ["rho-sweep", "--variant", "SD1", "--theta", "0.5", "--theta-opt"],
])
def test_usage_errors(argv, capsys):
    assert cli.main(argv) == 2


def test_help_lists_flags(capsys):
    assert cli.main(["schwarz", "--help"]) == 0
    out = capsys.readouterr().out
    for flag in ("--variant", "--theta", "--nx", "--nt", "--max-iter", "--tol", "--order",
                 "--init", "--seed", "--out"):
        assert flag in out


def test_schwarz_divergence_is_not_an_error(tmp_path, capsys):
    out = tmp_path / "sd2.csv"
    code = cli.main(["schwarz", "--variant", "SD2", "--nx", "8", "--nt", "16", "--max-iter", "40",
                     "--out", str(out)])
    assert code == 0
    assert "diverged=true" in capsys.readouterr().out
    assert out.exists()


def test_schwarz_convergent_run(tmp_path, capsys):
    out = tmp_path / "sd1.csv"
    assert cli.main(["schwarz", "--variant", "SD1", "--theta", "0.975", "--nx", "8", "--nt", "16",
                     "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "converged=true" in text and "diverged=false" in text


def test_solve_writes_trajectory(tmp_path):
    out = tmp_path / "ref.csv"
    assert cli.main(["solve", "--nx", "4", "--nt", "8", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("t,y_1,y_2,y_3,lambda_1") and len(lines) == 10


def test_oracle_output(capsys):
    assert cli.main(["oracle", "--d", "10", "--variant", "SD1", "--nt", "512"]) == 0
    out = dict(line.split("=") for line in capsys.readouterr().out.split())
    assert float(out["measured"]) == pytest.approx(float(out["analytic"]), rel=1e-3)


def test_reproduce_fig_left(tmp_path):
    assert cli.main(["reproduce", "fig-left", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "fig_left" / "manifest.json").exists()


def test_reproduce_fig_right_small(tmp_path, capsys):
    assert cli.main(["reproduce", "fig-right", "--nx", "8", "--nt", "16", "--out", str(tmp_path)]) == 0
    assert "SD2: diverged" in capsys.readouterr().out


@pytest.mark.parametrize("ok,code", [(True, 0), (False, 1)])
def test_validate_exit_codes(monkeypatch, capsys, ok, code):
    monkeypatch.setattr(cli, "validate", lambda quick=False: [Check("a", True), Check("b", ok)])
    assert cli.main(["validate", "--quick"]) == code
    assert ("FAIL" in capsys.readouterr().out) == (not ok)
