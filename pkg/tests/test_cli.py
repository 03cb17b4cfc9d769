import json
import subprocess
import sys

import pytest

from torusfilter.cli import ConfigError, main, parse_config

SMALL_CURVE = """
experiment = rate-fit
grid.size = 8
obs.n = 64
scenario.kind = integrable
curve.checkpoints = 4 8 16 32 64
curve.seeds = 2
"""


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_unknown_keys_listed(tmp_path, capsys):
    cfg = _write(tmp_path, "experiment = rate-fit\nfoo.bar = 1\nzeta = 2\n")
    assert main(["--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "unknown config keys: foo.bar, zeta" in capsys.readouterr().err


def test_bad_values():
    with pytest.raises(ConfigError, match="experiment must be one of"):
        parse_config("experiment = nope")
    with pytest.raises(ConfigError, match="model.c needs two components"):
        parse_config("model.c = 1 2 3")
    with pytest.raises(ConfigError, match="bad value for obs.n"):
        parse_config("obs.n = many")


def test_invalid_scenario_named(tmp_path, capsys):
    cfg = _write(tmp_path, "experiment = smoother-limit\nscenario.kind = turbulent\n")
    assert main(["--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "turbulent" in capsys.readouterr().err


def test_oracle_suite_exit_zero(tmp_path, capsys):
    cfg = _write(tmp_path, "experiment = oracle-suite\noracle.realizations = 1000\n")
    out = tmp_path / "o"
    assert main(["--config", cfg, "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "FAIL" not in text and "PASS" in text
    assert (out / "geometric_sums.csv").exists() and (out / "brownian_moments.csv").exists()


def test_reruns_byte_identical_and_manifest(tmp_path):
    cfg = _write(tmp_path, SMALL_CURVE)
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main(["--config", cfg, "--out", str(o)]) == 0
    man = json.loads((outs[0] / "manifest.json").read_text())
    for key in ("experiment", "config", "seeds", "code_version", "outputs", "started"):
        assert key in man
    assert man["experiment"] == "rate-fit" and man["seeds"]["curve_seeds"] == 2
    for name in ("curve.csv", "state.csv", "mean_coefficients.csv", "mean.pgm", "truth.pgm"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_seeds_flag_overrides(tmp_path):
    cfg = _write(tmp_path, SMALL_CURVE)
    main(["--config", cfg, "--out", str(tmp_path / "o"), "--seeds", "3"])
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["seeds"]["curve_seeds"] == 3


def test_check_flag_breach(tmp_path):
    cfg = _write(tmp_path, SMALL_CURVE + "check.slope_low = 5\ncheck.slope_high = 6\n")
    assert main(["--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert main(["--config", cfg, "--out", str(tmp_path / "o"), "--check"]) == 1


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, "experiment = oracle-suite\noracle.triples = 5\noracle.realizations = 200\n")
    res = subprocess.run([sys.executable, "-m", "torusfilter", "--config", cfg, "--out", str(tmp_path / "o")],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr


def test_gibbs_velocity_outputs(tmp_path):
    cfg = _write(tmp_path, "experiment = gibbs-velocity\nobs.n = 10\nmcmc.beta = 0.001\n"
                           "mcmc.n_burn = 50\nmcmc.n_keep = 200\ngibbs.inner_v_steps = 2\n")
    out = tmp_path / "o"
    assert main(["--config", cfg, "--out", str(out), "--check"]) == 0
    rows = (out / "velocity_summary.csv").read_text().splitlines()
    assert rows[0] == "quantity,c1,c2" and [r.split(",")[0] for r in rows[1:]] == ["seed", "proposal_std", "mean", "std"]
    assert (out / "chain.csv").read_text().count("\n") == 201


def test_mcmc_ic_check(tmp_path):
    cfg = _write(tmp_path, "experiment = mcmc-ic\ngrid.size = 6\ngrid.max_mode = 2\nobs.n = 5\nobs.sigma2 = 0.1\n"
                           "truth.ic = prior-draw\nmcmc.n_burn = 1000\nmcmc.n_keep = 20000\n")
    assert main(["--config", cfg, "--out", str(tmp_path / "o"), "--check"]) == 0
