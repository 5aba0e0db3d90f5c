import csv
import subprocess
import sys

import pytest

from levysim.cli import ConfigError, main, read_config_file, resolve_config

HEADERS = {
    "histogram": ["bin_center", "empirical_density", "exact_density"],
    "convergence": ["wall_seconds", "n_samples", "linf_error"],
    "oracle": ["x", "density"],
    "subdivision": ["cell_lo", "cell_hi", "weight", "sup_estimate", "count"],
}


def _cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _header(path):
    with open(path) as fh:
        return next(csv.reader(fh))


def test_resolve_defaults_and_parsing():
    cfg = resolve_config("merton", {"omega": "-4, 4", "n_paths": "1e3", "n_cells": "default"})
    assert cfg["omega"] == (-4.0, 4.0)
    assert cfg["n_paths"] == 1000
    assert cfg["n_cells"] is None
    assert cfg["seed"] == 0 and cfg["workers"] == 1
    assert resolve_config("sweep-width", {"widths": "1,2.5"})["widths"] == [1.0, 2.5]


@pytest.mark.parametrize("command, raw", [
    ("merton", {"bogus": "1"}),
    ("merton", {"omega": "3,1"}),
    ("merton", {"omega": "1,2,3"}),
    ("merton", {"n_paths": "1.5"}),
    ("merton", {"lam": "abc"}),
    ("nig", {"lambda_mode": "sometimes"}),
    ("cgmy", {"Y": "1.5"}),
    ("two-mode", {"grid_dt": "0.5"}),
    ("sweep-width", {"n_samples": "1000"}),
    ("gauss-convergence", {"workers": "0"}),
])
def test_resolve_rejects(command, raw):
    with pytest.raises(ConfigError) as exc:
        resolve_config(command, raw)
    assert list(raw)[0] in str(exc.value)


def test_read_config_file(tmp_path):
    path = _cfg(tmp_path, "# comment\nlam = 5   # trailing\n\nomega=-1,1\n")
    assert read_config_file(path) == {"lam": "5", "omega": "-1,1"}
    with pytest.raises(ConfigError):
        read_config_file(_cfg(tmp_path, "no equals sign\n", "bad.cfg"))
    with pytest.raises(ConfigError):
        read_config_file(str(tmp_path / "missing.cfg"))


def test_exit_codes_for_config_errors(tmp_path, capsys):
    assert main(["cgmy", "--config", _cfg(tmp_path, "Y = 1.5\n"), "--out", str(tmp_path)]) == 2
    assert "Y" in capsys.readouterr().err
    assert main(["merton", "--config", _cfg(tmp_path, "typo = 3\n", "b.cfg")]) == 2
    assert main(["merton", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert main(["merton", "--workers", "0"]) == 2
    assert main(["no-such-command"]) == 2
    assert main(["merton", "--seed", "x"]) == 2
    assert list(tmp_path.glob("*.csv")) == []


def test_flags_override_config(tmp_path):
    cfg_path = _cfg(tmp_path, "seed = 5\nn_samples = 2000\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["two-mode", "--config", cfg_path, "--seed", "9", "--out", str(a)]) == 0
    assert main(["two-mode", "--config", _cfg(tmp_path, "seed = 9\nn_samples = 2000\n", "c.cfg"),
                 "--out", str(b)]) == 0
    assert (a / "two_mode_local-mh_trace.csv").read_bytes() == (b / "two_mode_local-mh_trace.csv").read_bytes()


def test_small_runs_write_expected_csv(tmp_path):
    small = _cfg(tmp_path, "n_samples = 5000\n")
    paths = _cfg(tmp_path, "n_paths = 1000\nbins = 40\n", "p.cfg")
    runs = [
        ("two-mode", small, {"two_mode_local-mh_trace.csv": ["step", "value"],
                             "two_mode_local-sf_trace.csv": ["step", "value"]}),
        ("gauss-convergence", small, {"gauss_aisf_convergence.csv": HEADERS["convergence"],
                                      "gauss_aisf_subdivision.csv": HEADERS["subdivision"]}),
        ("merton", paths, {"merton_oracle.csv": HEADERS["oracle"],
                           "merton_aimh_histogram.csv": HEADERS["histogram"],
                           "merton_aisf_convergence.csv": HEADERS["convergence"],
                           "merton_aisf_subdivision.csv": HEADERS["subdivision"]}),
        ("nig", paths, {"nig_oracle.csv": HEADERS["oracle"], "nig_direct_histogram.csv": HEADERS["histogram"]}),
        ("cgmy", paths, {"cgmy_oracle.csv": HEADERS["oracle"], "cgmy_aisf_histogram.csv": HEADERS["histogram"]}),
    ]
    for command, cfg_path, expected in runs:
        out = tmp_path / command
        assert main([command, "--config", cfg_path, "--out", str(out)]) == 0
        for name, header in expected.items():
            assert _header(out / name) == header, name


def test_sweep_width_csv(tmp_path):
    cfg_path = _cfg(tmp_path, "n_samples = 100000\nwidths = 1, 7, 20\n")
    assert main(["sweep-width", "--config", cfg_path, "--out", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / "sweep_width.csv")))
    assert rows[0] == ["width", "correlation"]
    assert [r[0] for r in rows[1:]] == ["1", "7", "20"]


def test_single_worker_output_is_deterministic(tmp_path):
    cfg_path = _cfg(tmp_path, "n_paths = 2000\nbins = 40\n")
    for d in ("a", "b"):
        assert main(["merton", "--config", cfg_path, "--seed", "3", "--out", str(tmp_path / d)]) == 0
    for f in sorted((tmp_path / "a").glob("*histogram.csv")) + sorted((tmp_path / "a").glob("*subdivision.csv")):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes(), f.name


def test_multi_worker_run(tmp_path):
    cfg_path = _cfg(tmp_path, "n_paths = 2000\nbins = 40\n")
    assert main(["cgmy", "--config", cfg_path, "--workers", "2", "--out", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / "cgmy_aisf_convergence.csv")))
    assert rows[-1][1] == "2000"


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "levysim", "cgmy", "--config", _cfg(tmp_path, "Y=1.5\n")],
                       capture_output=True, text=True)
    assert r.returncode == 2
    r = subprocess.run([sys.executable, "-m", "levysim", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "selftest" in r.stdout
