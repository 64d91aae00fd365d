import csv
import json
import math

import pytest

from qeraser import cli
from qeraser.config import ConfigError, ExperimentConfig


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def load(path):
    return json.loads(path.read_text())


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig.load(None)
        assert cfg["gamma"] == 1.0 and cfg["n_x"] == 2001
        assert cfg.wavelength() == pytest.approx(2.508e-12, rel=1e-3)

    def test_parsing(self):
        cfg = ExperimentConfig.from_text("# comment\nh = 0.6\nv = 0.8j\ngamma = 0.25\nsettings = xx, zz\n")
        assert cfg.params().v == 0.8j and cfg["settings"] == ("xx", "zz")

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="colour"):
            ExperimentConfig.from_text("colour = red\n")

    def test_bad_values(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_text("gamma = lots\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_text("h = 0.5\n")


class TestPattern:
    def test_bell_unconditioned(self, tmp_path):
        assert cli.main(["pattern", "--out", str(tmp_path / "o")]) == 0
        side = load(tmp_path / "o" / "pattern.json")
        assert side["visibility"] == 0.0
        rows = read_csv(tmp_path / "o" / "pattern.csv")
        assert len(rows) == 2001 and set(rows[0]) == {"x_m", "intensity", "envelope", "phase_rad"}

    def test_bell_conditioned(self, tmp_path):
        assert cli.main(["pattern", "--out", str(tmp_path / "o"), "--condition", "x+"]) == 0
        side = load(tmp_path / "o" / "pattern.json")
        assert side["visibility"] == pytest.approx(1, abs=1e-12)
        assert side["probability"] == pytest.approx(0.5)

    def test_wave_plate_condition(self, tmp_path):
        assert cli.main(["pattern", "--out", str(tmp_path / "o"), "--condition", "wp-"]) == 0
        assert load(tmp_path / "o" / "pattern.json")["visibility"] == pytest.approx(1, abs=1e-12)

    def test_unmarked(self, tmp_path):
        cfg = write_config(tmp_path, "h = 1\nv = 0\n")
        assert cli.main(["pattern", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        assert load(tmp_path / "o" / "pattern.json")["visibility"] == pytest.approx(1, abs=1e-12)

    def test_zero_probability_branch(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "h = 1\nv = 0\n")
        code = cli.main(["pattern", "--config", str(cfg), "--out", str(tmp_path / "o"), "--condition", "z-"])
        assert code == cli.EXIT_CONFIG
        assert "probability" in capsys.readouterr().err


@pytest.fixture(scope="module")
def rows(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    assert cli.main(["sweep", "--out", str(out), "--grid", "gamma=0:1:11,h2=0:1:11"]) == 0
    return out, read_csv(out / "sweep.csv")


class TestSweep:
    def lookup(self, rows, gamma, h2):
        for r in rows:
            if float(r["gamma"]) == pytest.approx(gamma) and float(r["h2"]) == pytest.approx(h2):
                return r
        raise KeyError((gamma, h2))

    def test_shape_and_files(self, rows):
        out, data = rows
        assert len(data) == 121
        for name in ("direct_visibility", "conditioned_visibility", "concurrence"):
            assert len(read_csv(out / f"{name}.csv")) == 121

    def test_corners(self, rows):
        _, data = rows
        r = self.lookup(data, 1.0, 0.0)
        assert float(r["direct_visibility"]) == pytest.approx(0, abs=1e-12)
        assert float(r["conditioned_visibility"]) == pytest.approx(1, abs=1e-12)
        assert float(r["concurrence"]) == pytest.approx(1, abs=1e-12)
        assert all(float(r["concurrence"]) == 0.0 for r in data if float(r["gamma"]) == 0.0)

    def test_interior_point(self, tmp_path):
        assert cli.main(["sweep", "--out", str(tmp_path), "--grid", "gamma=0.5:0.5:1,h2=0.36:0.36:1"]) == 0
        (row,) = read_csv(tmp_path / "sweep.csv")
        assert float(row["direct_visibility"]) == pytest.approx(0.30, abs=1e-12)

    def test_corners_match_report(self, rows, tmp_path):
        _, data = rows
        for gamma, h2 in ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)):
            h, v = math.sqrt(h2), math.sqrt(1 - h2)
            cfg = write_config(tmp_path, f"gamma = {gamma!r}\nh = {h!r}\nv = {v!r}\n", f"c{gamma}{h2}.cfg")
            out = tmp_path / f"r{gamma}{h2}"
            assert cli.main(["report", "--config", str(cfg), "--out", str(out)]) == 0
            rep = load(out / "report.json")
            row = self.lookup(data, gamma, h2)
            for key in ("concurrence", "negativity", "bell_fidelity", "witness_expectation", "eraser_lhs"):
                assert float(row[key]) == rep[key]

    def test_bad_grid(self, tmp_path):
        assert cli.main(["sweep", "--out", str(tmp_path), "--grid", "gamma=0:2:3"]) == cli.EXIT_CONFIG
        assert cli.main(["sweep", "--out", str(tmp_path), "--grid", "beta=0:1:3"]) == cli.EXIT_CONFIG


class TestReport:
    def test_bell(self, tmp_path):
        assert cli.main(["report", "--out", str(tmp_path)]) == 0
        rep = load(tmp_path / "report.json")
        assert rep["concurrence"] == pytest.approx(1) and rep["eraser_lhs"] == pytest.approx(2)

    def test_separable(self, tmp_path):
        cfg = write_config(tmp_path, "gamma = 0\n")
        assert cli.main(["report", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        rep = load(tmp_path / "o" / "report.json")
        assert rep["concurrence"] == 0.0 and rep["flags"] == []

    def test_partial(self, tmp_path):
        cfg = write_config(tmp_path, "gamma = 0.8\n")
        assert cli.main(["report", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        rep = load(tmp_path / "o" / "report.json")
        assert rep["bell_fidelity"] == pytest.approx(0.9, abs=1e-12)
        assert rep["witness_expectation"] == pytest.approx(-0.4, abs=1e-12)

    def test_unknown_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "gamma = 0.8\nslit_count = 3\n")
        assert cli.main(["report", "--config", str(cfg), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
        assert "slit_count" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert cli.main(["report", "--config", str(tmp_path / "nope"), "--out", str(tmp_path)]) == cli.EXIT_CONFIG

    def test_manifest_and_rerun(self, tmp_path):
        assert cli.main(["report", "--out", str(tmp_path)]) == 0
        first = (tmp_path / "manifest.json").read_bytes()
        assert cli.main(["report", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "manifest.json").read_bytes() == first
        files = load(tmp_path / "manifest.json")["files"]
        assert set(files) == {"config.json", "report.json"}


SMALL = "n_electrons = 27000\nphoton_generation_probability = 1\nseed = 42\n"


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("pipe")
    cfg = write_config(base, SMALL)
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(base / "sim")]) == 0
    assert cli.main(["analyze", str(base / "sim" / "events.ndjson"), "--out", str(base / "ana")]) == 0
    return base


class TestSimulateAnalyze:
    def test_outputs(self, runs):
        ana = runs / "ana"
        for name in ("header_config.json", "matching.json", "fits.json", "correlators.json",
                     "reconstruction.json", "report.json", "analysis.json", "manifest.json"):
            assert (ana / name).exists(), name
        assert len(list((ana / "histograms").glob("*.csv"))) == 18
        rep = load(ana / "report.json")
        assert rep["bell_fidelity"] > 0.9 and "bell_fidelity" in rep["flags"]

    def test_seed_echo(self, runs):
        summary = load(runs / "ana" / "analysis.json")
        header = json.loads((runs / "sim" / "events.ndjson").open().readline())
        assert summary["seed"] == 42 and summary["config"] == header["config"]

    def test_seed_override_and_determinism(self, runs, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        for name in ("a", "b"):
            assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / name), "--seed", "7"]) == 0
        a = (tmp_path / "a" / "events.ndjson").read_bytes()
        assert a == (tmp_path / "b" / "events.ndjson").read_bytes()
        assert a != (runs / "sim" / "events.ndjson").read_bytes()
        assert (tmp_path / "a" / "manifest.json").read_bytes() == (tmp_path / "b" / "manifest.json").read_bytes()

    def test_analyze_rerun_identical(self, runs, tmp_path):
        assert cli.main(["analyze", str(runs / "sim" / "events.ndjson"), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "manifest.json").read_bytes() == (runs / "ana" / "manifest.json").read_bytes()

    def test_missing_settings(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SMALL)
        assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "s"),
                         "--setting", "xx", "--setting", "zz"]) == 0
        code = cli.main(["analyze", str(tmp_path / "s" / "events.ndjson"), "--out", str(tmp_path / "a")])
        assert code == cli.EXIT_STATS
        assert "no coincidences" in capsys.readouterr().err

    def test_empty_file(self, tmp_path, capsys):
        (tmp_path / "e.ndjson").write_text("")
        assert cli.main(["analyze", str(tmp_path / "e.ndjson"), "--out", str(tmp_path / "o")]) == cli.EXIT_DATA
        assert "no events" in capsys.readouterr().err

    def test_version_mismatch(self, tmp_path):
        (tmp_path / "e.ndjson").write_text('{"format": "eraser-ev/0", "config": {}}\n')
        assert cli.main(["analyze", str(tmp_path / "e.ndjson"), "--out", str(tmp_path / "o")]) == cli.EXIT_DATA

    def test_missing_file(self, tmp_path):
        assert cli.main(["analyze", str(tmp_path / "none.ndjson"), "--out", str(tmp_path / "o")]) == cli.EXIT_DATA
