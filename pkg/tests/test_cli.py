import csv
import os

import pytest

from pathlab import cli
from pathlab.experiments import CATALOG, list_experiments
from pathlab.io import config_hash, format_value, read_sidecar, write_csv, write_sidecar


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def ho_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("ho")
    assert cli.main(["run", "ho-slicing-rate", "--output-dir", str(out)]) == 0
    return out


class TestRun:
    def test_three_files(self, ho_run):
        assert sorted(os.listdir(ho_run)) == ["data.csv", "metadata.txt", "report.csv"]
        rows = read_csv(ho_run / "report.csv")
        assert "slope" in rows[0] and abs(float(rows[0]["slope"]) - 1.0) < 0.3

    def test_files_carry_hash_and_conventions(self, ho_run):
        meta = read_sidecar(ho_run / "metadata.txt")
        for name in ("data.csv", "report.csv"):
            for row in read_csv(ho_run / name):
                assert row["config_hash"] == meta["config_hash"]
                assert row["conventions"] == meta["conventions"]
        assert meta["experiment"] == "ho-slicing-rate" and "§3.2" in meta["anchor"]

    def test_near_exceptional(self, tmp_path, capsys):
        code = cli.main(["run", "trotter-pointwise", "--t", "3.14159", "--potential", "harmonic", "--output-dir", str(tmp_path)])
        assert code != 0
        assert "exceptional" in capsys.readouterr().err.lower()
        assert not os.listdir(tmp_path)

    def test_free_sanity(self, tmp_path):
        assert cli.main(["run", "free-sanity", "--slices", "2,4", "--output-dir", str(tmp_path)]) == 0
        assert all(float(r["error"]) < 1e-6 for r in read_csv(tmp_path / "data.csv"))

    def test_env_output_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path))
        assert cli.main(["run", "exceptional-times"]) == 0
        assert (tmp_path / "exceptional-times" / "report.csv").exists()

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# midpoint sweep\nexperiment = midpoint-rule-orders\ngaps = 0.2, 0.1, 0.05\n")
        out = tmp_path / "out"
        assert cli.main(["run", "midpoint-rule-orders", "--config", str(cfg), "--output-dir", str(out)]) == 0
        assert read_sidecar(out / "metadata.txt")["param.gaps"] == "0.2,0.1,0.05"
        assert len(read_csv(out / "data.csv")) == 3

    def test_override_beats_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("box = 1.0\n")
        out = tmp_path / "out"
        assert cli.main(["run", "midpoint-rule-orders", "--config", str(cfg), "--box=1.5", "--output-dir", str(out)]) == 0
        assert read_sidecar(out / "metadata.txt")["param.box"] == "1.5"


class TestErrors:
    @pytest.mark.parametrize(
        "argv, field",
        [
            (["run", "no-such-experiment"], "experiment"),
            (["run", "ho-slicing-rate", "--bogus", "1"], "bogus"),
            (["run", "ho-slicing-rate", "--t", "soon"], "t"),
            (["run", "ho-slicing-rate", "--slices", "4,x"], "slices"),
            (["run", "trotter-pointwise", "--potential", "quartic(1)"], "potential"),
            (["run", "ho-slicing-rate", "--t"], "t"),
        ],
    )
    def test_config_errors_name_the_field(self, argv, field, capsys, tmp_path):
        assert cli.main(argv + ["--output-dir", str(tmp_path)]) == cli.EXIT_CONFIG
        err = capsys.readouterr().err
        assert "configuration error" in err and repr(field) in err
        assert not os.listdir(tmp_path)

    def test_missing_config_file(self, tmp_path, capsys):
        assert cli.main(["run", "free-sanity", "--config", str(tmp_path / "nope.cfg")]) == cli.EXIT_CONFIG

    def test_malformed_config_line(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("slices 2,4\n")
        assert cli.main(["run", "free-sanity", "--config", str(cfg)]) == cli.EXIT_CONFIG


class TestList:
    def test_catalog(self, capsys):
        assert cli.main(["list"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) >= 10 and len(lines) == len(CATALOG)
        assert all("§" in line for line in lines)

    def test_ho_anchor(self):
        anchors = {n: a for n, _, a in list_experiments()}
        assert "§3.2" in anchors["ho-slicing-rate"] and "convergence theorem" in anchors["ho-slicing-rate"]

    def test_minimum_catalog(self):
        required = {
            "free-sanity", "ho-slicing-rate", "ho-broken-line-rate", "midpoint-rule-orders", "taylor-rate-N1",
            "taylor-rate-N2", "trotter-strong-convergence", "trotter-pointwise", "gabor-norm-equivalence",
            "fio-decay-metaplectic", "lp-loss-probe", "fourier-sharpness", "hbar-uniformity",
        }
        assert required <= set(CATALOG)


class TestIO:
    def test_format_value(self):
        assert format_value(0.1) == "0.1" and format_value(True) == "true" and format_value(3) == "3"
        assert float(format_value(1 / 3)) == 1 / 3

    def test_hash_is_order_independent(self):
        assert config_hash({"a": 1, "b": 2.5}) == config_hash({"b": 2.5, "a": 1})
        assert config_hash({"a": 1}) != config_hash({"a": 2})

    def test_csv_quoting(self, tmp_path):
        p = write_csv(tmp_path / "x.csv", ["k", "v"], [{"k": "a,b", "v": 1.5}], {"note": 'say "hi"'})
        text = open(p, newline="").read()
        assert text == 'k,v,note\n"a,b",1.5,"say ""hi"""\n'

    def test_sidecar_roundtrip(self, tmp_path):
        p = write_sidecar(tmp_path / "m.txt", {"a": 1, "b": "x = y"})
        assert read_sidecar(p) == {"a": "1", "b": "x = y"}
