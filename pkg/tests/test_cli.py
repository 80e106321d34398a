import csv
import json

import numpy as np
import pytest

from weekahead.cli import main
from weekahead.stats import read_matrix
from weekahead.timeseries import ingest_csv


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def small_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "small.csv"
    assert main(["generate", "--seed", "2", "--days", "98", "--out", str(path)]) == 0
    return path


class TestGenerate:
    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["generate", "--seed", "11", "--days", "35", "--out", str(a)]) == 0
        assert main(["generate", "--seed", "11", "--days", "35", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_flags(self, tmp_path):
        out = tmp_path / "g.csv"
        args = ["generate", "--seed", "1", "--days", "28", "--peak-load", "900", "--generators", "3", "--out", str(out)]
        assert main(args + ["--monday-decorrelation", "0.5"]) == 0
        header = out.read_text().splitlines()[0]
        assert header == "hour,total_load,gen_1,gen_2,gen_3"
        assert ingest_csv(out, "total_load").values.max() == pytest.approx(900.0)

    def test_missing_required(self, tmp_path, capsys):
        assert main(["generate", "--out", str(tmp_path / "x.csv")]) == 1
        assert "--seed" in capsys.readouterr().err

    def test_invalid_value_is_data_error(self, tmp_path):
        assert main(["generate", "--seed", "1", "--days", "5", "--out", str(tmp_path / "x.csv")]) == 2


class TestForecast:
    @pytest.mark.parametrize("method", ["egpr", "gpr-se", "arima"])
    def test_rows_and_columns(self, tmp_path, small_csv, method):
        out = tmp_path / "f.csv"
        assert main(["forecast", "--data", str(small_csv), "--week", "11", "--n", "5", "--method", method, "--out", str(out)]) == 0
        rows = read_rows(out)
        assert list(rows[0]) == ["hour", "mean", "std", "prior_mean", "reference"]
        assert len(rows) == 120
        assert rows[0]["hour"] == "49" and rows[-1]["hour"] == "168"

    def test_values_match_library(self, tmp_path, small_csv):
        from weekahead.egpr import EgprConfig, forecast

        out = tmp_path / "f.csv"
        assert main(["forecast", "--data", str(small_csv), "--week", "12", "--layout", "monday", "--n", "8", "--out", str(out)]) == 0
        res = forecast(ingest_csv(small_csv, "total_load"), 12, EgprConfig("monday", 8))
        rows = read_rows(out)
        assert len(rows) == 144
        np.testing.assert_array_equal([float(r["mean"]) for r in rows], res.mean)

    def test_reference_blank_for_partial_week(self, tmp_path, small_csv):
        # 98 days = 14 weeks; drop the last 5 days so week 13 has only obs hours
        text = small_csv.read_text().splitlines()
        trimmed = tmp_path / "trim.csv"
        trimmed.write_text("\n".join(text[: 1 + 13 * 168 + 60]) + "\n")
        out = tmp_path / "f.csv"
        assert main(["forecast", "--data", str(trimmed), "--week", "13", "--n", "5", "--out", str(out)]) == 0
        assert all(r["reference"] == "" for r in read_rows(out))

    def test_list_weeks(self, small_csv, capsys):
        assert main(["forecast", "--data", str(small_csv), "--list-weeks"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "week,start_hour,first_day,last_day"
        assert lines[1] == "0,0,0,6" and len(lines) == 15

    def test_exit_codes(self, tmp_path, small_csv):
        out = str(tmp_path / "f.csv")
        assert main(["forecast", "--data", str(small_csv), "--week", "2", "--out", out]) == 2
        assert main(["forecast", "--data", str(tmp_path / "missing.csv"), "--week", "2", "--out", out]) == 2
        assert main(["forecast", "--data", str(small_csv), "--week", "11", "--method", "lstm", "--out", out]) == 1
        assert main(["forecast", "--data", str(small_csv), "--week", "11"]) == 1
        assert main([]) == 1
        assert main(["frobnicate"]) == 1

    def test_numerical_failure_exit_code(self, tmp_path, monkeypatch, small_csv):
        from weekahead import cli
        from weekahead.exceptions import NumericalError

        def boom(*a, **k):
            raise NumericalError("not positive definite", minor=3)

        monkeypatch.setattr(cli.evaluation, "run_egpr", boom)
        assert main(["forecast", "--data", str(small_csv), "--week", "11", "--out", str(tmp_path / "f.csv")]) == 3

    def test_config_file_and_override(self, tmp_path, small_csv):
        cfg = tmp_path / "run.conf"
        cfg.write_text(f"data = {small_csv}\nweek = 11\nlayout = monday\nn = 6\n")
        out = tmp_path / "f.csv"
        assert main(["--config", str(cfg), "forecast", "--out", str(out)]) == 0
        assert len(read_rows(out)) == 144
        assert main(["forecast", "--config", str(cfg), "--layout", "tuesday", "--out", str(out)]) == 0
        assert len(read_rows(out)) == 120

    def test_bad_config_value(self, tmp_path, small_csv):
        cfg = tmp_path / "run.conf"
        cfg.write_text("layout = wednesday\n")
        assert main(["--config", str(cfg), "forecast", "--data", str(small_csv), "--week", "11", "--out", "x"]) == 1


class TestCompare:
    def test_outputs(self, tmp_path, small_csv, capsys):
        out = tmp_path / "cmp.json"
        assert main(["compare", "--data", str(small_csv), "--weeks", "12,11", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert [r["target_week"] for r in data["reports"]] == [11, 12]
        assert set(data["reports"][0]["methods"]) == {"egpr", "gpr-se", "arima"}
        for w in (11, 12):
            for m in ("egpr", "gpr-se", "arima"):
                assert len(read_rows(tmp_path / f"cmp_week{w}_tuesday_{m}.csv")) == 120
        assert "MAPE" in capsys.readouterr().out

    def test_methods_subset_and_unknown(self, tmp_path, small_csv):
        out = tmp_path / "c.json"
        assert main(["compare", "--data", str(small_csv), "--weeks", "12", "--methods", "egpr", "--out", str(out)]) == 0
        assert list(json.loads(out.read_text())["reports"][0]["methods"]) == ["egpr"]
        assert main(["compare", "--data", str(small_csv), "--weeks", "12", "--methods", "egpr,svm", "--out", str(out)]) == 1

    def test_deterministic(self, tmp_path, small_csv):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            assert main(["compare", "--data", str(small_csv), "--weeks", "12", "--out", str(p)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestSpectrumCovariance:
    def test_spectrum(self, tmp_path, small_csv):
        out = tmp_path / "s.csv"
        assert main(["spectrum", "--data", str(small_csv), "--week", "12", "--n", "10", "--exclude-monday", "true", "--out", str(out)]) == 0
        rows = read_rows(out)
        assert len(rows) == 144
        vals = [float(r["eigenvalue"]) for r in rows]
        assert vals == sorted(vals, reverse=True)

    def test_covariance(self, tmp_path, small_csv):
        out = tmp_path / "c.csv"
        assert main(["covariance", "--data", str(small_csv), "--week", "12", "--n", "10", "--out", str(out)]) == 0
        C = read_matrix(out)
        assert C.shape == (168, 168)
        np.testing.assert_array_equal(C, C.T)

    def test_bad_bool(self, tmp_path, small_csv):
        assert main(["spectrum", "--data", str(small_csv), "--week", "12", "--exclude-monday", "maybe", "--out", "x"]) == 1
