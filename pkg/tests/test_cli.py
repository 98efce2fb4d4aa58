import csv
import json
import math

import pytest

from ri1d import __version__
from ri1d.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestExactCommands:
    def test_vacant_exact(self, capsys):
        code, out = run(capsys, "vacant-exact", "--alpha", "1",
                        "--min", "0", "--max", "2")
        assert code == 0
        assert "0.367879441171" in out

    def test_capacity(self, capsys):
        code, out = run(capsys, "capacity", "--min", "-2", "--max", "3")
        assert code == 0
        assert "capacity_hat = 2.5" in out

    def test_count_paths(self, capsys):
        code, out = run(capsys, "count-paths", "--x", "1", "--delta", "3",
                        "--k", "2")
        assert code == 0 and "count = 2" in out

    def test_eval_h_both(self, capsys):
        code, out = run(capsys, "eval-h", "--n", "10", "--x", "5",
                        "--t", "200", "--backend", "both")
        assert code == 0
        lines = dict(l.split(" = ") for l in out.strip().splitlines())
        assert abs(float(lines["h_dp"]) / float(lines["h_spectral"]) - 1) <= 1e-10

    def test_ring_vacant(self, capsys):
        code, out = run(capsys, "ring-vacant-exact", "--n", "12", "--t", "30",
                        "--x0", "6", "--a", "2", "--b", "1")
        assert code == 0 and out.startswith("vacant_prob = ")

    def test_localtime_cf(self, capsys):
        code, out = run(capsys, "localtime-cf", "--alpha", "1", "--x", "3",
                        "--t", "0")
        assert code == 0 and "real = 1" in out

    def test_twelve_digits(self, capsys):
        _, out = run(capsys, "vacant-exact", "--alpha", "1",
                     "--min", "0", "--max", "3")
        val = out.split("=")[1].strip()
        assert len(val.replace(".", "").lstrip("0")) >= 12


class TestErrors:
    def test_domain_error_exit_2(self, capsys):
        code = main(["vacant-exact", "--alpha", "-1", "--min", "0", "--max", "2"])
        assert code == 2

    def test_usage_error_exit_2(self):
        with pytest.raises(SystemExit) as e:
            main(["no-such-command"])
        assert e.value.code == 2

    def test_ring_domain_error(self, capsys):
        code = main(["ring-vacant-exact", "--n", "10", "--t", "5", "--x0", "2",
                     "--a", "1", "--b", "3"])
        assert code == 2


class TestSamplers:
    def test_sample_window_reproducible(self, capsys):
        _, out1 = run(capsys, "sample-window", "--alpha", "1", "--L", "5",
                      "--seed", "3")
        _, out2 = run(capsys, "sample-window", "--alpha", "1", "--L", "5",
                      "--seed", "3")
        assert out1 == out2

    def test_sample_localtime_worker_invariance(self, capsys):
        _, out1 = run(capsys, "sample-localtime", "--alpha", "1", "--x", "3",
                      "--samples", "200000", "--seed", "5", "--workers", "1")
        _, out2 = run(capsys, "sample-localtime", "--alpha", "1", "--x", "3",
                      "--samples", "200000", "--seed", "5", "--workers", "4")
        assert out1 == out2

    def test_sample_ring(self, capsys):
        code, out = run(capsys, "sample-ring", "--n", "8", "--t", "20",
                        "--x0", "4", "--seed", "1")
        assert code == 0
        lines = dict(l.split(" = ") for l in out.strip().splitlines())
        assert 0 < int(lines["min"]) and int(lines["max"]) < 8


class TestOutputs:
    def test_json_fields(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        code, _ = run(capsys, "verify", "clt", "--alpha", "1", "--x", "50",
                      "--samples", "20000", "--seed", "7", "--out", str(out))
        doc = json.loads(out.read_text())
        assert doc["version"] == __version__
        assert doc["seed"] == 7
        assert doc["inputs"]["x"] == 50
        assert doc["wall_time_s"] > 0
        assert doc["verdicts"] and {"name", "statistic", "threshold", "passed"} \
            <= set(doc["verdicts"][0])

    def test_csv_header(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code, _ = run(capsys, "localtime-pmf", "--alpha", "1", "--x", "2",
                      "--format", "csv", "--out", str(out))
        assert code == 0
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["key", "value"]
        assert ["s", "probability"] in rows
        first = rows[rows.index(["s", "probability"]) + 1]
        assert first[0] == "0"
        assert float(first[1]) == pytest.approx(math.exp(-1), rel=1e-10)


class TestVerify:
    def test_verify_clt_passes(self, capsys):
        code, out = run(capsys, "verify", "clt", "--alpha", "1", "--x", "400",
                        "--samples", "100000", "--seed", "7")
        assert code == 0 and out.startswith("PASS")

    def test_verify_martingale(self, capsys):
        code, out = run(capsys, "verify", "martingale", "--seed", "7")
        assert "martingale defect" in out

    def test_verify_pi4(self, capsys):
        code, out = run(capsys, "verify", "pi4", "--seed", "7")
        assert code == 0 and out.count("PASS") == 3
