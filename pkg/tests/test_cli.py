import csv
import json
import math

import pytest

from dnastore.cli import fig1_default_grid, main
from dnastore.codebook import load_codebook


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def strip_metadata(payload):
    payload = dict(payload)
    payload.pop("metadata", None)
    return payload


def read_csv(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


class TestExponentCommand:
    def test_single_point(self, tmp_path):
        out = tmp_path / "exp.json"
        rc = main(
            ["exponent", "--c", "1.5", "--delta", "0.5", "--out", str(out)]
        )
        assert rc == 0
        payload = read_json(out)
        (row,) = payload["rows"]
        assert row["f_multinomial"] == pytest.approx(0.3745, abs=1e-3)
        assert row["f_poisson"] == pytest.approx(0.1831, abs=1e-4)
        assert payload["config"]["c"] == [1.5]

    def test_default_grid_dominance(self, tmp_path):
        out = tmp_path / "grid.csv"
        rc = main(["exponent", "--format", "csv", "--out", str(out)])
        assert rc == 0
        rows = read_csv(out)
        cs, deltas = fig1_default_grid()
        assert len(rows) == len(cs) * len(deltas)
        for row in rows:
            assert float(row["f_multinomial"]) >= float(row["f_poisson"]) - 1e-12

    def test_partial_grid_args_rejected(self, tmp_path):
        rc = main(["exponent", "--c", "1.5", "--out", str(tmp_path / "x.json")])
        assert rc == 2


class TestOccupancyCommand:
    def test_distribution_mode(self, tmp_path):
        out = tmp_path / "dist.csv"
        rc = main(
            ["occupancy", "--dist-M", "5", "--dist-N", "10", "--format", "csv",
             "--out", str(out)]
        )
        assert rc == 0
        rows = read_csv(out)
        assert [r["k"] for r in rows] == [str(k) for k in range(6)]
        assert sum(float(r["pmf"]) for r in rows) == pytest.approx(1.0, abs=1e-9)
        assert rows[0]["log_pmf"] == ""  # impossible outcome serialized empty

    def test_convergence_mode(self, tmp_path):
        out = tmp_path / "conv.json"
        rc = main(
            ["occupancy", "--c", "1.5", "--delta", "0.5",
             "--M-grid", "50", "100", "200", "--out", str(out)]
        )
        assert rc == 0
        payload = read_json(out)
        assert payload["summary"]["gaps_strictly_decreasing"] is True
        gaps = [row["gap"] for row in payload["rows"]]
        assert gaps == sorted(gaps, reverse=True)

    def test_capacity_guard_exit_code(self, tmp_path):
        rc = main(
            ["occupancy", "--c", "1.5", "--delta", "0.5", "--M-grid", "200",
             "--cell-cap", "10", "--out", str(tmp_path / "x.json")]
        )
        assert rc == 4

    def test_degenerate_rows(self, tmp_path):
        # delta*M rounds to 0: the row is a zero-probability event
        out = tmp_path / "deg.json"
        rc = main(
            ["occupancy", "--c", "1.5", "--delta", "0.001",
             "--M-grid", "100", "--out", str(out)]
        )
        assert rc == 0
        payload = read_json(out)
        row = payload["rows"][0]
        assert row["K"] == 0 and row["log_p"] is None and row["exponent"] is None
        assert payload["summary"]["degenerate_rows"] == 1
        # delta*M rounds to M: certain event, exponent exactly zero
        out2 = tmp_path / "full.json"
        rc = main(
            ["occupancy", "--c", "1.5", "--delta", "0.999",
             "--M-grid", "100", "--out", str(out2)]
        )
        assert rc == 0
        row = read_json(out2)["rows"][0]
        assert row["K"] == 100 and row["log_p"] == 0.0 and row["exponent"] == 0.0


class TestCodebookCommand:
    def test_build_and_report(self, tmp_path):
        out = tmp_path / "cb.json"
        rc = main(
            ["codebook", "--M", "8", "--inner-size", "32", "--N", "16",
             "--target-J", "30", "--cap", "6", "--seed", "5", "--out", str(out)]
        )
        assert rc == 0
        cb = load_codebook(out)
        assert len(cb) == 30
        report = read_json(str(out) + ".report.json")["report"]
        assert report["max_intersection"] <= 6
        assert report["cap_satisfied"] is True
        assert report["K2_lower"] is not None

    def test_shortfall_exit_and_partial(self, tmp_path):
        out = tmp_path / "cb.json"
        rc = main(
            ["codebook", "--M", "2", "--inner-size", "4", "--N", "4",
             "--target-J", "3", "--cap", "0", "--budget", "500",
             "--seed", "1", "--out", str(out)]
        )
        assert rc == 3
        cb = load_codebook(out)
        assert len(cb) == 2
        report = read_json(str(out) + ".report.json")["report"]
        assert report["shortfall"] == {"achieved": 2, "target": 3}

    def test_repetition_kind(self, tmp_path):
        out = tmp_path / "rep.json"
        rc = main(
            ["codebook", "--kind", "repetition", "--M", "16", "--inner-size",
             "64", "--N", "32", "--t", "0.5", "--target-J", "10", "--out", str(out)]
        )
        assert rc == 0
        cb = load_codebook(out)
        assert all(cw.size == 16 for cw in cb.codewords)


class TestSimulateCommand:
    def build_cb(self, tmp_path):
        out = tmp_path / "cb.json"
        assert main(
            ["codebook", "--M", "8", "--inner-size", "32", "--N", "12",
             "--target-J", "16", "--cap", "6", "--seed", "5", "--out", str(out)]
        ) == 0
        return out

    def test_none_model_report(self, tmp_path):
        cb = self.build_cb(tmp_path)
        out = tmp_path / "sim.json"
        rc = main(
            ["simulate", "--codebook", str(cb), "--model", "none",
             "--trials", "4000", "--seed", "3", "--out", str(out)]
        )
        assert rc == 0
        payload = read_json(out)
        rep = payload["report"]
        assert rep["trials"] == 4000
        assert rep["errors"] == sum(
            v for k, v in rep["failure_causes"].items() if k != "none"
        )
        (bound,) = payload["bounds"]
        assert bound["lower_consistent"] is True

    def test_rerun_byte_identical_modulo_metadata(self, tmp_path):
        cb = self.build_cb(tmp_path)

        def run(name, workers):
            out = tmp_path / name
            rc = main(
                ["simulate", "--codebook", str(cb), "--model", "erasure",
                 "--p", "0.2", "--trials", "6000", "--seed", "11",
                 "--workers", workers, "--out", str(out)]
            )
            assert rc == 0
            return out

        a, b = run("a.json", "1"), run("b.json", "1")
        # identical args: files agree byte for byte once the metadata block
        # (timestamp, wall time) is dropped
        strip = lambda path: json.dumps(strip_metadata(read_json(path)), sort_keys=True)
        assert strip(a) == strip(b)
        # a different worker count changes only its own config echo
        c = run("c.json", "2")
        pa, pc = read_json(a), read_json(c)
        assert pa["report"] == pc["report"]
        assert pa["bounds"] == pc["bounds"]
        a_cfg, c_cfg = dict(pa["config"]), dict(pc["config"])
        assert a_cfg.pop("workers") == 1 and c_cfg.pop("workers") == 2
        assert a_cfg == c_cfg

    def test_causes_csv_written(self, tmp_path):
        cb = self.build_cb(tmp_path)
        out = tmp_path / "sim.json"
        rc = main(
            ["simulate", "--codebook", str(cb), "--model", "none",
             "--trials", "1000", "--format", "csv", "--out", str(out)]
        )
        assert rc == 0
        rows = read_csv(str(out) + ".causes.csv")
        assert {r["cause"] for r in rows} == {"none", "outage", "collision",
                                              "sequencing", "tie"}

    def test_adversarial_needs_pair(self, tmp_path):
        cb = self.build_cb(tmp_path)
        rc = main(
            ["simulate", "--codebook", str(cb), "--model", "adversarial",
             "--p", "0.2", "--trials", "100", "--out", str(tmp_path / "x.json")]
        )
        assert rc == 2

    def test_config_file_with_flag_override(self, tmp_path):
        cb = self.build_cb(tmp_path)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"trials": 5000, "model": "none"}))
        out = tmp_path / "sim.json"
        rc = main(
            ["simulate", "--codebook", str(cb), "--config", str(cfg),
             "--trials", "2000", "--out", str(out)]
        )
        assert rc == 0
        payload = read_json(out)
        assert payload["report"]["trials"] == 2000  # flag wins
        rc = main(
            ["simulate", "--codebook", str(cb), "--config", str(cfg),
             "--out", str(out)]
        )
        assert rc == 0
        assert read_json(out)["report"]["trials"] == 5000  # config applies


class TestSweepCommand:
    def test_p_sweep(self, tmp_path):
        cb_path = tmp_path / "cb.json"
        assert main(
            ["codebook", "--M", "8", "--inner-size", "32", "--N", "8",
             "--target-J", "8", "--cap", "7", "--seed", "2", "--out", str(cb_path)]
        ) == 0
        out = tmp_path / "sweep.csv"
        rc = main(
            ["sweep", "--codebook", str(cb_path), "--model", "erasure",
             "--param", "p", "--values", "0.0", "0.3", "--trials", "3000",
             "--format", "csv", "--out", str(out)]
        )
        assert rc == 0
        rows = read_csv(out)
        assert [float(r["value"]) for r in rows] == [0.0, 0.3]
        assert all(0.0 <= float(r["p_hat"]) <= 1.0 for r in rows)

    def test_n_sweep(self, tmp_path):
        cb_path = tmp_path / "cb.json"
        assert main(
            ["codebook", "--M", "8", "--inner-size", "32", "--N", "8",
             "--target-J", "8", "--cap", "7", "--seed", "2", "--out", str(cb_path)]
        ) == 0
        out = tmp_path / "sweep.json"
        rc = main(
            ["sweep", "--codebook", str(cb_path), "--model", "none",
             "--param", "N", "--values", "4", "16", "--trials", "3000",
             "--out", str(out)]
        )
        assert rc == 0
        rows = read_json(out)["rows"]
        # more reads can only help a clean channel
        assert rows[1]["p_hat"] <= rows[0]["p_hat"] + 0.05

    def test_needs_values(self, tmp_path):
        rc = main(["sweep", "--param", "p", "--out", str(tmp_path / "x.json")])
        assert rc == 2
