import csv
import io
import json
import math

import pytest

from bsm import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestSweepParsing:
    def test_range(self):
        axis, values = cli.parse_sweep("tau=0.1:0.9:0.1")
        assert axis == "tau" and values == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]

    def test_list_and_k(self):
        assert cli.parse_sweep("eps=0.05,0.1") == ("eps", [0.05, 0.1])
        assert cli.parse_sweep("k=5:20:5") == ("k", [5, 10, 15, 20])

    @pytest.mark.parametrize("text", ["alpha=0.1:1:0.1", "tau", "tau=0.1:0.5:0", "tau=a:b:c"])
    def test_invalid(self, text):
        with pytest.raises(cli.SpecError):
            cli.parse_sweep(text)


class TestSingleRun:
    def test_worked_example_report(self, capsys):
        code, out, _ = run(capsys, "--gen", "fig1", "--alg", "tsgreedy", "--k", "2", "--tau", "0.8")
        assert code == 0
        assert "items: v4 v1" in out
        assert "satisfied: g=0.5556 ≥ 0.4444" in out
        assert "U2" in out

    def test_vacuous_constraint(self, capsys):
        code, out, _ = run(capsys, "--gen", "fig1", "--alg", "greedy", "--k", "2", "--tau", "0")
        assert code == 0 and "constraint vacuous (tau=0)" in out

    def test_violation_reported(self, capsys):
        _, out, _ = run(capsys, "--gen", "fig1", "--alg", "greedy", "--k", "2", "--tau", "0.8")
        assert "violated: g=0.0000 < 0.4444" in out

    def test_files(self, capsys, fixtures_dir):
        code, out, _ = run(capsys, "--sets", str(fixtures_dir / "fig1_sets.tsv"),
                           "--groups", str(fixtures_dir / "fig1_groups.tsv"),
                           "--alg", "brute-force", "--k", "2", "--tau", "0.2")
        assert code == 0 and "items: v1 v3" in out


class TestSweeps:
    def test_csv_columns(self, capsys):
        code, out, _ = run(capsys, "--gen", "fig1", "--alg", "tsgreedy", "--alg", "bsm-saturate",
                           "--sweep", "tau=0.2:0.8:0.6", "--k", "2", "--eps", "0.1")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [(r["value"], r["algorithm"]) for r in rows] == [
            ("0.2", "tsgreedy"), ("0.2", "bsm-saturate"), ("0.8", "tsgreedy"), ("0.8", "bsm-saturate")]
        assert {"f_0", "f_1", "k_prime", "alpha_min", "alpha_max", "opt_f", "opt_g", "tau_opt_g", "wall_ms"} <= set(rows[0])
        assert rows[1]["alpha_min"] == "0.9375" and rows[3]["alpha_min"] == "0.8125"
        assert rows[0]["k_prime"] == "1" and rows[2]["k_prime"] == "0"
        assert float(rows[0]["f"]) == pytest.approx(2 / 3)

    def test_json_lines(self, capsys, tmp_path):
        out_path = tmp_path / "r.jsonl"
        code, _, _ = run(capsys, "--gen", "fig1", "--alg", "greedy", "--sweep", "k=1:2:1",
                         "--format", "json", "--out", str(out_path))
        assert code == 0
        rows = [json.loads(line) for line in out_path.read_text().splitlines()]
        assert [r["k"] for r in rows] == [1, 2]
        assert rows[1]["items"] == ["v1", "v2"] and rows[1]["groups"] == [1.0, 0.0]

    def test_guard_failure_is_per_row(self, capsys):
        code, out, _ = run(capsys, "--gen", "sbm:n=30,props=0.5/0.5,pin=0.2,pout=0.1",
                           "--alg", "greedy", "--alg", "brute-force", "--sweep", "k=10:10:1")
        assert code == 2
        rows = list(csv.DictReader(io.StringIO(out)))
        assert rows[0]["status"] == "ok"
        assert rows[1]["status"] == "failed" and "instance too large" in rows[1]["error"]

    def test_influence_brute_force_refused(self, capsys):
        code, out, _ = run(capsys, "--problem", "im", "--gen", "sbm:n=20,props=0.5/0.5,pin=0.3,pout=0.1",
                           "--alg", "greedy", "--alg", "brute-force", "--sweep", "k=2:2:1",
                           "--rr", "2000", "--reps", "500")
        assert code == 2
        rows = list(csv.DictReader(io.StringIO(out)))
        assert rows[0]["status"] == "ok" and "influence" in rows[1]["error"]

    def test_facility_location(self, capsys):
        code, out, _ = run(capsys, "--problem", "fl", "--gen", "blobs:counts=5/15,dim=2",
                           "--alg", "bsm-saturate", "--sweep", "tau=0.5,0.9", "--k", "3")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert all(float(r["g"]) >= (1 - 2 * 0.05) * float(r["tau_opt_g"]) - 1e-9 for r in rows)

    def test_kmedian_records_normaliser(self, capsys, fixtures_dir):
        code, out, _ = run(capsys, "--problem", "fl", "--points", str(fixtures_dir / "points.csv"),
                           "--kernel", "kmedian", "--alg", "greedy", "--sweep", "k=1:2:1")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert float(rows[0]["dbar"]) == pytest.approx(math.hypot(6, 5))

    def test_no_timing_blank(self, capsys):
        _, out, _ = run(capsys, "--gen", "fig1", "--alg", "greedy", "--sweep", "k=2:2:1", "--no-timing")
        assert list(csv.DictReader(io.StringIO(out)))[0]["wall_ms"] == ""

    def test_csv_quoting(self):
        row = dict(axis="k", value=1, algorithm="greedy", k=1, tau=0.5, eps=0.05, dbar=None, status="failed", f=None, g=None,
                   groups=[None], items=[], k_prime=None, alpha_min=None, alpha_max=None, opt_f=None, opt_g=None,
                   tau_opt_g=None, wall_ms=None, evaluations=None, error='ValueError: bad "x", y')
        text = cli.rows_to_csv([row], 1)
        parsed = list(csv.DictReader(io.StringIO(text)))
        assert parsed[0]["error"] == 'ValueError: bad "x", y'
        assert text.endswith("\r\n")


class TestSpecErrors:
    @pytest.mark.parametrize("argv", [
        ["--gen", "bogus"],
        ["--gen", "fig1", "--sweep", "tau=0:2:1"],
        ["--problem", "fl"],
        ["--graph", "x.tsv"],
        ["--problem", "mc"],
        ["--gen", "sbm:n=abc"],
    ])
    def test_exit_code_one(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 1 and "error" in err

    def test_argparse_errors_exit_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["--problem", "zz"])
        assert exc.value.code == 1

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "--graph", str(tmp_path / "none.tsv"), "--groups", str(tmp_path / "none.tsv"))
        assert code == 1
