import dataclasses
import math
import subprocess
import sys

import pytest

from linconsensus import bench
from linconsensus.bench import ExperimentConfig, deterministic_part, main


def _rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    head = body[0].split(",")
    return [dict(zip(head, ln.split(","))) for ln in body[1:]]


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_consensus_line_8(capsys):
    code, out = _run(capsys, "consensus", "--graph", "line", "--sizes", "8", "--eps", "0.01")
    assert code == 0
    (row,) = _rows(out.out)
    assert int(row["rounds"]) <= 700
    assert int(row["rounds"]) <= int(row["theorem_round_bound"])


def test_consensus_complete_2(capsys):
    code, out = _run(capsys, "consensus", "--graph", "complete", "--sizes", "2")
    assert code == 0 and int(_rows(out.out)[0]["rounds"]) < 10


@pytest.mark.parametrize("argv", [
    ["consensus", "--eps", "-1"],
    ["median", "--sizes", "7"],
    ["median", "--t-mult", "0"],
    ["consensus", "--graph", "hexagon"],
    ["consensus", "--graph", "grid", "--sizes", "10"],
    ["consensus", "--u-mode", "factor:-2"],
    ["consensus", "--schedule", "grid:x"],
    ["leader", "--sizes", "4", "--leaders", "9"],
    ["median", "--objective", "abs:w=1;2", "--sizes", "4"],
])
def test_config_errors(capsys, argv):
    code, out = _run(capsys, *argv)
    assert code == 2 and "configuration error" in out.err


def test_missing_formation_file_is_io_error(capsys, tmp_path):
    missing = tmp_path / "nope.txt"
    code, out = _run(capsys, "formation", "--formation", str(missing))
    assert code == 4 and str(missing) in out.err


def test_unwritable_output_is_io_error(capsys, tmp_path):
    code, _ = _run(capsys, "spectrum", "--sizes", "4", "--out", str(tmp_path / "no" / "dir.csv"))
    assert code == 4


def test_median_rows(capsys):
    code, out = _run(capsys, "median", "--graph", "line", "--sizes", "4,20")
    assert code == 0
    rows = _rows(out.out)
    assert [int(r["T"]) for r in rows] == [16, 80]
    for r in rows:
        assert float(r["disp"]) <= float(r["bound_disp"])
        assert float(r["avg_abs_dev"]) <= float(r["bound_disp"])
        assert float(r["err"]) <= float(r["bound_err"])


def test_spectrum_rows(capsys):
    code, out = _run(capsys, "spectrum", "--graph", "line", "--sizes", "3")
    (row,) = _rows(out.out)
    assert math.isclose(float(row["lambda2"]), 0.75, abs_tol=1e-12)
    assert math.isclose(float(row["lemma1_bound"]), 1 - 1 / 639)
    code, out = _run(capsys, "spectrum", "--graph", "complete", "--sizes", "2")
    assert abs(float(_rows(out.out)[0]["lambda2"])) < 1e-12
    code, out = _run(capsys, "spectrum", "--graph", "lollipop", "--sizes", "8..64:8")
    assert code == 0
    rows = _rows(out.out)
    assert len(rows) == 8 and all(float(r["margin"]) > 0 for r in rows)


def test_formation_in_formation_start(capsys, tmp_path):
    path = tmp_path / "f.txt"
    path.write_text("# square\n1 2 1 0\n2 3 0 1\n3 4 -1 0\n4 1 0 -1\n")
    code, out = _run(capsys, "formation", "--formation", str(path), "--start", "target")
    assert code == 0 and _rows(out.out)[0]["rounds"] == "1"
    code, out = _run(capsys, "formation", "--graph", "grid", "--sizes", "9,16")
    assert code == 0 and all(r["converged"] == "1" for r in _rows(out.out))


def test_leader_line(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, out = _run(capsys, "leader", "--graph", "line", "--sizes", "10", "--leaders", "1",
                     "--v", "0", "--trace-out", str(trace))
    assert code == 0
    row = _rows(out.out)[0]
    assert row["converged"] == "1" and float(row["max_actual_over_bound"]) <= 1.0
    lines = trace.read_text().splitlines()
    assert lines[0] == "n,t,l2sq_dev,linf_dev,theorem_bound" and len(lines) == 1 + int(row["rounds"])


def test_bound_violation_exit_code(monkeypatch, capsys):
    # a spectrum bound that can never hold must be reported with exit status 3
    monkeypatch.setattr(bench.G, "second_eigenvalue_bound", lambda n: 0.0)
    code, out = _run(capsys, "spectrum", "--graph", "line", "--sizes", "4")
    assert code == 3 and "bound violated" in out.err


def test_header_round_trip(capsys):
    argv = ["median", "--graph", "geometric:3", "--sizes", "6,10", "--u-mode", "factor:2",
            "--seed", "17", "--objective", "quad:box=-4;4", "--trace-out", "/dev/null"]
    code, out = _run(capsys, *argv)
    assert code == 0
    cfg = ExperimentConfig.from_header_lines(out.out.splitlines())
    want = bench.config_from_args(bench.make_parser().parse_args(argv))
    assert cfg == dataclasses.replace(want, trace_out=None)


def test_determinism_across_processes(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.csv"
        subprocess.run([sys.executable, "-m", "linconsensus", "consensus", "--graph", "geometric",
                        "--sizes", "30,60", "--seed", "5", "--out", str(path)], check=True)
        outs.append(path.read_text())
    assert deterministic_part(outs[0]) == deterministic_part(outs[1])
    assert "# nondeterministic_columns=wall_s" in outs[0]


def test_parse_sizes():
    assert bench.parse_sizes("8..32:8") == [8, 16, 24, 32]
    assert bench.parse_sizes("2,4,10..12") == [2, 4, 10, 11, 12]
