import json

import pytest

from trustqueue.cli import main

THREE_CLASS = {
    "lambda": 0.5,
    "sizes": [1, 2, 3],
    "matrix": [[0.425, 0.03, 0.01], [0.05, 0.255, 0.02], [0.025, 0.015, 0.17]],
}


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_preset(capsys):
    code, out, _ = run(["analyze", "--preset", "three-class", "--policy", "mt",
                        "--b", "0.1"], capsys)
    assert code == 0
    assert "U[i][k]" in out and "T[j][k]" in out
    assert "incentive compatible at b = 0.1" in out


def test_analyze_fcfs(capsys):
    code, out, _ = run(["analyze", "--preset", "three-class", "--policy", "fcfs"], capsys)
    assert code == 0
    assert "8.91167" in out


def test_analyze_detects_violation(capsys):
    code, out, _ = run(["analyze", "--preset", "three-class", "--policy", "mt",
                        "--b", "0.02"], capsys)
    assert code == 0
    assert "NOT incentive compatible" in out
    assert "declaring" in out


def test_analyze_config_file(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(THREE_CLASS))
    code, out, _ = run(["analyze", "--config", str(path), "--policy", "scf"], capsys)
    assert code == 0
    assert "SCF mean response" in out


def test_malformed_config_exits_1(tmp_path, capsys):
    bad = dict(THREE_CLASS)
    bad["matrix"] = [[0.5, 0.5], [0.5, 0.5]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, _, err = run(["analyze", "--config", str(path)], capsys)
    assert code == 1
    assert "error" in err


def test_overloaded_config_exits_2(tmp_path, capsys):
    bad = dict(THREE_CLASS)
    bad["lambda"] = 0.9
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, _, err = run(["analyze", "--config", str(path)], capsys)
    assert code == 2
    assert "unstable" in err


def test_missing_config_file_exits_1(capsys):
    code, _, err = run(["analyze", "--config", "/nonexistent/cfg.json"], capsys)
    assert code == 1


def test_unknown_preset_exits_1(capsys):
    code, _, err = run(["ic-region", "--preset", "bogus"], capsys)
    assert code == 1
    assert "preset" in err


def test_ic_region_output(capsys):
    code, out, _ = run(["ic-region", "--preset", "two-class-rare", "--policy", "bt"],
                       capsys)
    assert code == 0
    assert "[0.9476, 1.0000]" in out
    assert "socially beneficial vs fcfs: empty" in out


def test_ic_region_rejects_blind_policy(capsys):
    with pytest.raises(SystemExit):
        main(["ic-region", "--preset", "three-class", "--policy", "fcfs"])


def test_sweep_curve_plot_roundtrip(tmp_path, capsys):
    sweep_csv = tmp_path / "sweep.csv"
    code, out, _ = run(["sweep", "--preset", "four-class", "--x-step", "0.1",
                        "--b-step", "0.05", "--x-max", "0.2",
                        "--out", str(sweep_csv)], capsys)
    assert code == 0 and sweep_csv.exists()
    assert "largest error rate" in out

    svg = tmp_path / "sweep.svg"
    code, out, _ = run(["plot", "--csv", str(sweep_csv), "--out", str(svg)], capsys)
    assert code == 0
    body = svg.read_text()
    assert body.startswith("<svg") and "<rect" in body

    curve_csv = tmp_path / "curve.csv"
    code, out, _ = run(["curve", "--preset", "four-class", "--x-step", "0.1",
                        "--b-step", "0.02", "--x-max", "0.3",
                        "--out", str(curve_csv)], capsys)
    assert code == 0 and curve_csv.exists()

    svg2 = tmp_path / "curve.svg"
    code, out, _ = run(["plot", "--csv", str(curve_csv), "--out", str(svg2)], capsys)
    assert code == 0
    assert "polyline" in svg2.read_text()


def test_plot_empty_region_sweep(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("x,b,ic_mt,ic_bt,et_mt,et_bt\n"
                    "0,0,0,0,5.1,5.2\n0,0.5,0,0,5.0,5.1\n0.1,0,0,0,5.3,5.4\n")
    svg = tmp_path / "empty.svg"
    code, _, _ = run(["plot", "--csv", str(path), "--out", str(svg)], capsys)
    assert code == 0
    assert "<svg" in svg.read_text()


def test_plot_unknown_schema_exits_1(tmp_path, capsys):
    path = tmp_path / "junk.csv"
    path.write_text("a,b,c\n1,2,3\n")
    code, _, err = run(["plot", "--csv", str(path), "--out", str(tmp_path / "o.svg")],
                       capsys)
    assert code == 1
    assert "schema" in err


def test_simulate_deterministic_output(tmp_path, capsys):
    args = ["simulate", "--preset", "three-class", "--policy", "mt", "--b", "0.43",
            "--jobs", "20000", "--reps", "2", "--seed", "5"]
    code, out1, _ = run(args, capsys)
    assert code == 0
    assert "overall mean response" in out1 and "+-" in out1
    code, out2, _ = run(args, capsys)
    assert out1 == out2


def test_simulate_trace(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(["simulate", "--preset", "three-class", "--policy", "bt",
                        "--b", "0.5", "--jobs", "5000", "--reps", "1",
                        "--trace", str(trace)], capsys)
    assert code == 0
    header = trace.read_text().splitlines()[0]
    assert header == ("arrival_time,size_index,estimate_index,declared_index,"
                      "punish_coin,is_probe,response_time")


def test_unwritable_output_exits_1(capsys):
    code, _, err = run(["sweep", "--preset", "four-class", "--x-step", "0.2",
                        "--b-step", "0.2", "--out", "/nonexistent/dir/o.csv"], capsys)
    assert code == 1


def test_preset_list(capsys):
    code, out, _ = run(["preset", "list"], capsys)
    assert code == 0
    for name in ("three-class", "four-class", "two-class-rare"):
        assert name in out
