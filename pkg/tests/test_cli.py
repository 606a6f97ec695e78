import csv
import io

import pytest

from mopath import cli
from mopath.graph import save_graph
from mopath.kpc import load_overlay


@pytest.fixture
def diamond_file(diamond, tmp_path):
    path = tmp_path / "diamond.gr"
    with open(path, "w") as fh:
        save_graph(diamond, fh)
    return path


def test_gen_road_grid(tmp_path):
    out = tmp_path / "g.gr"
    assert cli.main(["gen", "--road-grid", "3", "2", "--scheme", "2-U", "--seed", "1", "--out", str(out)]) == 0
    assert out.read_text().startswith("p sp 33 72 2\n")


def test_preprocess_and_query(diamond_file, diamond, tmp_path, capsys):
    ov_path = tmp_path / "d.ov"
    assert cli.main(["preprocess", "--graph", str(diamond_file), "--k", "2", "--out", str(ov_path)]) == 0
    assert "cover" in capsys.readouterr().out
    with open(ov_path) as fh:
        load_overlay(fh, diamond)
    out = tmp_path / "res.csv"
    assert cli.main(["query", "--graph", str(diamond_file), "--overlay", str(ov_path), "--source", "1",
                     "--goal", "4", "--paths", "--out", str(out)]) == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["goal", "c1", "c2", "path"]
    assert rows[1:] == [["4", "2", "6", "1 2 4"], ["4", "5", "5", "1 4"], ["4", "6", "2", "1 3 4"]]


def test_query_builds_overlay_on_the_fly(diamond_file, capsys, caplog):
    assert cli.main(["query", "--graph", str(diamond_file), "--source", "1", "--goal", "4", "--k", "2"]) == 0
    captured = capsys.readouterr()
    assert len(captured.out.strip().splitlines()) == 4
    assert "no --overlay given" in caplog.text


@pytest.mark.parametrize("args", [
    ["preprocess", "--k", "1", "--out", "x"],
    ["query", "--source", "999999", "--goal", "4"],
    ["query", "--source", "1", "--goals", "/nonexistent/goals.txt"],
    ["bench", "--scheme", "2-U", "--runs", "1", "--goal-count", "99"],
])
def test_usage_errors_exit_2(diamond_file, args):
    args = args[:1] + ["--graph", str(diamond_file)] + args[1:]
    assert cli.main(args) == 2


def test_missing_graph_file():
    assert cli.main(["cover-stats", "--graph", "/nonexistent.gr"]) == 2


def test_bad_scheme_is_argparse_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["gen", "--graph", "x", "--scheme", "9-Z"])
    assert exc.value.code == 2


def test_bench_cli_deterministic(tmp_path, capsys):
    outs = []
    for i in range(2):
        out = tmp_path / f"b{i}.csv"
        code = cli.main(["bench", "--road-grid", "3", "2", "--scheme", "2-U", "--k", "3", "--runs", "2",
                         "--goal-count", "5", "--seed", "9", "--out", str(out)])
        assert code == 0
        outs.append(out.read_text())
    from mopath.bench import strip_timing
    assert strip_timing(outs[0]) == strip_timing(outs[1])
    assert "consistent runs: 2/2" in capsys.readouterr().out


def test_cover_stats_and_oracle_check(diamond_file, capsys):
    assert cli.main(["cover-stats", "--graph", str(diamond_file), "--k", "2"]) == 0
    assert "cover_ratio" in capsys.readouterr().out
    assert cli.main(["oracle-check", "--instances", "5", "--n", "7"]) == 0
    assert "0 failure(s)" in capsys.readouterr().out
