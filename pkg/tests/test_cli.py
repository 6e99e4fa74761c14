import json

import pytest

from karelbench import cli, datagen


def run(argv):
    return cli.main(argv)


def test_fmt_canonicalizes(tmp_path, capsys):
    src = tmp_path / "p.karel"
    src.write_text("DEF run m(   move\n  turnLeft m)")
    assert run(["fmt", str(src)]) == 0
    out = capsys.readouterr().out.strip()
    assert out == "DEF run m( move turnLeft m)"


def test_fmt_bad_program_exits_one(tmp_path, capsys):
    src = tmp_path / "p.karel"
    src.write_text("DEF run m( fly m)")
    assert run(["fmt", str(src)]) == 1
    assert "error:" in capsys.readouterr().err


def test_missing_file_exits_one(capsys):
    assert run(["fmt", "/nonexistent/p.karel"]) == 1


def test_bad_flags_exit_two(capsys):
    assert run(["eval", "--task", "NotATask", "--program", "x"]) == 2
    assert run(["nosuchcommand"]) == 2


def test_eval_json_manifest(tmp_path, capsys):
    src = tmp_path / "p.karel"
    src.write_text("DEF run m( pickMarker m)")
    assert (
        run(
            [
                "eval",
                "--task",
                "Harvester",
                "--program",
                str(src),
                "--configs",
                "3",
                "--seed",
                "1",
                "--json",
            ]
        )
        == 0
    )
    payload = json.loads(capsys.readouterr().out)
    assert payload["manifest"]["subcommand"] == "eval"
    assert payload["manifest"]["seed"] == 1
    assert payload["result"]["mean_return"] == pytest.approx(1 / 36)
    assert len(payload["result"]["returns"]) == 3
    assert "manifest_sha256" in payload


def test_datagen_roundtrip_and_determinism(tmp_path, capsys):
    out_a = tmp_path / "a.jsonl"
    out_b = tmp_path / "b.jsonl"
    for out in (out_a, out_b):
        assert (
            run(
                [
                    "datagen",
                    "--n",
                    "40",
                    "--out-data",
                    str(out),
                    "--seed",
                    "7",
                    "--json",
                ]
            )
            == 0
        )
    records = list(datagen.read_dataset(out_a))
    assert len(records) == 40
    with open(out_a) as fa, open(out_b) as fb:
        assert fa.read() == fb.read()


def test_stats_matches_library(tmp_path, capsys):
    data = tmp_path / "d.jsonl"
    datagen.build_dataset(30, data, seed=2)
    assert run(["stats", "--data", str(data)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out == datagen.dataset_stats(data)


def test_golden_asserted_rows(capsys):
    assert run(["golden", "--suite", "karel", "--configs", "2", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    rows = {r["task"]: r for r in payload["result"]}
    for task in ("StairClimber", "FourCorner", "TopOff", "Maze"):
        assert rows[task]["asserted"]
        assert rows[task]["mean_return"] == pytest.approx(1.0)


def test_export_single_and_multi(capsys):
    assert run(["export", "--task", "FourCorner", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    multi = payload["result"]["multi_def"].splitlines()
    assert len(multi) == 4
    assert payload["result"]["single_def"].startswith("DEF run m( ")


def test_out_flag_writes_file(tmp_path):
    src = tmp_path / "p.karel"
    src.write_text("DEF run m( move m)")
    dst = tmp_path / "fmt.txt"
    assert run(["fmt", str(src), "--out", str(dst)]) == 0
    assert dst.read_text().strip() == "DEF run m( move m)"
