import csv
import io
import json
import subprocess
import sys

import pytest

from qubound.cli import main

SMALL = ["fuzz", "--dims", "2,3", "--m-max", "2", "--trials", "3"]


def test_demo(capsys):
    assert main(["demo"]) == 0
    out = capsys.readouterr().out
    for token in ("step 1", "step 2", "Fail=0.0490428329", "Loss=0.0199334222", "theorem1", "gentle_trace"):
        assert token in out


def test_fuzz_json_to_stdout(capsys):
    assert main(SMALL + ["--no-timestamp"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["pass"] is True and "timestamp" not in data
    assert data["config"]["dims"] == [2, 3] and data["config"]["m_range"] == [1, 2]
    assert {c["name"] for c in data["perCheck"]} >= {"theorem1", "lemma2b"}


def test_fuzz_timestamp_by_default(capsys):
    assert main(SMALL) == 0
    assert "timestamp" in json.loads(capsys.readouterr().out)


def test_fuzz_csv_and_out_file(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(SMALL + ["--csv", "--checks", "theorem1,kmw", "--p-values", "1.5,3", "--out", str(out)]) == 0
    assert "PASS" in capsys.readouterr().out
    rows = list(csv.reader(out.open()))
    assert rows[0][0] == "name"
    assert {r[0] for r in rows[1:]} == {"theorem1", "kmw[p=1.5]", "kmw[p=3]"}


def test_fuzz_byte_identical(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(SMALL + ["--seed", "42", "--no-timestamp", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["fuzz", "--trials", "0"],
        ["fuzz", "--dims", "1,2"],
        ["fuzz", "--checks", "bogus"],
        ["fuzz", "--p-values", "1"],
        ["fuzz", "--workers", "0"],
        ["fuzz", "--dims", "two"],
        ["tightness"],
        ["tightness", "--kind", "sphere"],
        ["tightness", "--kind", "club", "--m", "2", "--delta", "0.1", "--a-ratio", "0"],
        ["nope"],
        [],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == 2


def test_tightness_csv(capsys):
    assert main(["tightness", "--kind", "qubit", "--m", "1,2,5,50", "--delta", "1e-2,1e-3"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 8


def test_tightness_club_ratio(capsys):
    assert main(["tightness", "--kind", "club", "--m", "3", "--delta", "1e-3", "--a-ratio", "2"]) == 0
    (row,) = csv.DictReader(io.StringIO(capsys.readouterr().out))
    assert float(row["p"]) == 1.5 and abs(float(row["normalized_gap"])) < 0.02


def test_tightness_grid(tmp_path):
    out = tmp_path / "grid.csv"
    assert main(["tightness", "--grid", "acceptance", "--out", str(out)]) == 0
    kinds = {r["kind"] for r in csv.DictReader(out.open())}
    assert kinds == {"qubit", "club", "qutrit"}
    assert main(["tightness", "--grid", "acceptance", "--kind", "qutrit", "--out", str(out)]) == 0
    assert {r["kind"] for r in csv.DictReader(out.open())} == {"qutrit"}


def test_tightness_empty_grid(capsys):
    assert main(["tightness", "--kind", "qubit"]) == 0
    assert capsys.readouterr().out.count("\n") == 1


def test_module_entry_point_no_color():
    proc = subprocess.run(
        [sys.executable, "-m", "qubound", "demo"], capture_output=True, text=True, env={"NO_COLOR": "1", "PATH": ""}
    )
    assert proc.returncode == 0 and "\033[" not in proc.stdout


def test_verbose_flag(capsys):
    assert main(["-v", "tightness", "--kind", "qutrit", "--m", "1", "--delta", "0.2"]) == 0
