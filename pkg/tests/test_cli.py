import csv
import io
import json

import pytest

from sboxminer.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out), err


def without_timing(doc):
    doc = dict(doc)
    doc.pop("timing")
    return doc


def test_vanishing_default(capsys):
    code, doc, _ = run_json(capsys, "vanishing", "--sbox", "aes")
    assert code == 0
    assert doc["results"]["count"] == 20774
    assert doc["checks"][0]["published"] == 20774
    assert doc["checks"][0]["status"] == "pass"


@pytest.mark.parametrize("flags,count", [(["--max-degree", "5"], 0), (["--exact-degree", "6"], 43)])
def test_vanishing_filters(capsys, flags, count):
    code, doc, _ = run_json(capsys, "vanishing", "--sbox", "aes", *flags)
    assert code == 0 and doc["results"]["count"] == count


def test_vanishing_list(capsys):
    code, doc, _ = run_json(capsys, "vanishing", "--exact-degree", "6", "--list")
    assert code == 0
    assert len(doc["results"]["monomials"]) == 43
    assert all(len(m) == 12 for m in doc["results"]["monomials"])


def test_vanishing_mutually_exclusive(capsys):
    code = None
    with pytest.raises(SystemExit) as info:
        main(["vanishing", "--max-degree", "3", "--exact-degree", "3"])
    code = info.value.code
    assert code == 1


def test_states(capsys):
    code, doc, _ = run_json(capsys, "states", "--sbox", "aes", "--expand")
    assert code == 0
    rows = doc["results"]["states"]
    assert [r["label"] for r in rows] == ["S8", "S9", "S48", "S64", "S82"]
    assert rows[0]["monomials"] == ["X5", "Y3", "Y4", "X5Y3", "X5Y4", "Y3Y4", "X5Y3Y4"]
    assert all(c["status"] == "pass" for c in doc["checks"])


def test_states_identity(capsys):
    code, doc, _ = run_json(capsys, "states", "--sbox", "identity8")
    assert code == 0
    assert doc["results"]["states"] == [
        {"state": 0, "label": "S0", "variables": [], "weight": 0, "count": 0}]
    assert doc["checks"] == []


@pytest.mark.parametrize("sbox,degree,expected", [
    ("aes", "1", (17, 0)), ("identity8", "1", (9, 8)), ("aes", "16", (256, 65280))])
def test_rank(capsys, sbox, degree, expected):
    code, doc, _ = run_json(capsys, "rank", "--sbox", sbox, "--max-degree", degree)
    assert code == 0
    assert (doc["results"]["rank"], doc["results"]["kernel_dimension"]) == expected


def test_mine_identity(capsys):
    code, doc, _ = run_json(capsys, "mine", "--sbox", "identity8", "--max-terms", "2",
                            "--max-degree", "1")
    assert code == 0
    rels = doc["results"]["relations"]
    assert len(rels) == 8
    assert rels[0] == {"monomials": ["X1", "Y1"], "constant": False, "term_count": 2,
                       "total_degree": 2, "minimal": True}


def test_mine_aes_low_degree_empty(capsys):
    code, doc, _ = run_json(capsys, "mine", "--sbox", "aes", "--max-terms", "5", "--max-degree",
                            "3", "--include-constant", "--total-degree", "25")
    assert code == 0
    assert doc["results"]["relations"] == []
    assert doc["checks"][0]["status"] == "pass"


def test_mine_mismatch_exit_code(capsys):
    code, doc, err = run_json(capsys, "mine", "--max-terms", "2", "--max-degree", "5")
    assert code == 3
    assert doc["results"]["relation_count"] == 9
    assert "MISMATCH" in err


def test_mine_limit_truncates(capsys):
    code, doc, _ = run_json(capsys, "mine", "--sbox", "identity8", "--max-terms", "4",
                            "--max-degree", "1", "--limit", "5")
    assert code == 0
    assert doc["truncated"] is True and len(doc["results"]["relations"]) == 5


def test_file_sbox(tmp_path, capsys):
    path = tmp_path / "id3.sbox"
    path.write_text("SBOX 3 3\n0 1 2 3 4 5 6 7\n")
    code, doc, _ = run_json(capsys, "mine", "--sbox", str(path), "--max-terms", "2",
                            "--max-degree", "1")
    assert code == 0 and len(doc["results"]["relations"]) == 3
    assert doc["sbox"]["name"] == "id3"


@pytest.mark.parametrize("content", ["SBOX 4 4\n0 1 2 1f\n", "SBOX 4\n", "SBOX 2 2\n0 1 2 q\n"])
def test_bad_sbox_exit_2(tmp_path, capsys, content):
    path = tmp_path / "bad.sbox"
    path.write_text(content)
    code, out, err = run(capsys, "verify-aes", "--sbox", str(path))
    assert code == 2 and out == "" and "invalid S-box" in err
    code, _, _ = run(capsys, "mine", "--sbox", str(path), "--max-terms", "2", "--max-degree", "1")
    assert code == 2


def test_missing_sbox_file(capsys):
    code, _, _ = run(capsys, "states", "--sbox", "/nonexistent/file.sbox")
    assert code == 2


@pytest.mark.parametrize("argv", [
    ["mine", "--max-terms", "2"],
    ["mine", "--max-terms", "0", "--max-degree", "1"],
    ["mine", "--max-terms", "x", "--max-degree", "1"],
    ["nope"],
    [],
    ["states", "--format", "xml"],
])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 1


def test_semantic_usage_errors(capsys):
    code, _, _ = run(capsys, "mine", "--max-terms", "2", "--max-degree", "17")
    assert code == 1
    code, _, _ = run(capsys, "mine", "--max-terms", "3", "--max-degree", "4", "--total-degree", "2")
    assert code == 1
    code, _, _ = run(capsys, "rank", "--max-degree", "20")
    assert code == 1


def test_bad_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("SBOXMINER_THREADS", "many")
    code, _, _ = run(capsys, "states")
    assert code == 1


def test_out_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, stdout, _ = run(capsys, "states", "--format", "json", "--out", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["command"] == "states"


def test_deterministic_across_threads(capsys, monkeypatch):
    argv = ["mine", "--sbox", "aes", "--max-terms", "3", "--max-degree", "5",
            "--include-constant"]
    docs = []
    texts = []
    for threads in ("1", "2", "8"):
        code, doc, _ = run_json(capsys, *argv, "--threads", threads)
        assert code == 3
        assert doc["timing"]["threads"] == int(threads)
        docs.append(json.dumps(without_timing(doc), sort_keys=True))
        monkeypatch.setenv("SBOXMINER_THREADS", threads)
        _, out, _ = run(capsys, *argv, "--format", "csv")
        texts.append(out)
    assert docs[0] == docs[1] == docs[2]
    assert texts[0] == texts[1] == texts[2]


def test_formats_carry_same_payload(capsys):
    argv = ["mine", "--sbox", "identity8", "--max-terms", "2", "--max-degree", "1"]
    _, doc, _ = run_json(capsys, *argv)
    _, out_csv, _ = run(capsys, *argv, "--format", "csv")
    _, out_text, _ = run(capsys, *argv, "--format", "text")
    rows = list(csv.DictReader(io.StringIO(out_csv)))
    rendered = [r["relation"] for r in rows]
    assert rendered == [" + ".join(r["monomials"]) + " = 0" for r in doc["results"]["relations"]]
    for line in rendered:
        assert line in out_text


def test_verify_csv_rendering(capsys, monkeypatch):
    import sboxminer.claims as claims

    monkeypatch.setattr(claims, "FAST_SWEEPS", [])
    code, out, _ = run(capsys, "verify-aes", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["check"] for r in rows} >= {"vanishing_all", "vanishing_le5", "vanishing_eq6",
                                          "min_weight_rows", "aes_table"}
    assert all(r["status"] == "pass" for r in rows)


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "sboxminer", "vanishing", "--exact-degree", "6",
                           "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["count", "43"]
