import io
import json

import pytest

from klab.cli import main
from klab.machines import E_ID


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def plain_snap(tmp_path_factory):
    path = tmp_path_factory.mktemp("snap") / "plain.klab"
    code, text = run("dovetail", "run", "--snapshot", str(path), "--rounds", "12")
    assert code == 0 and text.splitlines()[-1].startswith("round 12:")
    return path


def test_run_status_resume(tmp_path, plain_snap):
    part = tmp_path / "part.klab"
    assert run("dovetail", "run", "--snapshot", str(part), "--rounds", "6")[0] == 0
    code, text = run("dovetail", "status", "--snapshot", str(part))
    assert code == 0 and "round: 6" in text
    assert run("dovetail", "resume", "--snapshot", str(part), "--rounds", "12")[0] == 0
    assert part.read_bytes() == plain_snap.read_bytes()


def test_prefix_status_reports_kraft(tmp_path):
    path = tmp_path / "k.klab"
    assert run("dovetail", "run", "--kind", "prefix", "--snapshot", str(path), "--rounds", "8")[0] == 0
    code, text = run("dovetail", "status", "--snapshot", str(path))
    line = next(l for l in text.splitlines() if l.startswith("kraft:"))
    assert float(line.split("(")[1].rstrip(")")) <= 1


def test_missing_and_corrupt_snapshot(tmp_path, capsys):
    assert run("dovetail", "status", "--snapshot", str(tmp_path / "nope"))[0] == 2
    assert "no snapshot" in capsys.readouterr().err
    bad = tmp_path / "bad.klab"
    bad.write_bytes(b"garbage!garbage!")
    assert run("dovetail", "status", "--snapshot", str(bad))[0] == 2
    assert "corrupt snapshot" in capsys.readouterr().err
    assert run("dovetail", "run", "--kind", "quantum", "--snapshot", str(bad))[0] == 2


def test_query(plain_snap, tmp_path):
    assert run("query", "C", "", "--snapshot", str(plain_snap)) == (0, "0 (round 12)\n")
    empty = tmp_path / "empty.klab"
    run("dovetail", "run", "--snapshot", str(empty), "--rounds", "0")
    assert run("query", "K", "0", "--snapshot", str(empty)) == (0, "unknown (round 0)\n")
    code, text = run("query", "length", "0110", "--snapshot", str(plain_snap))
    assert text.startswith("4 ")


def test_query_cv_within_identity_witness(plain_snap):
    for x in ("", "0", "101", "0110"):
        code, text = run("query", "CV", x, "--snapshot", str(plain_snap))
        assert code == 0 and int(text.split()[0]) <= len(x) + E_ID + 2


def test_query_errors(plain_snap, capsys):
    assert run("query", "C", "012", "--snapshot", str(plain_snap))[0] == 2
    assert run("query", "nosuch", "--snapshot", str(plain_snap))[0] == 2
    assert run("query", "C_cond", "0", "--snapshot", str(plain_snap))[0] == 2
    assert run("query", "C", "0")[0] == 2
    capsys.readouterr()


def test_star_csv(tmp_path):
    code, text = run("star", "log2p1", "--range", "14..17")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "n,f,star"
    assert "16,4,3" in lines
    out = tmp_path / "s.csv"
    run("star", "log2p1", "--range", "14..17", "--out", str(out))
    assert out.read_text() == text
    assert run("star", "nosuch")[0] == 2
    assert run("star", "log2p1", "--range", "5")[0] == 2


def test_alpha_csv(tmp_path):
    path = tmp_path / "k.klab"
    run("dovetail", "run", "--kind", "prefix", "--snapshot", str(path), "--rounds", "20")
    code, text = run("alpha", "--snapshot", str(path), "--range", "0..4")
    assert code == 0 and text.splitlines()[0] == "n,alpha_upper,alpha_star"
    assert len(text.splitlines()) == 6


def test_pcode(capsys):
    assert run("pcode", "encode", "2", "1") == (0, "11000101\n")
    assert run("pcode", "decode", "110001011") == (0, "exps: 2 1\nrest: 1\n")
    assert run("pcode", "decode", "0110")[0] == 2
    assert "not-in-P" in capsys.readouterr().err
    assert run("pcode", "encode", "0")[0] == 2
    code, text = run("pcode", "runv", "1" * 13 + "01" + "0110")
    assert code == 0 and "kind: halted" in text and "gate: all-shorter-converged" in text


def test_report_is_deterministic(plain_snap, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run("report", "--snapshot", str(plain_snap), "--sample-len", "3", "--out", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["constants"]["e_id"] == E_ID and doc["round"] == 12


def test_audit_command(tmp_path):
    cfg = tmp_path / "klab.ini"
    cfg.write_text("[audit]\nfunctors = C,length,2C\n")
    paths = [tmp_path / f"r{i}.json" for i in range(2)]
    for p in paths:
        code, text = run("audit", "--config", str(cfg), "--json", str(p), "--csv", str(tmp_path / "r.csv"))
        assert code == 0 and "MISMATCH" not in text
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert json.loads(paths[0].read_text())["exit_code"] == 0


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[lab]\nwidth = 3\n")
    assert run("query", "C", "--config", str(cfg), "--snapshot", "x")[0] == 2
    assert "bad config" in capsys.readouterr().err
