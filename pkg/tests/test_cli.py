import json
import subprocess
import sys

import pytest

from d4lab.arith import PRECISION_ENV
from d4lab.cli import main


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    # --precision writes the environment variable; keep tests isolated
    monkeypatch.delenv(PRECISION_ENV, raising=False)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_verify_exit_codes(capsys):
    code, doc = run_json(capsys, "verify", "1", "5", "12", "96")
    assert code == 0 and doc["schema"] == "d4lab/1"
    assert doc["input"] == ["1", "5", "12", "96"] and doc["regularity"] == "regular_plus"
    code, doc = run_json(capsys, "verify", "1", "5", "13")
    assert code == 1 and doc["is_d4_tuple"] is False
    code, _, err = run(capsys, "verify", "1", "five")
    assert code == 2 and "d4lab" in err


def test_verify_triple_fields(capsys):
    _, doc = run_json(capsys, "verify", "1", "5", "12")
    assert doc["d_plus"] == "96" and doc["d_minus"] == "0" and doc["regular"] is True


def test_big_integers_are_strings(capsys):
    big = 10**40
    _, doc = run_json(capsys, "verify", str(big), str(big + 1))
    assert doc["input"] == [str(big), str(big + 1)]


def test_extend(capsys):
    code, doc = run_json(capsys, "extend", "1", "5", "12", "--certify")
    assert code == 0 and doc["certified"] is True
    assert {r["d"] for r in doc["extensions"]} == {"96"}
    assert all(r["regularity"] == "regular_plus" for r in doc["extensions"])
    _, doc = run_json(capsys, "extend", "1", "5", "12", "--zmax", "3")
    assert doc["extensions"] == []


def test_extend_not_a_triple(capsys):
    code, _, err = run(capsys, "extend", "1", "5", "13")
    assert code == 1 and "not a D(4)-tuple" in err


def test_fundamentals_and_intersect(capsys):
    code, doc = run_json(capsys, "fundamentals", "1", "5", "12")
    assert code == 0
    code, doc = run_json(capsys, "intersect", "1", "5", "12", "--z-max", "1e6")
    assert code == 0 and "34" in json.dumps(doc)


def test_bounds_case(capsys):
    code, doc = run_json(capsys, "bounds", "--case", "thm15_i")
    assert code == 0 and doc["catalog"][0]["computed_value"] == "99887" and doc["all_pass"]
    code, _, err = run(capsys, "bounds", "--case", "nope")
    assert code == 2 and "unknown case" in err


def test_search_mn9(capsys):
    code, doc = run_json(capsys, "search", "case-check-mn9")
    assert code == 0 and doc["survivors"] == []


def test_search_triples(capsys):
    code, doc = run_json(capsys, "search", "triples", "--c-max", "100")
    assert code == 0 and {"a": "1", "b": "5", "c": "12"} in doc["triples"]


def test_family_cmax(capsys):
    code, doc = run_json(capsys, "family", "1", "5", "--cmax", "1e9")
    assert code == 0 and doc["all_family"] is True


def test_bigint_flag_rejects_fractions(capsys):
    code, _, _ = run(capsys, "family", "1", "5", "--cmax", "1.5")
    assert code == 2


def test_threads_do_not_change_output(capsys):
    argv = ["search", "claims", "--c-max", "1500", "--d-max", "1e5"]
    _, one, _ = run(capsys, *argv)
    _, two, _ = run(capsys, *argv, "--threads", "2")
    strip = lambda s: {k: v for k, v in json.loads(s).items() if k != "elapsed"}
    assert strip(one) == strip(two)
    code, _, _ = run(capsys, *argv, "--threads", "0")
    assert code == 2


def test_reduce_threads_byte_identical(capsys):
    _, one, _ = run(capsys, "reduce", "1", "5", "12")
    _, two, _ = run(capsys, "--threads", "2", "reduce", "1", "5", "12")
    assert one == two


def test_precision_flag_and_env(capsys, monkeypatch):
    _, lo, _ = run(capsys, "reduce", "1", "5", "12", "--precision", "256")
    _, hi, _ = run(capsys, "reduce", "1", "5", "12", "--precision", "512")
    keys = ("final_bounds", "extensions", "irregular", "certified", "final_bound")
    assert [json.loads(lo)[k] for k in keys] == [json.loads(hi)[k] for k in keys]
    code, _, _ = run(capsys, "verify", "1", "5", "--precision", "10")
    assert code == 2
    monkeypatch.setenv(PRECISION_ENV, "abc")
    code, _, err = run(capsys, "verify", "1", "5")
    assert code == 2 and PRECISION_ENV in err


def test_usage_errors(capsys):
    assert main([]) == 2
    assert main(["nope"]) == 2
    assert main(["extend", "1", "5"]) == 2
    capsys.readouterr()


def test_csv_and_text(capsys):
    code, out, _ = run(capsys, "--format", "csv", "extend", "1", "5", "12")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("m,n,z,d") and any(",96," in ln for ln in lines[1:])
    code, out, _ = run(capsys, "verify", "1", "5", "--format", "text")
    assert code == 0 and "is_d4_tuple=True" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "d4lab.cli", "verify", "1", "5", "12", "96"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["schema"] == "d4lab/1"
