import csv
import io
import json
import subprocess
import sys

import pytest

from lienard.cli import dumps, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def seed_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("sys") / "vdp.json"
    code, text, _ = call("construct", "seed")
    assert code == 0
    path.write_text(text)
    return path


def test_bounds_best():
    code, text, _ = call("bounds", "best", "--n", "7", "--m", "7")
    d = json.loads(text)
    assert code == 0 and d["bound"] == 13 and d["source"] == "Thm4.2"


def test_bounds_table_csv_and_json():
    code, text, _ = call("bounds", "table", "--n-max", "4", "--m-max", "3")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and len(rows) == 12 and list(rows[0]) == ["n", "m", "bound", "source"]
    assert next(r for r in rows if r["n"] == "3" and r["m"] == "3")["bound"] == "5"
    code, text, _ = call("bounds", "table", "--n-max", "2", "--m-max", "2", "--format", "json")
    assert code == 0 and len(json.loads(text)) == 4


def test_abelian_value():
    code, text, _ = call("abelian", "--g", "0,1", "--j", "0", "--h", "2")
    assert code == 0 and text.strip() == "-12.566370614359172"


def test_abelian_fit():
    code, text, _ = call("abelian", "fit", "--g", "0,0,0,1", "--j", "0", "--h-lo", "100", "--h-hi", "1e6")
    assert code == 0 and json.loads(text)["exponent"] == pytest.approx(0.75, abs=0.01)


def test_construct_plan():
    code, text, _ = call("construct", "plan", "--n0", "3", "--m0", "3", "--k0", "5", "--depth", "1")
    assert code == 0 and json.loads(text)["leaves"] == [[7, 7, 13], [8, 8, 14]]


def test_construct_step_and_profile(seed_file, tmp_path):
    code, text, _ = call("construct", "step", "--seed", str(seed_file), "--parity", "odd")
    assert code == 0
    d = json.loads(text)
    assert [d["certificate"][k] for k in "nmk"] == [5, 3, 4]
    sys_file = tmp_path / "z534.json"
    sys_file.write_text(text)
    code, text, _ = call("melnikov", "profile", "--system", str(sys_file), "--annulus", "outer",
                         "--h-lo", "10", "--h-hi", "2000", "--points", "32", "--format", "json")
    assert code == 0
    zeros = json.loads(text)["zeros"]
    # lambda F2 barely moves the perturbation's placed zeros
    assert len(zeros) >= 2


def test_melnikov_csv(seed_file):
    code, text, _ = call("melnikov", "profile", "--system", str(seed_file), "--annulus", "0",
                         "--h-lo", "0.5", "--h-hi", "8", "--points", "16")
    lines = text.splitlines()
    assert code == 0 and lines[0] == "h,M" and len(lines) >= 17


def test_verify_cycles(seed_file):
    code, text, _ = call("verify", "cycles", "--system", str(seed_file), "--epsilon", "0.05",
                         "--a-lo", "0.5", "--a-hi", "3")
    d = json.loads(text)
    assert code == 0 and d["count"] == 1
    assert abs(d["brackets"][0]["a_lo"] - 2.0) < 0.1


@pytest.mark.parametrize("argv", [
    ["bounds", "best", "--n", "0", "--m", "3"],
    ["bounds", "best", "--n", "x", "--m", "3"],
    ["abelian", "--g", "0,1", "--j", "0"],
    ["abelian", "--g", "0,a", "--j", "0", "--h", "1"],
    ["construct", "plan", "--n0", "1", "--m0", "1", "--k0", "0", "--depth", "31"],
    ["verify", "cycles", "--system", "x.json", "--epsilon", "0.1", "--a-lo", "3", "--a-hi", "1"],
    ["melnikov", "profile", "--system", "x.json", "--annulus", "-1", "--h-lo", "1", "--h-hi", "2"],
    ["nonsense"],
])
def test_bad_flags_exit_2(argv, capsys):
    assert call(*argv)[0] == 2


def test_domain_errors_exit_1(seed_file, tmp_path):
    code, _, err = call("abelian", "--g", "0,1", "--j", "0", "--h", "-1")
    assert code == 1 and "energy out of annulus" in err
    code, _, err = call("melnikov", "profile", "--system", str(tmp_path / "missing.json"), "--annulus", "0",
                        "--h-lo", "1", "--h-hi", "2")
    assert code == 1 and "cannot read" in err
    code, _, err = call("melnikov", "profile", "--system", str(seed_file), "--annulus", "5",
                        "--h-lo", "1", "--h-hi", "2")
    assert code == 1 and "does not exist" in err
    code, _, err = call("construct", "step", "--seed", str(seed_file), "--parity", "odd", "--x0", "-1")
    assert code == 1 and "shift too small" in err


def test_deterministic_output(seed_file):
    argv = [sys.executable, "-m", "lienard", "verify", "cycles", "--system", str(seed_file),
            "--epsilon", "0.05", "--a-lo", "0.5", "--a-hi", "3", "--grid", "16"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a


def test_dumps_float_format():
    assert dumps({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}'
    assert dumps([1, 2.5]) == "[1, 2.5]"
