import io
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from critreg.cli import ActionFile, InputError, main, witness_from_file
from critreg.exact_pl import thompson_generators
from critreg.regularity import verify_nesting_witness

from support import pl_maps

DEMOS = Path(__file__).resolve().parent.parent / "demos"


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def fields(text):
    out = {}
    for line in text.splitlines():
        key, _, value = line.partition(": ")
        out.setdefault(key, value)
    return out


@pytest.fixture
def standard_file(tmp_path):
    a, b = thompson_generators()
    path = tmp_path / "f.act"
    path.write_text(ActionFile({"A": a, "B": b}, "thompson", 2).dumps())
    return str(path)


@given(st.dictionaries(st.sampled_from(["f", "g", "h2"]), pl_maps(), min_size=1, max_size=3),
       st.integers(1, 6))
def test_action_file_round_trip(gens, budget):
    af = ActionFile(gens, "rt", budget)
    text = af.dumps()
    again = ActionFile.loads(text)
    assert again.generators == gens and again.budget == budget and again.name == "rt"
    assert again.dumps() == text


def test_parse_errors():
    with pytest.raises(InputError):
        ActionFile.loads("name x\n")
    with pytest.raises(InputError):
        ActionFile.loads("gen f 0/1,0/1 1/2,x 1/1,1/1\n")
    with pytest.raises(InputError):
        ActionFile.loads("gen f 0/1,0/1 1/2,1/4\n")
    with pytest.raises(InputError):
        ActionFile.loads("gen f 0/1,0/1 1/1,1/1\ngen f 0/1,0/1 1/1,1/1\n")


def test_pl_commands(standard_file):
    assert run("pl", "evaluate", "--file", standard_file, "--gen", "A", "--x", "1/2") == (0, "value: 1/4\n")
    code, text = run("pl", "support", "--file", standard_file, "--gen", "B")
    assert code == 0 and "component: (1/2, 1/1)" in text
    code, text = run("pl", "invert", "--file", standard_file, "--gen", "A")
    assert ActionFile.loads(text).generators["A_inv"](Fraction(1, 4)) == Fraction(1, 2)
    code, text = run("pl", "compose", "--file", standard_file, "--gen", "A", "--gen2", "A")
    assert ActionFile.loads(text).generators["A_A"](Fraction(1, 2)) == Fraction(1, 8)


def test_input_errors_exit_2(standard_file, tmp_path):
    assert run("pl", "evaluate", "--file", standard_file, "--gen", "A", "--x", "3/2")[0] == 2
    assert run("pl", "evaluate", "--file", standard_file, "--gen", "Z", "--x", "1/2")[0] == 2
    assert run("pl", "evaluate", "--file", str(tmp_path / "missing"), "--gen", "A", "--x", "0")[0] == 2
    bad = tmp_path / "bad.act"
    bad.write_text("gen f 0/1,0/1 3/4,1/4 1/2,1/2 1/1,1/1\n")
    assert run("pl", "support", "--file", str(bad), "--gen", "f")[0] == 2
    assert run("feasibility", "find")[0] == 2
    assert run("--threads", "0", "feasibility", "sup-tau")[0] == 2
    assert run("nope")[0] == 2
    assert run("feasibility", "sup-tau", "--bogus")[0] == 2


def test_dynamics_commands():
    crossed = str(DEMOS / "crossed.action")
    code, text = run("dynamics", "two-chain", "--file", crossed, "--budget", "3")
    f = fields(text)
    assert code == 0 and f["witness"] == "two-chain" and f["budget"] == "3"
    assert f["J1"] == "(0/1, 5/8)" and f["J2"] == "(3/8, 7/8)"
    code, text = run("dynamics", "two-chain", "--file", str(DEMOS / "nested.action"))
    assert code == 0 and fields(text)["witness"] == "none"
    code, text = run("dynamics", "crossed-pair", "--file", crossed, "--variant", "ping")
    assert fields(text)["witness"] == "ping"
    assert fields(run("dynamics", "conradian", "--file", crossed)[1])["verdict"] == "non-conradian"
    assert "crossed: (0/1, 7/8)" in run("dynamics", "classify", "--file", crossed, "--budget", "1")[1]
    assert fields(run("dynamics", "f-check")[1])["disjoint"] == "True"


def test_centralizer_commands():
    tower = str(DEMOS / "tower3.action")
    assert fields(run("dynamics", "centralizer-obstruction", "--file", tower)[1])["witness"] == "none"
    code, text = run("dynamics", "extract-nesting", "--file", tower, "--k", "2")
    f = fields(text)
    assert code == 0 and f["witness"] == "(2,1)-nesting" and f["condition_ii"] == "True"


def test_nesting_witness_file():
    af = ActionFile.loads((DEMOS / "nesting3.witness").read_text())
    w = witness_from_file(af)
    assert w.k == 3 and verify_nesting_witness(w, 20, 1e-6).accepted
    code, text = run("nesting", "verify", "--file", str(DEMOS / "nesting3.witness"), "--n-max", "20")
    f = fields(text)
    assert code == 0 and f["accepted"] == "True" and f["condition_ii"] == "True"


def test_broken_witness_file_reports_step(tmp_path):
    text = (DEMOS / "nesting3.witness").read_text() + "certificates@4 1 0\n"
    path = tmp_path / "broken.witness"
    path.write_text(text)
    f = fields(run("nesting", "verify", "--file", str(path), "--n-max", "20")[1])
    assert f["accepted"] == "False" and f["failing_step"] == "n=4 i=3"


def test_feasibility_commands():
    code, text = run("feasibility", "sup-tau", "--tol", "1e-3")
    assert code == 0 and abs(float(fields(text)["sup_tau"]) - 0.6180) <= 1e-3
    code, text = run("feasibility", "region", "--taus", "0.6,0.63", "--qs", "1000")
    lines = text.splitlines()
    assert lines[0] == "tau,q,lower,upper,feasible"
    assert lines[1].endswith("True") and lines[2].endswith("False")
    f = fields(run("feasibility", "check", "--tau", "0.5", "--p", "4", "--q", "4", "--qprime", "4", "--r", "4")[1])
    assert f["feasible"] == "False" and float(f["d"]) == -0.5
    assert fields(run("feasibility", "find", "--tau", "0.63")[1])["tuple"] == "none"


def test_seventeen_digit_output():
    text = run("feasibility", "sup-tau", "--tol", "1e-2")[1]
    digits = fields(text)["sup_tau"].replace(".", "").lstrip("0")
    assert len(digits) == 17


def test_stochastic_commands_are_deterministic():
    args = ("stochastic", "omega", "--trials", "300", "--seed", "11", "--csv")
    first, second = run(*args), run(*args)
    assert first == second and first[0] == 0
    assert "trial,n=50,n=100,n=200" in first[1]
    code, text = run("stochastic", "ping", "--file", str(DEMOS / "crossed.action"), "--g1", "f",
                     "--g2", "g^-1", "--u0", "1/2,17/32", "--trials", "200")
    assert code == 0 and fields(text)["disjoint"] == "True"


def test_tsuboi_commands():
    args = ["--tau", "0.5", "--p", "6", "--q", "8", "--qprime", "6.109", "--r", "1.4545"]
    code, text = run("tsuboi", "build", *args, "--N", "3", "--csv")
    assert code == 0 and fields(text)["blocks"] == "343"
    assert "i,j,k,start,length" in text
    assert run("tsuboi", "build", "--tau", "0.5", "--p", "2", "--q", "2", "--qprime", "2", "--r", "2")[0] == 2
