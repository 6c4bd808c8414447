import io
import json

import pytest

from needful.cli import CALCULUS_COUNTING, MACHINE_COUNTING, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_normalize_pair():
    code, out, _ = call("normalize", r"(\x.x)(\y.(\z.z) y)", "--variant", "sn+", "--unfold")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == r"(\y. z[z\y])[x\\y. z[z\y]]"
    assert lines[1] == r"\y. y"


def test_normalize_identity_takes_no_steps():
    code, out, _ = call("normalize", r"\x. x", "--variant", "sn")
    assert code == 0
    assert out.splitlines() == [r"\x. x", f"steps: 0 ({CALCULUS_COUNTING})"]


def test_normalize_omega_times_out():
    code, _, err = call("normalize", r"(\x. x x)(\x. x x)", "--fuel", "50")
    assert code == 2
    assert "timeout" in err


def test_parse_error_exits_one():
    code, _, err = call("normalize", r"\x x")
    assert code == 1
    assert err.startswith("parse error")


def test_fuel_from_environment(monkeypatch):
    monkeypatch.setenv("NEEDFUL_FUEL", "20")
    code, out, _ = call("--json", "normalize", r"(\x. x x)(\x. x x)")
    assert code == 2
    obj = json.loads(out)
    assert obj["fuel"] == 20 and obj["status"] == "timeout"


def test_trace_file(tmp_path):
    path = tmp_path / "trace.json"
    code, _, _ = call("normalize", r"(\x. x) (\y. y)", "--variant", "sn", "--trace", str(path))
    assert code == 0
    trace = json.loads(path.read_text())
    assert trace["header"]["counting"] == CALCULUS_COUNTING
    assert [s["rule"] for s in trace["steps"]] == ["dB", "lsv"]
    assert trace["status"] == "nf"
    assert trace["result"] == r"(\y. y)[x\\y. y]"


def test_json_flag_after_subcommand():
    code, out, _ = call("normalize", r"\x. x", "--json")
    assert code == 0
    assert json.loads(out)["term"] == r"\x. x"


def test_machine_stats():
    code, out, _ = call("machine", r"(\x. x) (\y. y)", "--stats")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == r"(\y. y)[x\\y. y]"
    stats = json.loads(lines[1])
    assert stats["counting"] == MACHINE_COUNTING
    assert sum(stats["stats"].values()) == stats["steps"]


def test_machine_opt_reports_caveat():
    code, out, _ = call("--json", "machine", r"\x. x", "--machine-opt")
    assert code == 0
    assert "caveat" in json.loads(out)


def test_machine_timeout():
    code, _, _ = call("machine", r"(\x. x x)(\x. x x)", "--fuel", "30")
    assert code == 2


@pytest.mark.parametrize("argv", [("diamond", "--size", "6"),
                                  ("machine", "--depth", "3"),
                                  ("equivalence", "--size", "4")])
def test_check_examples_have_no_failures(argv):
    code, out, _ = call("check", *argv)
    assert code == 0
    records = [json.loads(line) for line in out.splitlines()]
    assert records and all(r["verdict"] != "fail" for r in records)
    assert {"check", "term", "verdict"} <= set(records[0])


def test_check_mutated_relation_fails():
    code, _, _ = call("check", "equivalence", "--size", "5", "--es", "--mutated")
    assert code == 1


def test_unknown_suite():
    code, _, err = call("check", "nonsense", "--size", "3")
    assert code == 1
    assert "unknown suite" in err


def test_output_is_repeatable():
    argv = ("normalize", r"(\w. w w) (\y. (\x. x) y)", "--strategy", "graph", "--unfold")
    assert call(*argv) == call(*argv)
