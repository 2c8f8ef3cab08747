import json

import pytest

from tesys import observable, product_n, validate_trace, Observation, parse_event
from tesys.cli import main
from tesys.composability import SyncKappa
from tesys.specfile import load_spec


def cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_trace(text):
    obs = []
    for line in text.splitlines():
        if line == "DEADLOCK":
            break
        step, events = line.split("\t")
        inner = events[1:-1]
        # event arguments contain commas, so split on top-level commas only
        parts, depth, cur = [], 0, ""
        for ch in inner:
            if ch == "," and depth == 0:
                parts.append(cur)
                cur = ""
                continue
            depth += (ch == "(") - (ch == ")")
            cur += ch
        if cur:
            parts.append(cur)
        obs.append(Observation(observable(*parts), int(step)))
    return validate_trace(obs)


def replays_in_eager_product(spec, trace):
    P = product_n(spec.components, SyncKappa(spec.base))
    current = {P.initial}
    for o in trace:
        current = {p for q in current for l, p in P.successors(q) if l == o.observable}
        if not current:
            return False
    return True


def test_simulate_round_trip(capsys):
    code, out, _ = cli(capsys, "simulate", "demo:trolls", "--steps", "20", "--seed", "1")
    assert code in (0, 2)
    trace = parse_trace(out)
    assert len(trace) == 20 or out.rstrip().endswith("DEADLOCK")
    assert replays_in_eager_product(load_spec("demo:trolls"), trace)


def test_simulate_protocols_round_trip(capsys):
    code, out, _ = cli(capsys, "simulate", "demo:trolls-protocols", "--steps", "30", "--seed", "4")
    assert code == 0
    trace = parse_trace(out)
    assert len(trace) == 30
    assert replays_in_eager_product(load_spec("demo:trolls-protocols"), trace)


def test_simulate_zero_steps(capsys):
    assert cli(capsys, "simulate", "demo:trolls", "--steps", "0") == (0, "", "")


def test_simulate_deadlock_exit_code(capsys):
    code, out, _ = cli(capsys, "simulate", "demo:triple", "--steps", "5")
    assert code == 2 and out == "DEADLOCK\n"


def test_simulate_jsonl(capsys, tmp_path):
    path = tmp_path / "trace.jsonl"
    code, out, _ = cli(capsys, "simulate", "demo:trolls", "--steps", "5", "--seed", "2",
                       "--format", "jsonl", "--out", str(path))
    assert code == 0 and out == ""
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    assert [r["step"] for r in rows] == [1, 2, 3, 4, 5]
    assert all(isinstance(r["events"], list) for r in rows)
    for r in rows:
        for e in r["events"]:
            parse_event(e)
    code, out, _ = cli(capsys, "simulate", "demo:triple", "--format", "jsonl")
    assert code == 2 and json.loads(out) == {"deadlock": True}


def test_malformed_spec(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1,\n  "components": [\n')
    code, _, err = cli(capsys, "simulate", str(bad))
    assert code == 1 and "line" in err and "column" in err
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"version": 7, "components": []}))
    assert cli(capsys, "simulate", str(wrong))[0] == 1
    assert cli(capsys, "simulate", str(tmp_path / "missing.json"))[0] == 1
    assert cli(capsys, "simulate", "demo:trolls", "--steps", "-1")[0] == 1
    assert cli(capsys, "simulate")[0] == 1


def test_demo_files_round_trip(capsys, tmp_path):
    code, out, _ = cli(capsys, "demo")
    assert code == 0 and {"triple", "strategies", "trolls"} <= set(out.split())
    for name in ("triple", "trolls-protocols"):
        code, out, _ = cli(capsys, "demo", name)
        path = tmp_path / f"{name}.json"
        path.write_text(out)
        a = cli(capsys, "simulate", str(path), "--steps", "12", "--seed", "3")
        b = cli(capsys, "simulate", f"demo:{name}", "--steps", "12", "--seed", "3")
        assert a == b


def test_reach_queries(capsys):
    code, out, _ = cli(capsys, "reach", "demo:trolls-protocols", "sorted")
    head, *rest = out.splitlines()
    assert code == 0 and head.startswith("FOUND depth=") and "states=" in head
    assert len(rest) == int(head.split()[1].split("=")[1])
    code, out, _ = cli(capsys, "reach", "demo:trolls-protocols-batteries", "battery-out")
    assert code == 0 and out.startswith("EXHAUSTED states=")
    code, out, _ = cli(capsys, "reach", "demo:trolls-protocols", "event", "end(S(R1,R2))")
    assert code == 0 and out.startswith("FOUND") and "end(S(R1,R2))" in out.splitlines()[-1]
    code, out, _ = cli(capsys, "reach", "demo:trolls", "state", '1=[[0,0,0],[1,1,0],[2,2,0]]')
    assert code == 0 and out.startswith("FOUND")


def test_reach_errors(capsys):
    assert cli(capsys, "reach", "demo:trolls", "battery-out")[0] == 1
    assert cli(capsys, "reach", "demo:trolls", "teleport")[0] == 1
    assert cli(capsys, "reach", "demo:trolls", "state", "9=0")[0] == 1
    assert cli(capsys, "reach", "demo:trolls", "sorted", "--max-states", "5")[0] == 3


def test_check_triple(capsys):
    code, out, _ = cli(capsys, "check", "demo:triple", "compatibility", "1", "2")
    assert code == 0 and out.startswith("COMPATIBLE relation=")
    code, out, _ = cli(capsys, "check", "demo:triple", "compatibility", "1", "2x3")
    assert code == 0 and out.startswith("NOT COMPATIBLE at ('q1', ('q2', 'q3')) depth=0")
    code, out, _ = cli(capsys, "check", "demo:triple", "deadlock")
    assert code == 0 and out.startswith("DEADLOCK states=1 depth=0")
    code, out, _ = cli(capsys, "check", "demo:triple", "prefix-closed", "1")
    assert code == 0 and out.startswith("NOT PREFIX-CLOSED")
    code, out, _ = cli(capsys, "check", "demo:triple", "algebra", "--depth", "3")
    assert code == 0 and out.splitlines()[-1] == "0 failed"


def test_check_other_verdicts(capsys):
    code, out, _ = cli(capsys, "check", "demo:trolls", "prefix-closed", "2")
    assert code == 0 and out.startswith("PREFIX-CLOSED")
    code, out, _ = cli(capsys, "check", "demo:trolls", "compatibility", "1", "2")
    assert code == 0 and "sufficient condition holds" in out
    code, out, _ = cli(capsys, "check", "demo:trolls-protocols", "deadlock")
    assert code == 0 and out.startswith("DEADLOCK-FREE")
    code, out, _ = cli(capsys, "check", "demo:trolls", "deadlock", "--max-states", "10")
    assert code == 3 and out.startswith("UNKNOWN")


@pytest.mark.parametrize("argv", [
    ["check", "demo:triple", "compatibility", "1"],
    ["check", "demo:triple", "compatibility", "1", "4"],
    ["check", "demo:triple", "compatibility", "1", "two"],
    ["check", "demo:triple", "liveness"],
])
def test_check_input_errors(capsys, argv):
    assert cli(capsys, *argv)[0] == 1
