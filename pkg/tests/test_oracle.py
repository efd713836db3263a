import json

from conftest import make_build
from stategen.dsl import parse_program
from stategen.oracle import (OracleRecord, agreement_mismatches, capture_oracle, execute)
from stategen.scenarios import get_scenario

SESSION = get_scenario("session")

CRUD = """# inputs
payload0 = {"study": "luad_tcga"}
# program
sid1 = create_session(source="portal", type="main", payload=payload0)
delete_session(session=sid1)
data2 = get_session(session=sid1)
RESULT = [data2]
"""


def test_generator_and_interpreter_agree(scenario):
    for seed in range(40):
        b = make_build(scenario.name, seed)
        rec = capture_oracle(b.program, scenario, b.seed)
        assert agreement_mismatches(b, scenario, rec) == []


def test_get_after_delete_fails_at_that_step():
    p = parse_program(CRUD)
    out = execute(p, SESSION, 10_000)
    assert not out.completed
    assert out.failed_step == 3  # steps count from 1
    assert "not found" in out.error


def test_unbound_name_aborts():
    p = parse_program(CRUD.replace("session=sid1)\nd", "session=nope)\nd"))
    out = execute(p, SESSION, 0)
    assert not out.completed and "NameError" in out.error


def test_flip_runs_the_else_branch(scenario):
    seen = 0
    for seed in range(80):
        b = make_build(scenario.name, seed)
        rec = capture_oracle(b.program, scenario, b.seed)
        if b.program.split is None:
            assert rec.flipped is None and len(rec.runs()) == 1
            continue
        seen += 1
        assert rec.taken.branch == "if"
        assert rec.flipped.branch == "else"
        ((o1, _), (o2, _)) = rec.runs()
        assert o1 == {} and o2 == {rec.cond_name: rec.flip_value}
        assert rec.flip_value != rec.cond_value
    assert seen > 20


def test_resolution_map_names_created_items():
    p = parse_program("""# program
a = create_session(source="portal", type="main", payload={})
b = create_session(source="portal", type="main", payload={})
c = create_session(source="mobile", type="group", payload={})
RESULT = [a, b, c]
""")
    out = execute(p, SESSION, 5)
    assert out.resolution == {
        "session/portal/main#1": "portal-main-0001",
        "session/portal/main#2": "portal-main-0002",
        "session/mobile/group#1": "mobile-group-0001",
    }
    assert out.result == ["portal-main-0001", "portal-main-0002", "mobile-group-0001"]


def test_reexecution_is_stable_and_record_round_trips(scenario):
    for seed in range(15):
        b = make_build(scenario.name, seed)
        rec = capture_oracle(b.program, scenario, b.seed)
        again = capture_oracle(b.program, scenario, b.seed)
        assert json.dumps(rec.to_json(), sort_keys=True) == \
            json.dumps(again.to_json(), sort_keys=True)
        back = OracleRecord.from_json(json.loads(json.dumps(rec.to_json())))
        assert back.to_json() == rec.to_json()


def test_step_limit_is_reported():
    p = parse_program(CRUD)
    out = execute(p, SESSION, 0, max_steps=1)
    assert not out.completed
