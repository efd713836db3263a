import pytest

from stategen.dsl import DSLSyntaxError, parse_program, strip_code_fences
from stategen.harness import (EXECUTION, RESULT, SYNTAX, EvalVerdict, evaluate, parse_candidate,
                              CandidateSyntaxError, pass_at_1)
from stategen.oracle import capture_oracle
from stategen.program import render_source
from stategen.scenarios import get_scenario
from conftest import make_build

SESSION = get_scenario("session")

REFERENCE = """# inputs
payload0 = {"study": "luad_tcga"}
# program
sid1 = create_session(source="portal", type="main", payload=payload0)
update_session(session=sid1, payload={"study": "gbm_tcga"})
data2 = get_session(session=sid1)
RESULT = [data2]
"""


@pytest.fixture
def oracle():
    return capture_oracle(parse_program(REFERENCE), SESSION, 10_000)


def test_syntax_errors_carry_position():
    with pytest.raises(DSLSyntaxError) as exc:
        parse_program('# program\na = f(\n  b=}\n')
    assert (exc.value.line, exc.value.col) == (3, 5)
    with pytest.raises(DSLSyntaxError, match="unbalanced"):
        parse_program("a = f()\n}\n")
    with pytest.raises(DSLSyntaxError, match="missing"):
        parse_program("x = f()\nif x == 1 {\n  g()\n")
    with pytest.raises(CandidateSyntaxError) as exc:
        parse_candidate("a = = f()")
    assert exc.value.line == 1


def test_code_fences_are_stripped():
    assert strip_code_fences("here:\n```text\na = f()\n```\n").strip() == "a = f()"
    assert parse_candidate("```\n" + REFERENCE + "```") == parse_program(REFERENCE)


def test_render_parse_round_trip(scenario):
    for seed in range(30):
        p = make_build(scenario.name, seed).program
        assert parse_program(render_source(p)) == p


def test_reference_passes(oracle):
    v = evaluate(REFERENCE, SESSION, oracle, 10_000, task_id="t")
    assert v.passed and v.task_id == "t" and v.scenario == "session"


def test_syntax_class(oracle):
    v = evaluate(REFERENCE.replace("RESULT = [data2]", "RESULT = [data2"), SESSION, oracle, 10_000)
    assert v.error_class == SYNTAX


def test_extra_delete_is_result_error(oracle):
    cand = REFERENCE.replace("RESULT", "delete_session(session=sid1)\nRESULT")
    assert evaluate(cand, SESSION, oracle, 10_000).error_class == RESULT


def test_get_on_deleted_handle_is_execution_error(oracle):
    cand = REFERENCE.replace("update_session", "delete_session(session=sid1)\nupdate_session")
    v = evaluate(cand, SESSION, oracle, 10_000)
    assert v.error_class == EXECUTION
    assert "not found" in v.detail


def test_wrong_result_order_and_length(oracle):
    more = REFERENCE.replace("RESULT = [data2]", "RESULT = [data2, sid1]")
    assert evaluate(more, SESSION, oracle, 10_000).error_class == RESULT


def test_candidate_may_not_redefine_inputs(oracle):
    cand = REFERENCE.replace('"luad_tcga"}', '"brca_tcga"}')
    v = evaluate(cand, SESSION, oracle, 10_000)
    assert v.error_class == RESULT


def test_split_reference_passes_and_wrong_else_fails(scenario):
    for seed in range(60):
        b = make_build(scenario.name, seed)
        if b.program.split is None:
            continue
        rec = capture_oracle(b.program, scenario, b.seed)
        src = render_source(b.program)
        assert evaluate(src, scenario, rec, b.seed).passed
        # dropping the else branch body makes the flipped run disagree
        if_block, else_block = src.split("} else {")
        body_lines = if_block.split("\n")
        bad = if_block + "} else {" + "\n" + "\n".join(
            ln for ln in body_lines if ln.startswith("    ")) + "\n}\n"
        v = evaluate(bad, scenario, rec, b.seed)
        if rec.flipped.result != rec.taken.result or rec.flipped.dump != rec.taken.dump:
            assert not v.passed
        break


def test_pass_at_1():
    vs = [EvalVerdict("a", "session"), EvalVerdict("b", "session"),
          EvalVerdict("c", "mcp"), EvalVerdict("d", "mcp", RESULT, "x")]
    rep = pass_at_1(vs)
    assert rep.overall == 0.75
    assert rep.per_scenario == {"mcp": 0.5, "session": 1.0}
    assert rep.classes == {SYNTAX: 0, EXECUTION: 0, RESULT: 1}
    assert pass_at_1([]).overall is None
    assert EvalVerdict.from_json(vs[3].to_json()) == vs[3]
