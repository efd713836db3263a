import random

import pytest

from stategen.model import (INIT, EmptyCandidateSet, StaleBinding, StateSchema, UnknownVar,
                            VarRef, apply_transition, ending_state, valid_transitions)
from stategen.scenarios import get_scenario
from stategen.scenarios import session as sess
from stategen.scenarios.tensor import TENSOR, reshape_targets
from stategen.values import Tensor, seeded_tensor


def tensor_schema(*shapes):
    s = StateSchema(seed=3)
    for i, shape in enumerate(shapes):
        s.add("x", seeded_tensor(shape, i), TENSOR)
    return s


def names(cands):
    return {spec.name for spec, _ in cands}


def test_conv2d_needs_a_4d_input():
    cat = get_scenario("tensor").transitions
    got = names(valid_transitions(tensor_schema((2, 3, 4)), None, cat))
    assert "conv2d" not in got
    assert {"reshape", "transpose", "unsqueeze", "linear"} <= got


def test_empty_session_store_offers_only_create_and_list():
    s = StateSchema(seed=0)
    s.add("payload", {"study": "x", "genes": ["TP53"], "version": 1}, sess.PAYLOAD)
    got = names(valid_transitions(s, None, get_scenario("session").transitions))
    assert got == {"create_session", "list_sessions"}


def test_cat_dims_follow_shapes():
    cat = get_scenario("tensor").transition("cat")
    bindings = cat.candidates(tensor_schema((2, 3), (2, 5)))
    # naive check: every dim where the other sizes agree
    expected = []
    for a, b in [((2, 3), (2, 5)), ((2, 5), (2, 3))]:
        expected += [d for d in range(2) if all(a[i] == b[i] for i in range(2) if i != d)]
    assert sorted(b["dim"] for b in bindings) == sorted(expected) == [1, 1]


def test_no_candidates_raises():
    with pytest.raises(EmptyCandidateSet):
        valid_transitions(StateSchema(), None, get_scenario("tensor").transitions)


def test_reshape_targets_preserve_element_count():
    targets = reshape_targets(12)
    assert (4, 3) in targets
    assert (5, 3) not in targets
    assert all(_prod(t) == 12 for t in targets)


def _prod(t):
    out = 1
    for d in t:
        out *= d
    return out


def test_reshape_keeps_payload():
    spec = get_scenario("tensor").transition("reshape")
    s = tensor_schema((2, 6))
    after = apply_transition(s, spec, {"input": VarRef(0), "shape": (3, 4)})
    new = after[1]
    assert new.value.shape == (3, 4)
    assert new.value.data == s[0].value.data
    assert new.producer == 1 and new.written_by == "reshape"
    assert s.next_id == 1 and after.next_id == 2


def test_delete_marks_vars_dead_and_rejects_stale_bindings():
    sc = get_scenario("session")
    s = sc.initializer(0)
    while not sess._live_sessions(s):
        s = sc.initializer(s.seed + 1)
    h, item = sess._live_sessions(s)[0]
    before = len(s.live(sess.SESSION_ITEM, remote=True))
    after = apply_transition(s, sc.transition("delete_session"), {"session": VarRef(h.id)})
    assert not after[h.id].live and not after[item].live
    assert len(after.live(sess.SESSION_ITEM, remote=True)) == before - 1
    with pytest.raises(StaleBinding):
        apply_transition(after, sc.transition("get_session"), {"session": VarRef(h.id)})


def test_text_to_speech_produces_audio_record():
    sc = get_scenario("mcp")
    s = sc.initializer(4)
    text, voice = s.live("text")[0], s.live("voice_id")[0]
    after = apply_transition(s, sc.transition("text_to_speech"),
                             {"text": VarRef(text.id), "voice": VarRef(voice.id),
                              "stability": 0.5, "speed": 1.0})
    audio = after.live("audio")[-1]
    assert audio.value["source_text"] == text.value
    assert audio.value["voice"] == voice.value
    assert audio.producer == 1


def test_ending_state_identity_and_composition():
    spec = get_scenario("tensor").transition("reshape")
    s = tensor_schema((2, 6))
    assert ending_state(s, 0) is s[0].value
    s1 = apply_transition(s, spec, {"input": VarRef(0), "shape": (3, 4)})
    s2 = apply_transition(s1, spec, {"input": VarRef(1), "shape": (12,)})
    assert ending_state(s2, 2).shape == (12,)
    with pytest.raises(UnknownVar):
        ending_state(s2, 99)


def test_update_twice_keeps_last_payload():
    sc = get_scenario("session")
    s = StateSchema(seed=1)
    p1 = s.add("payload", {"study": "a", "genes": [], "version": 1}, sess.PAYLOAD)
    p2 = s.add("payload", {"study": "b", "genes": [], "version": 2}, sess.PAYLOAD)
    s = apply_transition(s, sc.transition("create_session"),
                         {"source": "portal", "type": "main", "payload": VarRef(p1.id)})
    sid = s.live(sess.SESSION_ID)[0]
    upd = sc.transition("update_session")
    for p in (p2, p1, p2):
        s = apply_transition(s, upd, {"session": VarRef(sid.id), "payload": VarRef(p.id)})
    item = s.live(sess.SESSION_ITEM, remote=True)[0]
    assert item.value["data"] == p2.value
    assert item.written_by == "update_session"


def test_ids_never_reused_and_init_producer_fixed(scenario):
    rng = random.Random(1)
    s = scenario.initializer(11)
    init_ids = [v.id for v in s]
    seen = set(init_ids)
    for _ in range(30):
        try:
            spec, b = rng.choice(valid_transitions(s, None, scenario.transitions))
        except EmptyCandidateSet:
            break
        b = {**b, **spec.sample_literals(s, b, rng)}
        s2 = apply_transition(s, spec, b)
        new = set(range(s.next_id, s2.next_id))
        assert not new & seen
        seen |= new
        s = s2
    for i in init_ids:
        assert s[i].producer is None
    assert [v.id for v in s] == sorted(v.id for v in s)


@pytest.mark.parametrize("name", ["session", "tensor", "mcp"])
def test_closure_and_no_false_positives(name):
    """10k random valid steps: bindings stay live and the backend accepts every step."""
    from stategen.oracle import execute
    from stategen.program import finalize_program, _calls
    from stategen.engine import Trace, TraceStep, fingerprint
    from stategen.model import produced_ids
    sc = get_scenario(name)
    rng = random.Random(name)
    steps = 0
    seed = 0
    while steps < 10_000:
        seed += 1
        s = sc.initializer(seed)
        trace = Trace(s)
        for _ in range(rng.randint(1, 12)):
            spec, b = rng.choice(valid_transitions(s, trace, sc.transitions))
            for ref in b.values():
                if isinstance(ref, VarRef):
                    assert s[ref.id].live
            b = {**b, **spec.sample_literals(s, b, rng)}
            after = apply_transition(s, spec, b)
            trace.steps.append(TraceStep(len(trace.steps) + 1, spec.name, b,
                                         produced_ids(s, after), fingerprint(spec.name, b),
                                         s.next_id))
            s = after
            steps += 1
        prog = finalize_program(trace.initial, _calls(trace, s, sc.transitions))
        out = execute(prog, sc, seed)
        assert out.completed, (out.error, prog)
