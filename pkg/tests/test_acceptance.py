"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

The lines are collected in ``helpers.ACCEPTANCE`` and printed in the terminal
summary (see conftest).
"""

import json
import random
import time
from pathlib import Path
from statistics import fmean

import pytest

from helpers import EMPTY, Stub, empirical, total_variation, report_criterion
from mutants import SEEDS, SUITES, apply
from stategen.coverage import ADJACENT, DATA_DEPENDENCY, FrequencyRecorder, PairTransition, pairs_of
from stategen.corpus import CampaignConfig, run_campaign
from stategen.dsl import parse_program
from stategen.engine import EngineConfig, select_transition
from stategen.harness import evaluate, parse_candidate
from stategen.metrics import corpus_stats, coverage_curve
from stategen.model import valid_transitions
from stategen.oracle import agreement_mismatches, capture_oracle
from stategen.program import render_source
from stategen.scenarios import SCENARIO_NAMES, get_scenario
from stategen.translation import ScriptedClient, TransportError, translate

pytestmark = pytest.mark.acceptance

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="module")
def big_corpus():
    """Four 60-program default campaigns per scenario: 720 programs."""
    out = []
    for name in SCENARIO_NAMES:
        for seed in range(4):
            camp = run_campaign(CampaignConfig(scenario=name, seed=seed), keep_builds=True)
            out.append(camp)
    return out


def test_criterion_1_validity():
    problems, times = [], {}
    for name in SCENARIO_NAMES:
        t0 = time.perf_counter()
        camp = run_campaign(CampaignConfig(scenario=name))
        times[name] = time.perf_counter() - t0
        if len(camp.entries) != 60:
            problems.append(f"{name}: {len(camp.entries)} programs, {len(camp.skipped)} skipped")
        runs = [r for e in camp.entries for _, r in e.oracle.runs()]
        failed = [r for r in runs if not r.completed]
        if failed:
            problems.append(f"{name}: {len(failed)}/{len(runs)} runs failed")
        if times[name] >= 120:
            problems.append(f"{name}: {times[name]:.1f}s")
    detail = ", ".join(f"{k} {v:.1f}s" for k, v in times.items())
    report_criterion(1, not problems, "; ".join(problems) or f"all runs Completed ({detail})")


def _first_reach(curve, target):
    for i, v in enumerate(curve, 1):
        if v >= target - 1e-12:
            return i
    return None


def _mean_curve(name, mode, seeds, programs):
    m = len(get_scenario(name).transitions)
    curves = []
    for seed in seeds:
        camp = run_campaign(CampaignConfig(scenario=name, mode=mode, seed=seed,
                                           programs=programs))
        curves.append([v for _, v in coverage_curve([e.program for e in camp.entries], m)])
    return [fmean(col) for col in zip(*curves)]


def test_criterion_2_guidance_effect():
    # guided = adjacent-pair guidance, unguided = uniform selection; paired seeds
    ok, parts = True, []
    for name in SCENARIO_NAMES:
        guided = _mean_curve(name, ADJACENT, range(10), 60)
        unguided = _mean_curve(name, "off", range(10), 60)
        target = unguided[-1]
        g_at, u_at = _first_reach(guided, target), _first_reach(unguided, target)
        good = guided[-1] > target and g_at is not None and g_at <= 0.5 * u_at
        ok &= good
        parts.append(f"{name} guided {guided[-1]:.3f} vs unguided {target:.3f}, "
                     f"reaches it at {g_at} vs {u_at}")
    report_criterion(2, ok, "; ".join(parts))


def test_criterion_3_corpus_stats():
    entries = []
    for name in SCENARIO_NAMES:
        entries += run_campaign(CampaignConfig(scenario=name)).entries
    s = corpus_stats(entries).summary()
    calls, depth, bind = s["api_call_count"], s["path_depth"], s["binding_count"]
    ok = calls >= 5 and 1.0 <= depth <= 3.0 and bind >= 2.5
    report_criterion(3, ok, f"calls {calls:.2f} (>=5), depth {depth:.2f} (1..3), "
                            f"binding {bind:.2f} (>=2.5)")


def _stub_fixture(counts):
    cands = [(Stub(k), {}) for k in counts]
    rec = FrequencyRecorder(ADJACENT, {PairTransition("prev", k): v for k, v in counts.items()})
    return cands, EMPTY, "prev", rec, EngineConfig(mode=ADJACENT)


def _scenario_fixture():
    # real tensor candidates in data-dependency mode, every pair seen at least once
    sc = get_scenario("tensor")
    schema = sc.initializer(3)
    cands = valid_transitions(schema, None, sc.transitions)
    rng = random.Random(0)
    rec = FrequencyRecorder(DATA_DEPENDENCY)
    for c in cands:
        for p in pairs_of(c, schema, None):
            if rec[p] == 0:
                rec.counts[p] = rng.randint(1, 12)
    return cands, schema, None, rec, EngineConfig()


def _expected(cands, schema, prev, rec, config):
    groups = {}
    for i, c in enumerate(cands):
        ps = pairs_of(c, schema, prev, config.mode)
        groups.setdefault((c[0].name, ps), []).append(i)
    weights = {key: sum(1 / (rec[p] + config.epsilon) for p in key[1]) for key in groups}
    total = sum(weights.values())
    return {i: weights[key] / total / len(idx) for key, idx in groups.items() for i in idx}


def test_criterion_4_sampling_law():
    fixtures = [_stub_fixture({"a": 1, "b": 3}),
                _stub_fixture({"a": 1, "b": 2, "c": 5, "d": 10, "e": 40}),
                _scenario_fixture()]
    worst, ok = 0.0, True
    for k, (cands, schema, prev, rec, config) in enumerate(fixtures):
        expected = _expected(cands, schema, prev, rec, config)
        rng = random.Random(100 + k)
        ident = {id(c): i for i, c in enumerate(cands)}
        picks = [ident[id(select_transition(cands, schema, prev, rec, rng, config))]
                 for _ in range(10_000)]
        tv = total_variation(empirical(picks, range(len(cands))), expected)
        worst = max(worst, tv)
        ok &= tv <= 0.03
    report_criterion(4, ok, f"max TV {worst:.4f} over 3 recorders (<=0.03)")


def test_criterion_5_oracle_soundness(big_corpus):
    bad = []
    n = 0
    for camp in big_corpus:
        scenario = get_scenario(camp.config.scenario)
        for e, b in zip(camp.entries, camp.builds):
            n += 1
            v = evaluate(e.source, scenario, e.oracle, e.seed, e.id)
            if not v.passed:
                bad.append(f"{e.id}@{camp.config.seed}: {v.error_class} {v.detail}")
            bad += [f"{e.id}@{camp.config.seed}: {m}"
                    for m in agreement_mismatches(b, scenario, e.oracle)]
    report_criterion(5, not bad, f"{n} programs; " + ("; ".join(bad[:3]) or "all Pass, states agree"))


def test_criterion_6_branch_coverage(big_corpus):
    split = [e for c in big_corpus for e in c.entries if e.program.split is not None]
    missing = [e.id for e in split if e.oracle.flipped is None]
    same = [e.id for e in split if e.oracle.flipped is not None
            and e.oracle.flipped.branch == e.oracle.taken.branch]
    ok = bool(split) and not missing and not same
    report_criterion(6, ok, f"{len(split)} split programs, {len(missing)} without flip, "
                            f"{len(same)} flips on same branch")


def test_criterion_7_round_trip(big_corpus):
    entries = [e for c in big_corpus for e in c.entries]
    broken = [e.id for e in entries if parse_candidate(render_source(e.program)) != e.program]
    ok = len(entries) >= 600 and not broken
    report_criterion(7, ok, f"{len(entries)} programs, {len(broken)} changed")


def test_criterion_8_error_taxonomy():
    agree, total, wrong = 0, 0, []
    for name, (ref, mutants) in SUITES.items():
        scenario = get_scenario(name)
        oracle = capture_oracle(parse_program(ref), scenario, SEEDS[name])
        assert evaluate(ref, scenario, oracle, SEEDS[name]).passed
        for k, (label, old, new) in enumerate(mutants):
            v = evaluate(apply(ref, old, new), scenario, oracle, SEEDS[name])
            total += 1
            if v.error_class == label:
                agree += 1
            else:
                wrong.append(f"{name}#{k} {label}->{v.error_class}")
    report_criterion(8, agree == total == 30, f"{agree}/{total} agree " + " ".join(wrong))


def _reply(r):
    return TransportError("scripted") if r == "!transport" else r


def test_criterion_9_translation_protocol():
    cases = json.loads((FIXTURES / "translation_cases.json").read_text())
    program = parse_program(SUITES["session"][0])
    wrong = []
    for case in cases:
        client = ScriptedClient([_reply(r) for r in case["generator"]],
                                [_reply(r) for r in case["evaluator"]])
        tr = translate(program, client)
        got = (tr.outcome, len(tr.rounds), tr.instruction, [r.verdict for r in tr.rounds])
        want = (case["outcome"], case["rounds"], case["instruction"], case["verdicts"])
        if got != want:
            wrong.append(f"{case['name']}: {got}")
    report_criterion(9, not wrong, f"{len(cases) - len(wrong)}/{len(cases)} cases match "
                                   + "; ".join(wrong))
