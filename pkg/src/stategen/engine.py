"""Coverage-guided trace generation over a scenario's transition catalog."""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field
from typing import Any

from .coverage import (ADJACENT, DATA_DEPENDENCY, DEFAULT_EPSILON, OFF,
                       FrequencyRecorder, energy, pairs_of)
from .model import (DeadEnd, EmptyCandidateSet, StateSchema, TransitionSpec,
                    apply_transition, produced_ids, valid_transitions)
from .values import stable_hash


@dataclass
class EngineConfig:
    mode: str = DATA_DEPENDENCY
    epsilon: float = DEFAULT_EPSILON
    max_reinit: int = 20

    @property
    def pair_mode(self) -> str:
        return ADJACENT if self.mode == ADJACENT else DATA_DEPENDENCY


@dataclass
class TraceStep:
    index: int
    transition: str
    bindings: dict[str, Any]
    produced: tuple[int, ...]
    fingerprint: str
    id_base: int  # schema.next_id before the step; branches resume from a shifted base


@dataclass
class Trace:
    initial: StateSchema
    steps: list[TraceStep] = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    @property
    def names(self) -> list[str]:
        return [s.transition for s in self.steps]

    def replay(self, catalog) -> StateSchema:
        by_name = {t.name: t for t in catalog}
        schema = self.initial
        for st in self.steps:
            schema = schema.copy()
            schema.next_id = st.id_base
            schema = apply_transition(schema, by_name[st.transition], st.bindings)
        return schema


def fingerprint(name: str, bindings: dict) -> str:
    return stable_hash([name, sorted(bindings.items())])


def select_transition(candidates, schema: StateSchema, previous: str | None,
                      recorder: FrequencyRecorder, rng: random.Random,
                      config: EngineConfig | None = None):
    """Pick one (transition, bindings) candidate.

    Candidates that would exercise unseen pairs win outright, the one with the
    most unseen pairs first.  Otherwise sample by energy.  With guidance off the
    choice is uniform.
    """
    if not candidates:
        raise ValueError("no candidates to select from")
    config = config or EngineConfig()
    if config.mode == OFF:
        return rng.choice(candidates)
    pair_sets = [pairs_of(c, schema, previous, config.pair_mode) for c in candidates]
    novelty = [sum(1 for p in ps if recorder[p] == 0) for ps in pair_sets]
    best = max(novelty)
    if best > 0:
        top = [c for c, k in zip(candidates, novelty) if k == best]
        first = min(spec.name for spec, _ in top)
        top = [c for c in top if c[0].name == first]
        return top[0] if len(top) == 1 else rng.choice(top)
    # Candidates of one transition exercising the same pairs are one choice as
    # far as guidance can tell; weight the group, then pick a member uniformly.
    groups: dict[tuple, list] = {}
    for c, ps in zip(candidates, pair_sets):
        groups.setdefault((c[0].name, ps), []).append(c)
    keys = list(groups)
    weights = [energy(ps, recorder, config.epsilon) for _, ps in keys]
    chosen = rng.choices(keys, weights=weights, k=1)[0]
    members = groups[chosen]
    return members[0] if len(members) == 1 else rng.choice(members)


class TraceGenerator:
    """Builds one trace step by step; ``fork`` copies it for an else-branch."""

    def __init__(self, catalog: list[TransitionSpec], schema: StateSchema,
                 recorder: FrequencyRecorder, rng: random.Random,
                 config: EngineConfig | None = None):
        self.catalog = catalog
        self.schema = schema
        self.recorder = recorder
        self.rng = rng
        self.config = config or EngineConfig()
        self.trace = Trace(schema)
        self.seen: set[tuple[str, str]] = set()
        self.previous: str | None = None

    def _draw(self, candidates):
        spec, base = select_transition(candidates, self.schema, self.previous,
                                       self.recorder, self.rng, self.config)
        bindings = dict(base)
        bindings.update(spec.sample_literals(self.schema, base, self.rng))
        return spec, base, bindings, fingerprint(spec.name, bindings)

    def step(self) -> TraceStep:
        candidates = valid_transitions(self.schema, self.trace, self.catalog)
        spec, base, bindings, fp = self._draw(candidates)
        if (spec.name, fp) in self.seen:
            spec, base, bindings, fp = self._draw(candidates)
        self.seen.add((spec.name, fp))
        self.recorder.record(pairs_of((spec, base), self.schema, self.previous,
                                      self.config.pair_mode))
        before = self.schema
        self.schema = apply_transition(before, spec, bindings)
        st = TraceStep(len(self.trace) + 1, spec.name, bindings,
                       produced_ids(before, self.schema), fp, before.next_id)
        self.trace.steps.append(st)
        self.previous = spec.name
        return st

    def run(self, n: int) -> Trace:
        while len(self.trace) < n:
            self.step()
        return self.trace

    def fork(self) -> "TraceGenerator":
        other = copy.copy(self)
        other.schema = self.schema.copy()
        other.trace = Trace(self.trace.initial, list(self.trace.steps))
        other.seen = set(self.seen)
        other.recorder = self.recorder.clone()
        return other


def generate_trace(scenario, n: int, recorder: FrequencyRecorder, rng: random.Random,
                   seed: int | None = None, config: EngineConfig | None = None) -> Trace:
    if n < 1:
        raise ValueError("trace length must be positive")
    config = config or EngineConfig()
    for attempt in range(config.max_reinit + 1):
        s = seed if (attempt == 0 and seed is not None) else rng.getrandbits(31)
        gen = TraceGenerator(scenario.transitions, scenario.initializer(s), recorder, rng, config)
        try:
            return gen.run(n)
        except EmptyCandidateSet:
            continue
    raise DeadEnd(f"{scenario.name}: no complete trace after {config.max_reinit} re-initializations")
