"""Program IR, construction from traces (with one optional if/else split) and rendering."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any

from .coverage import FrequencyRecorder
from .engine import EngineConfig, Trace, TraceGenerator
from .model import (DeadEnd, EmptyCandidateSet, StateGenError, StateSchema, VarRef)
from .values import Tensor, TensorInit, value_to_literal

COND_NAME = "cond0"


class NoEligibleVariable(StateGenError):
    pass


# -- IR ----------------------------------------------------------------------

@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Call:
    target: str | None
    api: str
    args: tuple[tuple[str, Any], ...]

    def refs(self) -> list[str]:
        return [v.name for _, v in self.args if isinstance(v, Ref)]


@dataclass(frozen=True)
class InitDecl:
    name: str
    value: Any  # IR literal


@dataclass(frozen=True)
class Condition:
    """``lhs == rhs``, or ``dim(lhs, dim) == rhs`` for tensors."""

    lhs: str
    rhs: Any  # Ref to an init variable, or a literal
    dim: int | None = None

    def refs(self) -> list[str]:
        out = [self.lhs]
        if isinstance(self.rhs, Ref):
            out.append(self.rhs.name)
        return out


@dataclass(frozen=True)
class Split:
    condition: Condition
    if_steps: tuple[Call, ...]
    else_steps: tuple[Call, ...]
    if_result: tuple[str, ...]
    else_result: tuple[str, ...]


@dataclass(frozen=True)
class Path:
    label: str
    calls: tuple[Call, ...]
    result: tuple[str, ...]


@dataclass(frozen=True)
class Program:
    init: tuple[InitDecl, ...]
    body: tuple[Call, ...]
    split: Split | None = None
    result: tuple[str, ...] = ()

    def paths(self) -> list[Path]:
        if self.split is None:
            return [Path("main", self.body, self.result)]
        s = self.split
        return [Path("if", self.body + s.if_steps, s.if_result),
                Path("else", self.body + s.else_steps, s.else_result)]

    @property
    def calls(self) -> tuple[Call, ...]:
        if self.split is None:
            return self.body
        return self.body + self.split.if_steps + self.split.else_steps

    @property
    def condition_var(self) -> str | None:
        if self.split is None or not isinstance(self.split.condition.rhs, Ref):
            return None
        return self.split.condition.rhs.name

    def init_value(self, name: str) -> Any:
        for d in self.init:
            if d.name == name:
                return d.value
        raise KeyError(name)


# -- construction ------------------------------------------------------------

def choose_split_point(n: int, rng: random.Random) -> int | None:
    """Position p in {2..n} to split before, or None for a linear program."""
    if n < 2:
        return None
    return rng.choice([None, *range(2, n + 1)])


@dataclass
class ConditionChoice:
    var_id: int
    dim: int | None
    value: Any


def _eligible(value) -> bool:
    return isinstance(value, (bool, int, float, str, Tensor))


def synthesize_condition(schema: StateSchema) -> ConditionChoice:
    """Newest live local variable of a comparable type, with its current value."""
    for var in reversed(list(schema)):
        if var.remote or not var.live or not _eligible(var.value):
            continue
        if isinstance(var.value, Tensor):
            return ConditionChoice(var.id, 0, var.value.shape[0])
        return ConditionChoice(var.id, None, var.value)
    raise NoEligibleVariable("no live variable can drive a condition")


def flip_value(value: Any) -> Any:
    """A value guaranteed to differ from ``value``."""
    if isinstance(value, bool):
        return not value
    if isinstance(value, (int, float)):
        return value + 1
    if isinstance(value, str):
        return value + "_x"
    raise TypeError(f"cannot flip {type(value).__name__}")


def fork_generator(gen: TraceGenerator) -> TraceGenerator:
    return gen.fork()


@dataclass
class BuildResult:
    program: Program
    seed: int
    traces: dict[str, Trace]
    schemas: dict[str, StateSchema]  # final schema per path label
    split_position: int | None = None
    cond_value: Any = None
    retries: int = 0
    meta: dict = field(default_factory=dict)


def _calls(trace: Trace, schema: StateSchema, catalog, start: int = 0) -> tuple[Call, ...]:
    specs = {t.name: t for t in catalog}
    out = []
    for st in trace.steps[start:]:
        spec = specs[st.transition]
        args = []
        for p in spec.params:
            if p.name not in st.bindings:
                continue
            b = st.bindings[p.name]
            args.append((p.name, Ref(schema[b.id].name) if isinstance(b, VarRef)
                         else value_to_literal(b)))
        if len(st.produced) > 1:
            raise StateGenError(f"{st.transition} produced more than one variable")
        target = schema[st.produced[0]].name if st.produced else None
        out.append(Call(target, st.transition, tuple(args)))
    return tuple(out)


def _sink(calls, extra_refs=()) -> tuple[str, ...]:
    used = set(extra_refs)
    for c in calls:
        used.update(c.refs())
    return tuple(c.target for c in calls if c.target is not None and c.target not in used)


def _init_block(schema: StateSchema) -> list[InitDecl]:
    out = []
    for v in schema:
        if v.remote:
            continue
        lit = v.init_literal if v.init_literal is not None else value_to_literal(v.value)
        out.append(InitDecl(v.name, lit))
    return out


def finalize_program(initial: StateSchema, prefix: tuple[Call, ...],
                     branches: tuple[tuple[Call, ...], ...] | None = None,
                     condition: Condition | None = None, cond_value: Any = None) -> Program:
    init = _init_block(initial)
    if branches is None:
        return Program(tuple(init), prefix, None, _sink(prefix))
    init.append(InitDecl(condition.rhs.name, value_to_literal(cond_value)))
    if_steps, else_steps = branches
    cond_refs = condition.refs()
    split = Split(condition, if_steps, else_steps,
                  _sink(prefix + if_steps, cond_refs), _sink(prefix + else_steps, cond_refs))
    return Program(tuple(init), prefix, split, ())


def build_program(scenario, n: int, recorder: FrequencyRecorder, rng: random.Random,
                  seed: int, config: EngineConfig | None = None,
                  split_rng: random.Random | None = None,
                  allow_split: bool = True) -> BuildResult:
    config = config or EngineConfig()
    position = choose_split_point(n, split_rng or rng) if allow_split else None
    for attempt in range(config.max_reinit + 1):
        s = seed if attempt == 0 else rng.getrandbits(31)
        try:
            res = _build_once(scenario, n, recorder, rng, s, config, position)
        except EmptyCandidateSet:
            continue
        res.retries = attempt
        return res
    raise DeadEnd(f"{scenario.name}: no program after {config.max_reinit} re-initializations")


def _build_once(scenario, n, recorder, rng, seed, config, position) -> BuildResult:
    catalog = scenario.transitions
    initial = scenario.initializer(seed)
    gen = TraceGenerator(catalog, initial, recorder, rng, config)
    choice = None
    if position is not None:
        gen.run(position - 1)
        try:
            choice = synthesize_condition(gen.schema)
        except NoEligibleVariable:
            position = None
    if choice is None:
        trace = gen.run(n)
        prog = finalize_program(initial, _calls(trace, gen.schema, catalog))
        return BuildResult(prog, seed, {"main": trace}, {"main": gen.schema})

    split_schema = gen.schema
    other = fork_generator(gen)
    gen.run(n)
    # the else run starts from the split snapshot but inherits what the if run learned
    other.recorder = gen.recorder.clone()
    other.seen = set(gen.seen)
    other.schema.next_id = gen.schema.next_id
    other.run(n)
    recorder.merge_max(other.recorder)

    k = position - 1
    prefix = _calls(gen.trace, gen.schema, catalog)[:k]
    if_steps = _calls(gen.trace, gen.schema, catalog, k)
    else_steps = _calls(other.trace, other.schema, catalog, k)
    cond = Condition(split_schema[choice.var_id].name, Ref(COND_NAME), choice.dim)
    prog = finalize_program(initial, prefix, (if_steps, else_steps), cond, choice.value)
    return BuildResult(prog, seed, {"if": gen.trace, "else": other.trace},
                       {"if": gen.schema, "else": other.schema}, position, choice.value)


# -- rendering ---------------------------------------------------------------

def render_literal(value: Any) -> str:
    if isinstance(value, bool):
        return "True" if value else "False"
    if value is None:
        return "None"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, TensorInit):
        return f"tensor({render_literal(tuple(value.shape))}, seed={value.seed})"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(render_literal(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {render_literal(v)}"
                               for k, v in value.items()) + "}"
    raise TypeError(f"no literal syntax for {type(value).__name__}")


def render_expr(value: Any) -> str:
    return value.name if isinstance(value, Ref) else render_literal(value)


def render_call(call: Call) -> str:
    args = ", ".join(f"{k}={render_expr(v)}" for k, v in call.args)
    text = f"{call.api}({args})"
    return f"{call.target} = {text}" if call.target else text


def render_condition(cond: Condition) -> str:
    lhs = cond.lhs if cond.dim is None else f"dim({cond.lhs}, {cond.dim})"
    return f"{lhs} == {render_expr(cond.rhs)}"


def render_result(names) -> str:
    return "RESULT = [" + ", ".join(names) + "]"


def render_source(program: Program, scenario=None) -> str:
    lines = ["# inputs"]
    lines += [f"{d.name} = {render_literal(d.value)}" for d in program.init]
    lines.append("# program")
    lines += [render_call(c) for c in program.body]
    if program.split is None:
        lines.append(render_result(program.result))
    else:
        s = program.split
        lines.append(f"if {render_condition(s.condition)} {{")
        lines += ["    " + render_call(c) for c in s.if_steps]
        lines.append("    " + render_result(s.if_result))
        lines.append("} else {")
        lines += ["    " + render_call(c) for c in s.else_steps]
        lines.append("    " + render_result(s.else_result))
        lines.append("}")
    return "\n".join(lines) + "\n"
