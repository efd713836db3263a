"""Interpreter for program IR against a scenario backend, and oracle capture."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .program import Program, Ref, flip_value
from .scenarios.base import BackendError
from .values import (Tensor, from_jsonable, literal_to_value, to_jsonable, values_equal)

COMPLETED = "completed"
FAILED = "failed"
MAX_STEPS = 10_000


class _Abort(Exception):
    def __init__(self, step: int, error: str):
        super().__init__(error)
        self.step = step
        self.error = error


@dataclass
class RunOutcome:
    status: str
    variables: dict[str, Any] = field(default_factory=dict)
    dump: dict = field(default_factory=dict)
    result: list = field(default_factory=list)
    branch: str | None = None
    resolution: dict[str, str] = field(default_factory=dict)
    failed_step: int | None = None
    error: str | None = None

    @property
    def completed(self) -> bool:
        return self.status == COMPLETED

    def to_json(self) -> dict:
        return to_jsonable({
            "status": self.status, "variables": self.variables, "dump": self.dump,
            "result": self.result, "branch": self.branch, "resolution": self.resolution,
            "failed_step": self.failed_step, "error": self.error,
        })

    @classmethod
    def from_json(cls, obj: dict) -> "RunOutcome":
        return cls(**from_jsonable(obj))


def _arg(value, env, step):
    if isinstance(value, Ref):
        if value.name not in env:
            raise _Abort(step, f"NameError: {value.name!r} is not defined")
        return env[value.name]
    return literal_to_value(value)


def _condition_holds(cond, env, step) -> bool:
    if cond.lhs not in env:
        raise _Abort(step, f"NameError: {cond.lhs!r} is not defined")
    lhs = env[cond.lhs]
    if cond.dim is not None:
        if not isinstance(lhs, Tensor) or not 0 <= cond.dim < len(lhs.shape):
            raise _Abort(step, f"TypeError: cannot take dim {cond.dim} of {cond.lhs}")
        lhs = lhs.shape[cond.dim]
    rhs = _arg(cond.rhs, env, step)
    return values_equal(lhs, rhs)


def execute(program: Program, scenario, seed: int, overrides: dict | None = None,
            max_steps: int = MAX_STEPS, inputs: dict | None = None) -> RunOutcome:
    """Run ``program`` on a fresh backend.  Failures are recorded, never raised.

    ``inputs`` are values available before the program's own declarations;
    ``overrides`` win over both.
    """
    backend = scenario.backend_factory(seed)
    env: dict[str, Any] = dict(inputs or {})
    env.update((d.name, literal_to_value(d.value)) for d in program.init)
    env.update(overrides or {})
    branch = None
    step = 0

    def run(calls):
        nonlocal step
        for call in calls:
            step += 1
            if step > max_steps:
                raise _Abort(step, "step budget exhausted")
            kwargs = {k: _arg(v, env, step) for k, v in call.args}
            try:
                out = backend.call(call.api, kwargs)
            except BackendError as exc:
                raise _Abort(step, f"{type(exc).__name__}: {exc}") from None
            if call.target is not None:
                env[call.target] = out

    try:
        run(program.body)
        if program.split is None:
            names = program.result
        else:
            s = program.split
            taken = _condition_holds(s.condition, env, step + 1)
            branch = "if" if taken else "else"
            run(s.if_steps if taken else s.else_steps)
            names = s.if_result if taken else s.else_result
        result = [_arg(Ref(n), env, step + 1) for n in names]
    except _Abort as exc:
        return RunOutcome(FAILED, env, backend.dump(), [], branch,
                          _resolution(backend), exc.step, exc.error)
    return RunOutcome(COMPLETED, env, backend.dump(), result, branch, _resolution(backend))


def _resolution(backend) -> dict[str, str]:
    counts: dict[str, int] = {}
    out = {}
    for partition, new_id in backend.created:
        counts[partition] = counts.get(partition, 0) + 1
        out[f"{partition}#{counts[partition]}"] = new_id
    return out


@dataclass
class OracleRecord:
    taken: RunOutcome
    flipped: RunOutcome | None = None
    cond_name: str | None = None
    cond_value: Any = None
    flip_value: Any = None
    dead_branch: bool = False
    inputs: dict[str, Any] = field(default_factory=dict)

    @property
    def resolution(self) -> dict[str, str]:
        return self.taken.resolution

    def runs(self) -> list[tuple[dict, RunOutcome]]:
        """(init overrides, outcome) pairs a candidate must reproduce."""
        out = [({}, self.taken)]
        if self.flipped is not None:
            out.append(({self.cond_name: self.flip_value}, self.flipped))
        return out

    def to_json(self) -> dict:
        return {
            "taken": self.taken.to_json(),
            "flipped": self.flipped.to_json() if self.flipped else None,
            "cond_name": self.cond_name,
            "cond_value": to_jsonable(self.cond_value),
            "flip_value": to_jsonable(self.flip_value),
            "dead_branch": self.dead_branch,
            "inputs": to_jsonable(self.inputs),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "OracleRecord":
        return cls(RunOutcome.from_json(obj["taken"]),
                   RunOutcome.from_json(obj["flipped"]) if obj["flipped"] else None,
                   obj["cond_name"], from_jsonable(obj["cond_value"]),
                   from_jsonable(obj["flip_value"]), obj["dead_branch"],
                   from_jsonable(obj.get("inputs", {})))


def capture_oracle(program: Program, scenario, seed: int) -> OracleRecord:
    inputs = {d.name: literal_to_value(d.value) for d in program.init}
    taken = execute(program, scenario, seed)
    cond = program.condition_var
    if cond is None:
        return OracleRecord(taken, inputs=inputs)
    value = literal_to_value(program.init_value(cond))
    flipped_value = flip_value(value)
    flipped = execute(program, scenario, seed, {cond: flipped_value})
    rec = OracleRecord(taken, flipped, cond, value, flipped_value, inputs=inputs)
    if flipped.branch is None or flipped.branch == taken.branch:
        rec.flipped = None
        rec.dead_branch = True
    return rec


def agreement_mismatches(build, scenario, oracle: OracleRecord) -> list[str]:
    """Where interpreted values differ from the generator's predicted ending states."""
    problems = []
    for label, schema in build.schemas.items():
        outcome = oracle.flipped if label == "else" else oracle.taken
        if outcome is None:
            problems.append(f"{label}: no outcome")
            continue
        if not outcome.completed:
            problems.append(f"{label}: execution failed: {outcome.error}")
            continue
        for var in schema:
            if var.remote:
                continue
            if var.name not in outcome.variables:
                problems.append(f"{label}: {var.name} missing")
            elif not values_equal(var.value, outcome.variables[var.name],
                                  resolve=outcome.resolution):
                problems.append(f"{label}: {var.name} differs")
        if scenario.predicted_dump is not None:
            if not values_equal(scenario.predicted_dump(schema, outcome.resolution),
                                outcome.dump):
                problems.append(f"{label}: backend dump differs")
    return problems
