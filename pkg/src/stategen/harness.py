"""Score candidate programs against captured oracles.

A candidate fails at the earliest stage that goes wrong: it does not parse
(Syntax), it parses but aborts while running (Execution), or it runs but the
backend state, RESULT list or input variables differ from the oracle (Result).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from typing import Iterable

from .dsl import DSLSyntaxError, parse_program, strip_code_fences
from .oracle import OracleRecord, execute
from .program import Program
from .values import values_equal

SYNTAX = "Syntax"
EXECUTION = "Execution"
RESULT = "Result"
ERROR_CLASSES = (SYNTAX, EXECUTION, RESULT)


@dataclass(frozen=True)
class EvalVerdict:
    task_id: str | None = None
    scenario: str | None = None
    error_class: str | None = None  # None means Pass
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.error_class is None

    def to_json(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "EvalVerdict":
        return cls(obj.get("task_id"), obj.get("scenario"), obj.get("error_class"),
                   obj.get("detail", ""))


class CandidateSyntaxError(Exception):
    def __init__(self, err: DSLSyntaxError):
        super().__init__(str(err))
        self.line = err.line
        self.col = err.col


def parse_candidate(text: str) -> Program:
    """Parse model output, tolerating a surrounding code fence."""
    try:
        return parse_program(strip_code_fences(text))
    except DSLSyntaxError as exc:
        raise CandidateSyntaxError(exc) from None


def _compare(label, expected, actual, inputs) -> str | None:
    if not values_equal(expected.dump, actual.dump):
        return f"{label}: backend state differs"
    if len(expected.result) != len(actual.result):
        return (f"{label}: RESULT has {len(actual.result)} values, "
                f"expected {len(expected.result)}")
    for i, (e, a) in enumerate(zip(expected.result, actual.result)):
        if not values_equal(e, a):
            return f"{label}: RESULT[{i}] differs"
    for name in inputs:
        if name in expected.variables and not values_equal(
                expected.variables[name], actual.variables.get(name)):
            return f"{label}: input {name} changed"
    return None


def evaluate(candidate, scenario, oracle: OracleRecord, seed: int,
             task_id: str | None = None) -> EvalVerdict:
    """``candidate`` is source text or an already parsed :class:`Program`."""
    def verdict(cls=None, detail=""):
        return EvalVerdict(task_id, scenario.name, cls, detail)

    if isinstance(candidate, Program):
        program = candidate
    else:
        try:
            program = parse_candidate(candidate)
        except CandidateSyntaxError as exc:
            return verdict(SYNTAX, str(exc))

    runs = []
    for overrides, expected in oracle.runs():
        actual = execute(program, scenario, seed, overrides, inputs=oracle.inputs)
        label = "flipped" if overrides else "default"
        if not actual.completed:
            return verdict(EXECUTION, f"{label} run, step {actual.failed_step}: {actual.error}")
        runs.append((label, expected, actual))
    for label, expected, actual in runs:
        problem = _compare(label, expected, actual, oracle.inputs)
        if problem:
            return verdict(RESULT, problem)
    return verdict()


@dataclass
class PassReport:
    overall: float | None
    per_scenario: dict[str, float]
    classes: dict[str, int]
    total: int

    def to_json(self) -> dict:
        return asdict(self)


def pass_at_1(verdicts: Iterable[EvalVerdict]) -> PassReport:
    verdicts = list(verdicts)
    by_scenario: dict[str, list[bool]] = {}
    for v in verdicts:
        by_scenario.setdefault(v.scenario or "?", []).append(v.passed)
    classes = Counter(v.error_class for v in verdicts if not v.passed)
    overall = sum(v.passed for v in verdicts) / len(verdicts) if verdicts else None
    return PassReport(
        overall,
        {k: sum(xs) / len(xs) for k, xs in sorted(by_scenario.items())},
        {c: classes.get(c, 0) for c in ERROR_CLASSES},
        len(verdicts),
    )
