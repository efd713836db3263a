"""Generator/evaluator negotiation that turns a program into an instruction.

Both agents talk to a :class:`CompletionClient`.  The mock client is a pure
template renderer so the whole pipeline runs offline; the HTTP client speaks
the common chat-completions wire format.
"""

from __future__ import annotations

import json
import os
import re
import socket
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Protocol, Sequence

from .dsl import DSLSyntaxError, parse_program
from .program import Program, Ref, render_condition, render_literal, render_source

OK_TOKEN = "<OK>"
IMPOSSIBLE_TOKEN = "<IMPOSSIBLE>"
MAX_ROUNDS = 3
TRANSPORT_ATTEMPTS = 3

ACCEPTED = "accepted"
IMPOSSIBLE = "impossible"
EXHAUSTED = "exhausted"
ABORTED = "aborted"

API_KEY_ENV = "STATEGEN_API_KEY"
API_BASE_ENV = "STATEGEN_API_BASE"
MODEL_ENV = "STATEGEN_MODEL"

LISTING_BEGIN = "<program>"
LISTING_END = "</program>"
DRAFT_BEGIN = "<instruction>"
DRAFT_END = "</instruction>"


class TransportError(Exception):
    """A completion request failed in a way that may succeed on retry."""


class CompletionClient(Protocol):
    def complete(self, system: str, turns: Sequence[dict]) -> str:
        ...


# -- verdicts ----------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    kind: str  # "ok" | "revise" | "impossible"
    diagnosis: str = ""

    @property
    def ok(self) -> bool:
        return self.kind == "ok"


def parse_verdict(text: str) -> Verdict:
    """Map evaluator output to a verdict; both tokens at once count as Revise."""
    body = text.strip()
    has_ok = OK_TOKEN in body
    has_impossible = IMPOSSIBLE_TOKEN in body
    if has_ok and not has_impossible:
        return Verdict("ok")
    if has_impossible and not has_ok:
        return Verdict("impossible")
    return Verdict("revise", body)


# -- prompts -----------------------------------------------------------------

GENERATOR_SYSTEM = (
    "You write task instructions for developers who use an assistant to call APIs. "
    "Given a reference program, describe the task it performs so that someone "
    "reading only your instruction could write an equivalent program."
)

EVALUATOR_SYSTEM = (
    "You review task instructions written for a reference program. Reply with "
    f"{OK_TOKEN} if the instruction is acceptable. If it has flaws, reply with a short, "
    "specific diagnosis and a suggestion. Reply with "
    f"{IMPOSSIBLE_TOKEN} if no natural instruction can describe this program."
)

REQUIREMENTS = (
    "1. Unambiguous: a reader must be able to rebuild the program exactly from the "
    "instruction, including every API call, argument and the order of the results.",
    "2. Natural: write the way a developer would ask a coding assistant for help, "
    "not as a line-by-line transcript of code.",
    "3. Concise: state only what is needed; leave out details the reader can infer "
    "from the API documentation.",
)


def _describe_input(name: str, value) -> str:
    return f"- `{name}`: {render_literal(value)}"


def _listing(program: Program) -> str:
    return f"{LISTING_BEGIN}\n{render_source(program)}{LISTING_END}"


def build_generator_prompt(program: Program, docs: str) -> str:
    lines = [
        "Write an instruction for the program below.",
        "",
        "Requirements:",
        *REQUIREMENTS,
        "",
        "The program's inputs already exist when the task starts. Refer to them as "
        "values the user provides, by name. Do not restate them as assignments.",
        "Inputs:",
        *(_describe_input(d.name, d.value) for d in program.init),
    ]
    if program.split is not None:
        lines += [
            "",
            f"The program branches on `{render_condition(program.split.condition)}`. "
            "Describe what happens when the condition holds and when it does not.",
        ]
    lines += [
        "",
        "The values listed in RESULT are what the task must hand back, in that order.",
        "",
        "API documentation:",
        docs.rstrip(),
        "",
        "Program:",
        _listing(program),
    ]
    return "\n".join(lines) + "\n"


def build_evaluator_prompt(program: Program, docs: str, draft: str) -> str:
    lines = [
        "Check the instruction against the program and the requirements.",
        "",
        "Requirements:",
        *REQUIREMENTS,
        "",
        "API documentation:",
        docs.rstrip(),
        "",
        "Program:",
        _listing(program),
        "",
        "Instruction:",
        f"{DRAFT_BEGIN}\n{draft.strip()}\n{DRAFT_END}",
    ]
    return "\n".join(lines) + "\n"


def revision_request(diagnosis: str) -> str:
    return ("A reviewer found problems with your instruction:\n"
            f"{diagnosis.strip()}\n\nRewrite the instruction to address them.")


# -- mock clients --------------------------------------------------------------

def _between(text: str, begin: str, end: str) -> str | None:
    m = re.search(re.escape(begin) + r"\n(.*?)" + re.escape(end), text, re.DOTALL)
    return m.group(1) if m else None


def _arg_phrase(key, value) -> str:
    if isinstance(value, Ref):
        return f"{key} {value.name}"
    return f"{key} {render_literal(value)}"


def _call_sentence(call) -> str:
    args = ", ".join(_arg_phrase(k, v) for k, v in call.args)
    text = f"call {call.api}" + (f" with {args}" if args else "")
    if call.target:
        text += f" and name the result {call.target}"
    return text


def _steps(calls) -> str:
    if not calls:
        return "do nothing"
    parts = [_call_sentence(c) for c in calls]
    return "; then ".join(parts)


def _result_sentence(names) -> str:
    if not names:
        return "There is nothing to return."
    return "Return " + ", ".join(names) + " as the result, in that order."


def render_instruction(program: Program) -> str:
    """Deterministic template description of ``program``."""
    given = [d.name for d in program.init]
    out = []
    if given:
        out.append("You are given " + ", ".join(given) + ".")
    if program.body:
        out.append("First " + _steps(program.body) + ".")
    if program.split is None:
        out.append(_result_sentence(program.result))
    else:
        s = program.split
        cond = render_condition(s.condition)
        out.append(f"If {cond}, {_steps(s.if_steps)}. {_result_sentence(s.if_result)}")
        out.append(f"Otherwise, {_steps(s.else_steps)}. {_result_sentence(s.else_result)}")
    return " ".join(out)


class MockClient:
    """Offline client: the generator renders a template, the evaluator accepts."""

    settings = {"provider": "mock"}

    def complete(self, system: str, turns: Sequence[dict]) -> str:
        if system == EVALUATOR_SYSTEM:
            return OK_TOKEN
        listing = _between(turns[0]["content"], LISTING_BEGIN, LISTING_END)
        if listing is None:
            raise ValueError("generator prompt has no program listing")
        try:
            program = parse_program(listing)
        except DSLSyntaxError as exc:
            raise ValueError(f"unreadable program listing: {exc}") from None
        return render_instruction(program)


class ScriptedClient:
    """Replays fixed replies per role.

    Entries that are exceptions are raised instead of returned, which lets tests
    script transport failures.
    """

    settings = {"provider": "scripted"}

    def __init__(self, generator: Sequence = (), evaluator: Sequence = ()):
        self.generator = list(generator)
        self.evaluator = list(evaluator)
        self.calls: list[tuple[str, int]] = []

    def complete(self, system: str, turns: Sequence[dict]) -> str:
        role = "evaluator" if system == EVALUATOR_SYSTEM else "generator"
        queue = self.evaluator if role == "evaluator" else self.generator
        self.calls.append((role, len(turns)))
        if not queue:
            raise AssertionError(f"scripted {role} ran out of replies")
        reply = queue.pop(0)
        if isinstance(reply, BaseException):
            raise reply
        if callable(reply):
            return reply(system, turns)
        return reply


class HTTPClient:
    """Chat-completions client configured from environment variables."""

    def __init__(self, model: str | None = None, base_url: str | None = None,
                 api_key: str | None = None, timeout: float = 60.0):
        self.api_key = api_key or os.environ.get(API_KEY_ENV)
        if not self.api_key:
            raise RuntimeError(f"set {API_KEY_ENV} to use the HTTP provider")
        self.base_url = (base_url or os.environ.get(API_BASE_ENV)
                         or "https://api.openai.com/v1").rstrip("/")
        self.model = model or os.environ.get(MODEL_ENV) or "gpt-4o"
        self.timeout = timeout
        # decoding is left at provider defaults; recorded for the transcript
        self.settings = {"provider": "http", "base_url": self.base_url,
                         "model": self.model, "decoding": "provider defaults"}

    def complete(self, system: str, turns: Sequence[dict]) -> str:
        body = json.dumps({
            "model": self.model,
            "messages": [{"role": "system", "content": system}, *turns],
        }).encode()
        req = urllib.request.Request(
            self.base_url + "/chat/completions", data=body, method="POST",
            headers={"Content-Type": "application/json",
                     "Authorization": f"Bearer {self.api_key}"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = json.load(resp)
        except urllib.error.HTTPError as exc:
            if exc.code == 429 or exc.code >= 500:
                raise TransportError(f"HTTP {exc.code}") from exc
            raise
        except (urllib.error.URLError, socket.timeout, TimeoutError) as exc:
            raise TransportError(str(exc)) from exc
        return payload["choices"][0]["message"]["content"]


# -- negotiation ---------------------------------------------------------------

@dataclass
class Round:
    draft: str
    verdict: str
    diagnosis: str = ""


@dataclass
class NegotiationTranscript:
    rounds: list[Round] = field(default_factory=list)
    outcome: str = ABORTED
    instruction: str | None = None
    settings: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def needs_review(self) -> bool:
        return self.outcome == EXHAUSTED

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "NegotiationTranscript":
        obj = dict(obj)
        obj["rounds"] = [Round(**r) for r in obj.get("rounds", [])]
        return cls(**obj)


class _Aborted(Exception):
    pass


def _ask(client, system, turns, attempts=TRANSPORT_ATTEMPTS) -> str:
    last = None
    for _ in range(attempts):
        try:
            return client.complete(system, turns)
        except TransportError as exc:
            last = exc
    raise _Aborted(f"transport failed {attempts} times: {last}")


def translate(program: Program, client: CompletionClient, docs: str = "",
              max_rounds: int = MAX_ROUNDS) -> NegotiationTranscript:
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    tr = NegotiationTranscript(settings=dict(getattr(client, "settings", {})))
    turns = [{"role": "user", "content": build_generator_prompt(program, docs)}]
    try:
        for _ in range(max_rounds):
            draft = _ask(client, GENERATOR_SYSTEM, list(turns)).strip()
            review = _ask(client, EVALUATOR_SYSTEM, [
                {"role": "user", "content": build_evaluator_prompt(program, docs, draft)}])
            verdict = parse_verdict(review)
            tr.rounds.append(Round(draft, verdict.kind, verdict.diagnosis))
            if verdict.kind == "ok":
                if not draft:
                    raise _Aborted("generator returned an empty instruction")
                tr.outcome, tr.instruction = ACCEPTED, draft
                return tr
            if verdict.kind == "impossible":
                tr.outcome = IMPOSSIBLE
                return tr
            turns += [{"role": "assistant", "content": draft},
                      {"role": "user", "content": revision_request(verdict.diagnosis)}]
    except _Aborted as exc:
        tr.outcome, tr.error = ABORTED, str(exc)
        return tr
    tr.outcome = EXHAUSTED
    tr.instruction = tr.rounds[-1].draft
    return tr


def translate_many(programs: Sequence[Program], client: CompletionClient,
                   docs: Sequence[str], max_rounds: int = MAX_ROUNDS,
                   workers: int = 4) -> list[NegotiationTranscript]:
    """Translate independently with at most ``workers`` requests in flight."""
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(lambda pd: translate(pd[0], client, pd[1], max_rounds),
                             zip(programs, docs)))
