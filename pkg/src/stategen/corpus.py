"""Campaign configuration, corpus entries and their on-disk format."""

from __future__ import annotations

import json
import logging
import random
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .coverage import DATA_DEPENDENCY, DEFAULT_EPSILON, MODES, FrequencyRecorder
from .engine import EngineConfig
from .model import DeadEnd
from .oracle import OracleRecord, capture_oracle
from .program import (BuildResult, Call, Condition, InitDecl, Program, Ref, Split,
                      build_program, render_source)
from .scenarios import get_scenario
from .translation import NegotiationTranscript
from .values import canonical_dumps, from_jsonable, to_jsonable

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SPLIT_POLICIES = ("uniform", "none")


@dataclass
class CampaignConfig:
    scenario: str = "tensor"
    programs: int = 60
    n: int = 5
    split: str = "uniform"  # uniform over {none, 2..n}, or never split
    mode: str = DATA_DEPENDENCY
    epsilon: float = DEFAULT_EPSILON
    seed: int = 0
    max_reinit: int = 20
    translate: bool = False
    provider: str = "mock"
    max_rounds: int = 3
    workers: int = 4

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.split not in SPLIT_POLICIES:
            raise ValueError(f"split must be one of {SPLIT_POLICIES}, got {self.split!r}")
        if self.programs < 0 or self.n < 1:
            raise ValueError("programs must be >= 0 and n >= 1")

    def engine(self) -> EngineConfig:
        return EngineConfig(self.mode, self.epsilon, self.max_reinit)

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "CampaignConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


# -- IR <-> JSON -------------------------------------------------------------

def _expr_to_json(v):
    return {"__ref__": v.name} if isinstance(v, Ref) else to_jsonable(v)


def _expr_from_json(v):
    if isinstance(v, dict) and set(v) == {"__ref__"}:
        return Ref(v["__ref__"])
    return from_jsonable(v, frozen=True)


def _call_to_json(c: Call) -> dict:
    return {"target": c.target, "api": c.api,
            "args": [[k, _expr_to_json(v)] for k, v in c.args]}


def _call_from_json(d: dict) -> Call:
    return Call(d["target"], d["api"], tuple((k, _expr_from_json(v)) for k, v in d["args"]))


def program_to_json(p: Program) -> dict:
    out = {
        "init": [[d.name, to_jsonable(d.value)] for d in p.init],
        "body": [_call_to_json(c) for c in p.body],
        "result": list(p.result),
        "split": None,
    }
    if p.split is not None:
        s = p.split
        out["split"] = {
            "condition": {"lhs": s.condition.lhs, "rhs": _expr_to_json(s.condition.rhs),
                          "dim": s.condition.dim},
            "if_steps": [_call_to_json(c) for c in s.if_steps],
            "else_steps": [_call_to_json(c) for c in s.else_steps],
            "if_result": list(s.if_result),
            "else_result": list(s.else_result),
        }
    return out


def program_from_json(d: dict) -> Program:
    split = None
    if d.get("split"):
        s = d["split"]
        c = s["condition"]
        split = Split(Condition(c["lhs"], _expr_from_json(c["rhs"]), c["dim"]),
                      tuple(map(_call_from_json, s["if_steps"])),
                      tuple(map(_call_from_json, s["else_steps"])),
                      tuple(s["if_result"]), tuple(s["else_result"]))
    return Program(
        tuple(InitDecl(n, from_jsonable(v, frozen=True)) for n, v in d["init"]),
        tuple(map(_call_from_json, d["body"])), split, tuple(d.get("result", ())),
    )


# -- entries -----------------------------------------------------------------

@dataclass
class CorpusEntry:
    id: str
    scenario: str
    seed: int
    program: Program
    source: str
    oracle: OracleRecord
    instruction: str | None = None
    transcript: NegotiationTranscript | None = None
    flags: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "id": self.id, "scenario": self.scenario, "seed": self.seed,
            "program": program_to_json(self.program), "source": self.source,
            "oracle": self.oracle.to_json(), "instruction": self.instruction,
            "transcript": self.transcript.to_json() if self.transcript else None,
            "flags": self.flags, "meta": self.meta,
        }

    @classmethod
    def from_json(cls, d: dict) -> "CorpusEntry":
        return cls(
            d["id"], d["scenario"], d["seed"], program_from_json(d["program"]),
            d["source"], OracleRecord.from_json(d["oracle"]), d.get("instruction"),
            NegotiationTranscript.from_json(d["transcript"]) if d.get("transcript") else None,
            dict(d.get("flags", {})), dict(d.get("meta", {})),
        )


@dataclass
class Campaign:
    config: CampaignConfig
    entries: list[CorpusEntry] = field(default_factory=list)
    recorder: FrequencyRecorder | None = None
    skipped: list[dict] = field(default_factory=list)
    builds: list[BuildResult] = field(default_factory=list)
    seconds: float = 0.0


def program_rngs(scenario: str, seed: int, i: int):
    """Per-program randomness, identical across coverage modes for paired runs."""
    base = f"{scenario}:{seed}:{i}"
    init_seed = random.Random(base + ":init").getrandbits(31)
    return init_seed, random.Random(base + ":select"), random.Random(base + ":split")


def run_campaign(config: CampaignConfig, keep_builds: bool = False) -> Campaign:
    scenario = get_scenario(config.scenario)
    recorder = FrequencyRecorder(config.mode)
    camp = Campaign(config, recorder=recorder)
    t0 = time.perf_counter()
    for i in range(config.programs):
        init_seed, rng, split_rng = program_rngs(scenario.name, config.seed, i)
        try:
            build = build_program(scenario, config.n, recorder, rng, init_seed,
                                  config.engine(), split_rng,
                                  allow_split=config.split == "uniform")
        except DeadEnd as exc:
            log.warning("program %d skipped: %s", i, exc)
            camp.skipped.append({"index": i, "error": str(exc)})
            continue
        oracle = capture_oracle(build.program, scenario, build.seed)
        entry = CorpusEntry(
            id=f"{scenario.name}-{i:03d}", scenario=scenario.name, seed=build.seed,
            program=build.program, source=render_source(build.program), oracle=oracle,
            flags={"dead_branch": oracle.dead_branch, "needs_review": False},
            meta={"index": i, "split_position": build.split_position,
                  "retries": build.retries},
        )
        camp.entries.append(entry)
        if keep_builds:
            camp.builds.append(build)
    camp.seconds = time.perf_counter() - t0
    return camp


# -- files -------------------------------------------------------------------

def corpus_to_json(campaigns: list[Campaign], entries: list[CorpusEntry] | None = None) -> dict:
    if entries is None:
        entries = [e for c in campaigns for e in c.entries]
    return {
        "schema_version": SCHEMA_VERSION,
        "campaigns": [{"config": asdict(c.config),
                       "recorder": c.recorder.to_json() if c.recorder else None,
                       "skipped": c.skipped} for c in campaigns],
        "entries": [e.to_json() for e in entries],
    }


@dataclass
class Corpus:
    entries: list[CorpusEntry]
    campaigns: list[dict] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> dict:
        return {"schema_version": self.schema_version, "campaigns": self.campaigns,
                "entries": [e.to_json() for e in self.entries]}

    def by_id(self) -> dict[str, CorpusEntry]:
        return {e.id: e for e in self.entries}

    def recorder(self, scenario: str) -> FrequencyRecorder | None:
        for c in self.campaigns:
            if c["config"]["scenario"] == scenario and c.get("recorder"):
                return FrequencyRecorder.from_json(c["recorder"])
        return None


def dumps_corpus(obj: Any) -> str:
    return canonical_dumps(obj, indent=1) + "\n"


def save_corpus(path, obj) -> None:
    if isinstance(obj, Corpus):
        obj = obj.to_json()
    Path(path).write_text(dumps_corpus(obj))


def load_corpus(path) -> Corpus:
    d = json.loads(Path(path).read_text())
    version = d.get("schema_version")
    if not isinstance(version, int) or version > SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {version!r}")
    return Corpus([CorpusEntry.from_json(e) for e in d.get("entries", [])],
                  list(d.get("campaigns", [])), version)
