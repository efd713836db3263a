"""Pair-transition bookkeeping and energy weights for coverage-guided selection."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .model import INIT, StateSchema, TransitionSpec

DATA_DEPENDENCY = "data-dependency"
ADJACENT = "adjacent"
OFF = "off"
MODES = (DATA_DEPENDENCY, ADJACENT, OFF)

DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True, order=True)
class PairTransition:
    producer: str
    consumer: str

    def __str__(self):
        return f"{self.producer}->{self.consumer}"


class FrequencyRecorder:
    """Campaign-wide counts of observed pair transitions."""

    def __init__(self, mode: str = DATA_DEPENDENCY, counts=None):
        if mode not in MODES:
            raise ValueError(f"unknown coverage mode {mode!r}")
        self.mode = mode
        self.counts: Counter[PairTransition] = Counter(counts or {})
        self.events = sum(self.counts.values())

    def __getitem__(self, pair: PairTransition) -> int:
        return self.counts.get(pair, 0)

    def record(self, pairs: Iterable[PairTransition]) -> None:
        for p in pairs:
            self.counts[p] += 1
            self.events += 1

    def covered(self) -> set[PairTransition]:
        return {p for p, c in self.counts.items() if c > 0}

    def clone(self) -> "FrequencyRecorder":
        return FrequencyRecorder(self.mode, dict(self.counts))

    def merge_max(self, other: "FrequencyRecorder") -> None:
        for p, c in other.counts.items():
            if c > self.counts.get(p, 0):
                self.counts[p] = c
        self.events = sum(self.counts.values())

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "counts": [[p.producer, p.consumer, c] for p, c in sorted(self.counts.items())],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FrequencyRecorder":
        return cls(obj["mode"], {PairTransition(a, b): c for a, b, c in obj["counts"]})

    def __repr__(self):
        return f"FrequencyRecorder(mode={self.mode!r}, pairs={len(self.counts)}, events={self.events})"


def pairs_of(candidate: tuple[TransitionSpec, dict], schema: StateSchema,
             previous: str | None, mode: str = DATA_DEPENDENCY) -> frozenset[PairTransition]:
    """Pairs a candidate would exercise.

    ``previous`` is the transition applied just before (``None`` at the start
    of a trace).  Candidates that consume no state fall back to the adjacent pair.
    """
    spec, bindings = candidate
    prev = previous or INIT
    if mode == DATA_DEPENDENCY:
        reads = spec.reads(schema, bindings)
        if reads:
            return frozenset(PairTransition(schema[i].written_by, spec.name) for i in reads)
    return frozenset({PairTransition(prev, spec.name)})


def energy(pairs: Iterable[PairTransition], recorder: FrequencyRecorder,
           epsilon: float = DEFAULT_EPSILON) -> float:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return sum(1.0 / (recorder[p] + epsilon) for p in pairs)


def record(recorder: FrequencyRecorder, pairs: Iterable[PairTransition]) -> None:
    recorder.record(pairs)
