"""Corpus statistics: adjacent transition coverage and data-flow complexity."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from statistics import fmean
from typing import Iterable, Sequence

from .program import Call, Program, render_source


def _sequences(item) -> list[list[str]]:
    if isinstance(item, Program):
        return [[c.api for c in p.calls] for p in item.paths()]
    return [list(item)]


def adjacent_pairs(items: Iterable) -> set[tuple[str, str]]:
    pairs = set()
    for item in items:
        for seq in _sequences(item):
            pairs.update(zip(seq, seq[1:]))
    return pairs


def adjacent_transition_coverage(items: Iterable, m: int) -> float:
    """Distinct consecutive call pairs over ``m**2``; split programs count per path."""
    if m < 1:
        raise ValueError("m must be positive")
    return len(adjacent_pairs(items)) / (m * m)


def coverage_curve(items: Sequence, m: int) -> list[tuple[int, float]]:
    seen: set[tuple[str, str]] = set()
    out = []
    for i, item in enumerate(items, 1):
        seen |= adjacent_pairs([item])
        out.append((i, len(seen) / (m * m)))
    return out


def curve_csv(curves: dict[str, list[tuple[int, float]]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["series", "programs", "atc"])
    for label, curve in curves.items():
        for i, v in curve:
            w.writerow([label, i, f"{v:.6f}"])
    return buf.getvalue()


def _dependency_edges(calls: Sequence[Call]):
    producer = {}
    edges = []
    for j, c in enumerate(calls):
        for name in c.refs():
            if name in producer:
                edges.append((producer[name], j, name))
        if c.target is not None:
            producer[c.target] = j
    return edges


def _path_depth(calls: Sequence[Call]) -> int:
    longest = [0] * len(calls)
    for i, j, _ in sorted(_dependency_edges(calls), key=lambda e: e[1]):
        longest[j] = max(longest[j], longest[i] + 1)
    return max(longest, default=0)


def path_depth(program: Program) -> int:
    """Longest chain of call-to-call data edges, counted in edges, over all paths."""
    return max(_path_depth(p.calls) for p in program.paths())


def binding_count(program: Program) -> int:
    """Distinct variables produced by one call and consumed by another, max over paths."""
    return max(len({name for _, _, name in _dependency_edges(p.calls)})
               for p in program.paths())


def api_call_count(program: Program) -> int:
    return len(program.calls)


def word_count(text: str | None) -> int:
    return len(text.split()) if text else 0


@dataclass
class ProgramStats:
    id: str
    api_call_count: int
    path_depth: int
    binding_count: int
    code_length_words: int
    instruction_length_words: int


@dataclass
class CorpusStats:
    programs: list[ProgramStats] = field(default_factory=list)

    def mean(self, key: str) -> float | None:
        vals = [getattr(p, key) for p in self.programs]
        return fmean(vals) if vals else None

    def summary(self) -> dict:
        keys = ("api_call_count", "path_depth", "binding_count", "code_length_words",
                "instruction_length_words")
        return {"count": len(self.programs), **{k: self.mean(k) for k in keys}}

    def to_json(self) -> dict:
        return {"summary": self.summary(), "programs": [asdict(p) for p in self.programs]}


def program_stats(pid: str, program: Program, instruction: str | None = None,
                  source: str | None = None) -> ProgramStats:
    return ProgramStats(
        pid, api_call_count(program), path_depth(program), binding_count(program),
        word_count(source or render_source(program)), word_count(instruction),
    )


def corpus_stats(entries) -> CorpusStats:
    return CorpusStats([program_stats(e.id, e.program, e.instruction, e.source)
                        for e in entries])
