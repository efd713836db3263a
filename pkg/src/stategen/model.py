"""State schema, transitions and their application.

A schema is the live set of state variables a trace has produced so far,
including hidden mirrors of remote backend items.  Transitions model one API
call each: they enumerate applicable bindings against a schema and apply a
deterministic effect to a copy of it.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

INIT = "INIT"


class StateGenError(Exception):
    pass


class EmptyCandidateSet(StateGenError):
    pass


class StaleBinding(StateGenError):
    pass


class UnknownVar(StateGenError, KeyError):
    pass


class DeadEnd(StateGenError):
    pass


@dataclass(frozen=True)
class VarRef:
    """A binding that points at a state variable by id."""

    id: int

    def to_json(self):
        return {"ref": self.id}


@dataclass
class StateVar:
    id: int
    name: str
    value: Any
    kind: str
    producer: int | None = None  # None means produced by initialization
    live: bool = True
    remote: bool = False
    written_by: str = INIT  # transition that most recently affected the value
    written_at: int | None = None
    init_literal: Any = None  # IR literal for init vars whose value has no literal form

    @property
    def is_init(self) -> bool:
        return self.producer is None


@dataclass
class StateSchema:
    vars: dict[int, StateVar] = field(default_factory=dict)
    next_id: int = 0
    step: int = 0
    seed: int = 0
    counters: dict[str, int] = field(default_factory=dict)

    def copy(self) -> "StateSchema":
        return copy.deepcopy(self)

    def add(self, prefix: str, value: Any, kind: str, *, remote: bool = False,
            init_literal: Any = None) -> StateVar:
        vid = self.next_id
        self.next_id += 1
        if self.step == 0:
            producer, writer, at = None, INIT, None
        else:
            producer, writer, at = self.step, self._current, self.step
        var = StateVar(vid, f"{prefix}{vid}", value, kind, producer=producer,
                       remote=remote, written_by=writer, written_at=at,
                       init_literal=init_literal)
        self.vars[vid] = var
        return var

    def write(self, vid: int, value: Any) -> None:
        var = self[vid]
        var.value = value
        var.written_by = self._current
        var.written_at = self.step

    def kill(self, vid: int) -> None:
        self[vid].live = False

    def next_ordinal(self, partition: str) -> int:
        self.counters[partition] = self.counters.get(partition, 0) + 1
        return self.counters[partition]

    def __getitem__(self, vid: int) -> StateVar:
        try:
            return self.vars[vid]
        except KeyError:
            raise UnknownVar(vid) from None

    def __iter__(self) -> Iterator[StateVar]:
        return iter(self.vars.values())

    def live(self, kind: str | Sequence[str] | None = None, *, remote: bool = False):
        kinds = (kind,) if isinstance(kind, str) else kind
        return [v for v in self.vars.values()
                if v.live and v.remote == remote and (kinds is None or v.kind in kinds)]

    def by_name(self, name: str) -> StateVar:
        for v in self.vars.values():
            if v.name == name and not v.remote:
                return v
        raise UnknownVar(name)

    # name of the transition currently being applied; set by apply_transition
    _current: str = INIT


@dataclass(frozen=True)
class ParamSlot:
    name: str
    domain: str
    binding: str  # "state" or "literal"


class TransitionSpec:
    """One API call.

    Subclasses enumerate ``candidates`` (state references plus literals that
    decide validity), draw the remaining literals in ``sample_literals`` and
    implement ``effect`` on a private copy of the schema.
    """

    name: str = ""
    doc: str = ""
    params: tuple[ParamSlot, ...] = ()
    returns: str | None = None

    def candidates(self, schema: StateSchema) -> list[dict]:
        raise NotImplementedError

    def sample_literals(self, schema: StateSchema, bindings: dict, rng) -> dict:
        return {}

    def effect(self, schema: StateSchema, bindings: dict) -> None:
        raise NotImplementedError

    def reads(self, schema: StateSchema, bindings: dict) -> list[int]:
        """State variables whose values this call consumes."""
        return [b.id for b in bindings.values() if isinstance(b, VarRef)]

    def applicable(self, schema: StateSchema, trace=None) -> bool:
        return bool(self.candidates(schema))

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def valid_transitions(schema: StateSchema, trace, catalog: Sequence[TransitionSpec]):
    if not catalog:
        raise ValueError("catalog is empty")
    out = []
    for spec in catalog:
        for bindings in spec.candidates(schema):
            out.append((spec, bindings))
    if not out:
        raise EmptyCandidateSet(f"no transition applies at step {schema.step + 1}")
    return out


def apply_transition(schema: StateSchema, spec: TransitionSpec, bindings: dict) -> StateSchema:
    for b in bindings.values():
        if isinstance(b, VarRef):
            var = schema[b.id]
            if not var.live:
                raise StaleBinding(f"{spec.name}: {var.name} is no longer live")
    new = schema.copy()
    new.step += 1
    new._current = spec.name
    spec.effect(new, bindings)
    new._current = INIT
    return new


def produced_ids(before: StateSchema, after: StateSchema) -> tuple[int, ...]:
    return tuple(i for i in range(before.next_id, after.next_id) if not after[i].remote)


def ending_state(schema: StateSchema, var_id: int) -> Any:
    return schema[var_id].value
