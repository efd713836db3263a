from __future__ import annotations

import inspect
from dataclasses import dataclass, field
from typing import Any, Callable

from ..model import StateSchema, TransitionSpec


class BackendError(Exception):
    """Raised by a mock backend when a call cannot be served."""


class NotFound(BackendError):
    pass


class ShapeMismatch(BackendError):
    pass


class VoiceNotFound(BackendError):
    pass


class AudioNotFound(BackendError):
    pass


class BadArgument(BackendError):
    pass


class UnknownApi(BackendError):
    pass


class MockBackend:
    """In-process stand-in for a remote service.

    API methods are looked up by name on the instance; ``created`` logs every
    allocated id as ``(partition, id)`` in allocation order.
    """

    apis: tuple[str, ...] = ()

    def __init__(self, seed: int):
        self.seed = seed
        self.created: list[tuple[str, str]] = []
        self._counters: dict[str, int] = {}

    def allocate(self, partition: str, fmt: str) -> str:
        k = self._counters.get(partition, 0) + 1
        self._counters[partition] = k
        new_id = fmt.format(k=k)
        self.created.append((partition, new_id))
        return new_id

    def call(self, api: str, kwargs: dict[str, Any]) -> Any:
        if api not in self.apis:
            raise UnknownApi(f"unknown API {api!r}")
        fn = getattr(self, api)
        try:
            inspect.signature(fn).bind(**kwargs)
        except TypeError as exc:
            raise BadArgument(f"{api}: {exc}") from None
        return fn(**kwargs)

    def dump(self) -> dict:
        return {}


@dataclass
class ScenarioCatalog:
    name: str
    transitions: list[TransitionSpec]
    initializer: Callable[[int], StateSchema]
    backend_factory: Callable[[int], MockBackend]
    overview: str = ""
    predicted_dump: Callable[[StateSchema], dict] | None = None
    docs: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        names = [t.name for t in self.transitions]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate transition names in {self.name}")
        for t in self.transitions:
            self.docs.setdefault(t.name, t.doc)
        missing = [n for n in names if not self.docs.get(n)]
        if missing:
            raise ValueError(f"undocumented transitions: {missing}")

    @property
    def api_names(self) -> list[str]:
        return [t.name for t in self.transitions]

    def transition(self, name: str) -> TransitionSpec:
        for t in self.transitions:
            if t.name == name:
                return t
        raise KeyError(name)

    def documentation(self) -> str:
        lines = [f"# {self.name} APIs", self.overview.strip(), ""]
        for t in self.transitions:
            params = ", ".join(p.name for p in t.params)
            lines.append(f"{t.name}({params})")
            lines.extend("    " + ln for ln in self.docs[t.name].strip().splitlines())
            lines.append("")
        return "\n".join(lines).rstrip() + "\n"
