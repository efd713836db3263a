from .base import (AudioNotFound, BackendError, BadArgument, MockBackend, NotFound,
                   ScenarioCatalog, ShapeMismatch, UnknownApi, VoiceNotFound)
from .mcp import build_mcp_scenario
from .session import build_session_scenario
from .tensor import build_tensor_scenario

BUILDERS = {
    "session": build_session_scenario,
    "tensor": build_tensor_scenario,
    "mcp": build_mcp_scenario,
}
SCENARIO_NAMES = tuple(BUILDERS)

_cache: dict[str, ScenarioCatalog] = {}


def get_scenario(name: str) -> ScenarioCatalog:
    if name not in BUILDERS:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(BUILDERS)}")
    if name not in _cache:
        _cache[name] = BUILDERS[name]()
    return _cache[name]


__all__ = [
    "AudioNotFound", "BackendError", "BadArgument", "MockBackend", "NotFound",
    "ScenarioCatalog", "ShapeMismatch", "UnknownApi", "VoiceNotFound",
    "build_mcp_scenario", "build_session_scenario", "build_tensor_scenario",
    "get_scenario", "SCENARIO_NAMES",
]
