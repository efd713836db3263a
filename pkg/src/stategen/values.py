"""Runtime values shared by the generator, the interpreter and the corpus format.

Scalars, text, records and lists are plain Python objects (``int``, ``float``,
``str``, ``bool``, ``dict``, ``list``).  Two extra types exist: :class:`Tensor`
for dense float arrays and :class:`AbstractHandle` for remote ids that are only
known once a backend has assigned them.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

FLOAT_TOL = 1e-6
FLOAT_DIGITS = 9


@dataclass(frozen=True)
class Tensor:
    shape: tuple[int, ...]
    data: tuple[float, ...]

    def __post_init__(self):
        if any(d < 1 for d in self.shape):
            raise ValueError(f"tensor dims must be positive, got {self.shape}")
        if len(self.data) != math.prod(self.shape):
            raise ValueError(
                f"payload length {len(self.data)} does not match shape {self.shape}"
            )

    @classmethod
    def from_array(cls, arr) -> "Tensor":
        arr = np.asarray(arr, dtype=np.float64)
        return cls(tuple(int(d) for d in arr.shape), tuple(float(x) for x in arr.ravel()))

    def array(self) -> np.ndarray:
        return np.asarray(self.data, dtype=np.float64).reshape(self.shape)

    @property
    def numel(self) -> int:
        return len(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.shape})"


@dataclass(frozen=True)
class AbstractHandle:
    """Id of a remote item created at generation time, resolved after execution.

    ``partition`` groups items whose backend ids are allocated by one counter;
    ``ordinal`` is the 1-based creation index inside that partition.
    """

    partition: str
    ordinal: int

    @property
    def key(self) -> str:
        return f"{self.partition}#{self.ordinal}"


@dataclass(frozen=True)
class TensorInit:
    """Literal form of a seeded input tensor: ``tensor([2, 3], seed=17)``."""

    shape: tuple[int, ...]
    seed: int

    def value(self) -> Tensor:
        return seeded_tensor(self.shape, self.seed)


def _philox_key(*parts) -> int:
    digest = hashlib.sha256(repr(parts).encode()).digest()
    return int.from_bytes(digest[:16], "little")


def counter_fill(tag: str, shape, seed: int) -> np.ndarray:
    """Deterministic uniform [-1, 1) fill keyed by (tag, shape, seed)."""
    shape = tuple(int(d) for d in shape)
    gen = np.random.Generator(np.random.Philox(key=_philox_key(tag, shape, int(seed))))
    return gen.uniform(-1.0, 1.0, size=shape)


def seeded_tensor(shape, seed: int) -> Tensor:
    return Tensor.from_array(counter_fill("input", shape, seed))


def values_equal(expected: Any, actual: Any, tol: float = FLOAT_TOL,
                 resolve: Mapping[str, str] | None = None) -> bool:
    """Structural equality with float tolerance and handle resolution.

    An :class:`AbstractHandle` on the expected side only matches the concrete
    id it resolves to; without a resolution map it matches the same handle.
    """
    if isinstance(expected, AbstractHandle):
        if isinstance(actual, AbstractHandle):
            return expected == actual
        if resolve is None or expected.key not in resolve:
            return False
        return resolve[expected.key] == actual
    if isinstance(expected, bool) or isinstance(actual, bool):
        return type(expected) is type(actual) and expected == actual
    if isinstance(expected, (int, float)) and isinstance(actual, (int, float)):
        if isinstance(expected, int) and isinstance(actual, int):
            return expected == actual
        return abs(float(expected) - float(actual)) <= tol
    if isinstance(expected, str) or isinstance(actual, str):
        return expected == actual
    if isinstance(expected, Tensor):
        if not isinstance(actual, Tensor) or expected.shape != actual.shape:
            return False
        return all(abs(a - b) <= tol for a, b in zip(expected.data, actual.data))
    if isinstance(expected, Mapping):
        if not isinstance(actual, Mapping) or set(expected) != set(actual):
            return False
        return all(values_equal(expected[k], actual[k], tol, resolve) for k in expected)
    if isinstance(expected, (list, tuple)):
        if not isinstance(actual, (list, tuple)) or len(expected) != len(actual):
            return False
        return all(values_equal(e, a, tol, resolve) for e, a in zip(expected, actual))
    return expected == actual


def type_name(value: Any) -> str:
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "float"
    if isinstance(value, str):
        return "text"
    if isinstance(value, Tensor):
        return "tensor"
    if isinstance(value, AbstractHandle):
        return "handle"
    if isinstance(value, Mapping):
        return "record"
    if isinstance(value, (list, tuple)):
        return "list"
    return type(value).__name__


def round_float(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError(f"non-finite float {x!r} cannot be serialized")
    return float(format(x, f".{FLOAT_DIGITS}g"))


def to_jsonable(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return round_float(value)
    if isinstance(value, Tensor):
        return {"__tensor__": {"shape": list(value.shape),
                               "data": [round_float(x) for x in value.data]}}
    if isinstance(value, TensorInit):
        return {"__tensor_init__": {"shape": list(value.shape), "seed": value.seed}}
    if isinstance(value, AbstractHandle):
        return {"__handle__": value.key}
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "to_json"):
        return value.to_json()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def from_jsonable(obj: Any, *, frozen: bool = False) -> Any:
    """Inverse of :func:`to_jsonable`.  ``frozen`` turns lists into tuples (IR literals)."""
    if isinstance(obj, dict):
        if set(obj) == {"__tensor__"}:
            t = obj["__tensor__"]
            return Tensor(tuple(t["shape"]), tuple(float(x) for x in t["data"]))
        if set(obj) == {"__tensor_init__"}:
            t = obj["__tensor_init__"]
            return TensorInit(tuple(t["shape"]), int(t["seed"]))
        if set(obj) == {"__handle__"}:
            partition, _, ordinal = obj["__handle__"].rpartition("#")
            return AbstractHandle(partition, int(ordinal))
        return {k: from_jsonable(v, frozen=frozen) for k, v in obj.items()}
    if isinstance(obj, list):
        items = [from_jsonable(v, frozen=frozen) for v in obj]
        return tuple(items) if frozen else items
    return obj


def canonical_dumps(obj: Any, indent: int | None = None) -> str:
    """Sorted-key JSON with floats at 9 significant digits."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=indent,
                      separators=(",", ":") if indent is None else (",", ": "),
                      ensure_ascii=False)


def literal_to_value(lit: Any) -> Any:
    """IR literal (tuples, TensorInit) to runtime value (lists, Tensor)."""
    if isinstance(lit, TensorInit):
        return lit.value()
    if isinstance(lit, tuple):
        return [literal_to_value(x) for x in lit]
    if isinstance(lit, Mapping):
        return {k: literal_to_value(v) for k, v in lit.items()}
    return lit


def value_to_literal(value: Any) -> Any:
    """Runtime value to IR literal; lists become tuples."""
    if isinstance(value, (list, tuple)):
        return tuple(value_to_literal(x) for x in value)
    if isinstance(value, Mapping):
        return {k: value_to_literal(v) for k, v in value.items()}
    if isinstance(value, (Tensor, AbstractHandle)):
        raise TypeError(f"{type_name(value)} values have no literal form")
    return value


def stable_hash(obj: Any) -> str:
    return hashlib.sha1(canonical_dumps(obj).encode()).hexdigest()[:16]


def resolve_handles(value: Any, resolve: Mapping[str, str]) -> Any:
    """Replace abstract handles by their resolved ids where known."""
    if isinstance(value, AbstractHandle):
        return resolve.get(value.key, value)
    if isinstance(value, Mapping):
        return {k: resolve_handles(v, resolve) for k, v in value.items()}
    if isinstance(value, list):
        return [resolve_handles(v, resolve) for v in value]
    return value
