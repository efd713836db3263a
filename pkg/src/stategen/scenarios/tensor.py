"""Tensor operations: four shape manipulations plus linear and conv2d layers.

Layer weights are never stored: they are filled deterministically from
(shape, program seed), the way a seeded framework would initialize them.
"""

from __future__ import annotations

import itertools
import math
import random
from functools import lru_cache

import numpy as np

from ..model import ParamSlot, StateSchema, TransitionSpec, VarRef
from ..values import Tensor, TensorInit, counter_fill
from .base import BadArgument, MockBackend, ScenarioCatalog, ShapeMismatch

TENSOR = "tensor"
MAX_NUMEL = 4096
MAX_RANK = 4
OUT_FEATURES = range(1, 9)
OUT_CHANNELS = range(1, 5)
KERNELS = (1, 3)
STRIDES = (1, 2)
PADDINGS = (0, 1)


# -- kernels -----------------------------------------------------------------

def linear_weights(in_features: int, out_features: int, seed: int):
    w = counter_fill("linear.weight", (out_features, in_features), seed)
    b = counter_fill("linear.bias", (out_features,), seed)
    return w, b


def conv2d_weights(in_channels: int, out_channels: int, kernel: int, seed: int):
    w = counter_fill("conv2d.weight", (out_channels, in_channels, kernel, kernel), seed)
    b = counter_fill("conv2d.bias", (out_channels,), seed)
    return w, b


def conv_out(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def linear(x: np.ndarray, out_features: int, seed: int) -> np.ndarray:
    w, b = linear_weights(x.shape[-1], out_features, seed)
    return x @ w.T + b


def conv2d(x: np.ndarray, out_channels: int, kernel: int, stride: int, padding: int,
           seed: int) -> np.ndarray:
    n, c, h, w_ = x.shape
    weight, bias = conv2d_weights(c, out_channels, kernel, seed)
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    ho, wo = conv_out(h, kernel, stride, padding), conv_out(w_, kernel, stride, padding)
    out = np.zeros((n, out_channels, ho, wo))
    for i in range(kernel):
        for j in range(kernel):
            patch = xp[:, :, i:i + stride * ho:stride, j:j + stride * wo:stride]
            out += np.einsum("nchw,oc->nohw", patch, weight[:, :, i, j])
    return out + bias[None, :, None, None]


@lru_cache(maxsize=None)
def reshape_targets(numel: int) -> tuple[tuple[int, ...], ...]:
    """All shapes of rank 1..MAX_RANK whose element count is ``numel``."""
    divisors = [d for d in range(1, numel + 1) if numel % d == 0]

    def split(n, rank):
        if rank == 1:
            return [(n,)]
        return [(d,) + rest for d in divisors if n % d == 0 for rest in split(n // d, rank - 1)]

    out = []
    for rank in range(1, MAX_RANK + 1):
        out.extend(split(numel, rank))
    return tuple(out)


# -- transitions ---------------------------------------------------------------

def _tensors(schema):
    return schema.live(TENSOR)


def _add_tensor(schema, arr):
    schema.add("x", Tensor.from_array(arr), TENSOR)


class Reshape(TransitionSpec):
    name = "reshape"
    doc = "Return `input` reshaped to `shape` (same number of elements, row-major order)."
    params = (ParamSlot("input", "tensor", "state"),
              ParamSlot("shape", "list of positive ints with the same element count", "literal"))
    returns = TENSOR

    def candidates(self, schema):
        return [{"input": VarRef(v.id)} for v in _tensors(schema)]

    def sample_literals(self, schema, b, rng):
        t = schema[b["input"].id].value
        options = [s for s in reshape_targets(t.numel) if s != t.shape]
        return {"shape": rng.choice(options)}

    def effect(self, schema, b):
        t = schema[b["input"].id].value
        schema.add("x", Tensor(tuple(b["shape"]), t.data), TENSOR)


class Cat(TransitionSpec):
    name = "cat"
    doc = ("Concatenate tensors `a` and `b` along `dim`. Both must have the same rank "
           "and equal sizes in every other dimension.")
    params = (ParamSlot("a", "tensor", "state"), ParamSlot("b", "tensor", "state"),
              ParamSlot("dim", "int", "literal"))
    returns = TENSOR

    def candidates(self, schema):
        out = []
        ts = _tensors(schema)
        for x, y in itertools.permutations(ts, 2):
            sx, sy = x.value.shape, y.value.shape
            if len(sx) != len(sy):
                continue
            for d in range(len(sx)):
                if all(sx[i] == sy[i] for i in range(len(sx)) if i != d) and \
                        x.value.numel + y.value.numel <= MAX_NUMEL:
                    out.append({"a": VarRef(x.id), "b": VarRef(y.id), "dim": d})
        return out

    def effect(self, schema, b):
        a, c = schema[b["a"].id].value, schema[b["b"].id].value
        _add_tensor(schema, np.concatenate([a.array(), c.array()], axis=b["dim"]))


class Transpose(TransitionSpec):
    name = "transpose"
    doc = "Swap dimensions `dim0` and `dim1` of `input`."
    params = (ParamSlot("input", "tensor of rank >= 2", "state"),
              ParamSlot("dim0", "int", "literal"), ParamSlot("dim1", "int", "literal"))
    returns = TENSOR

    def candidates(self, schema):
        return [{"input": VarRef(v.id)} for v in _tensors(schema) if len(v.value.shape) >= 2]

    def sample_literals(self, schema, b, rng):
        rank = len(schema[b["input"].id].value.shape)
        d0, d1 = sorted(rng.sample(range(rank), 2))
        return {"dim0": d0, "dim1": d1}

    def effect(self, schema, b):
        t = schema[b["input"].id].value
        _add_tensor(schema, np.swapaxes(t.array(), b["dim0"], b["dim1"]))


class Unsqueeze(TransitionSpec):
    name = "unsqueeze"
    doc = "Insert a dimension of size 1 at position `dim` of `input`."
    params = (ParamSlot("input", f"tensor of rank < {MAX_RANK}", "state"),
              ParamSlot("dim", "int", "literal"))
    returns = TENSOR

    def candidates(self, schema):
        return [{"input": VarRef(v.id)} for v in _tensors(schema)
                if len(v.value.shape) < MAX_RANK]

    def sample_literals(self, schema, b, rng):
        rank = len(schema[b["input"].id].value.shape)
        return {"dim": rng.randint(0, rank)}

    def effect(self, schema, b):
        t = schema[b["input"].id].value
        _add_tensor(schema, np.expand_dims(t.array(), b["dim"]))


def _linear_outs(t: Tensor):
    rows = t.numel // t.shape[-1]
    return [o for o in OUT_FEATURES if rows * o <= MAX_NUMEL]


class Linear(TransitionSpec):
    name = "linear"
    doc = ("Apply a seeded fully connected layer mapping the last dimension of `input` "
           "to `out_features` (1..8): y = x W^T + b.")
    params = (ParamSlot("input", "tensor", "state"),
              ParamSlot("out_features", "int in 1..8", "literal"))
    returns = TENSOR

    def candidates(self, schema):
        return [{"input": VarRef(v.id)} for v in _tensors(schema) if _linear_outs(v.value)]

    def sample_literals(self, schema, b, rng):
        return {"out_features": rng.choice(_linear_outs(schema[b["input"].id].value))}

    def effect(self, schema, b):
        t = schema[b["input"].id].value
        _add_tensor(schema, linear(t.array(), b["out_features"], schema.seed))


def _conv_options(t: Tensor):
    if len(t.shape) != 4:
        return []
    n, _, h, w = t.shape
    out = []
    for k, s, p in itertools.product(KERNELS, STRIDES, PADDINGS):
        ho, wo = conv_out(h, k, s, p), conv_out(w, k, s, p)
        if ho < 1 or wo < 1:
            continue
        for oc in OUT_CHANNELS:
            if n * oc * ho * wo <= MAX_NUMEL:
                out.append({"out_channels": oc, "kernel_size": k, "stride": s, "padding": p})
    return out


class Conv2d(TransitionSpec):
    name = "conv2d"
    doc = ("Apply a seeded 2-D convolution to a 4-D `input` (N, C, H, W) with "
           "`out_channels` (1..4), square `kernel_size` (1 or 3), `stride` (1 or 2) and "
           "zero `padding` (0 or 1). Output size floor((H + 2p - k) / s) + 1.")
    params = (ParamSlot("input", "4-D tensor", "state"),
              ParamSlot("out_channels", "int in 1..4", "literal"),
              ParamSlot("kernel_size", "1 or 3", "literal"),
              ParamSlot("stride", "1 or 2", "literal"),
              ParamSlot("padding", "0 or 1", "literal"))
    returns = TENSOR

    def candidates(self, schema):
        return [{"input": VarRef(v.id)} for v in _tensors(schema) if _conv_options(v.value)]

    def sample_literals(self, schema, b, rng):
        return dict(rng.choice(_conv_options(schema[b["input"].id].value)))

    def effect(self, schema, b):
        t = schema[b["input"].id].value
        _add_tensor(schema, conv2d(t.array(), b["out_channels"], b["kernel_size"],
                                   b["stride"], b["padding"], schema.seed))


# -- initialization and backend ------------------------------------------------

def initializer(seed: int) -> StateSchema:
    rng = random.Random(f"tensor-init:{seed}")
    schema = StateSchema(seed=seed)
    for _ in range(rng.randint(2, 4)):
        rank = rng.randint(2, 4)
        shape = tuple(rng.randint(1, 8) for _ in range(rank))
        lit = TensorInit(shape, rng.getrandbits(31))
        schema.add("x", lit.value(), TENSOR, init_literal=lit)
    return schema


def _int(name, v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise BadArgument(f"{name} must be an int, got {v!r}")
    return v


def _tensor(name, v) -> np.ndarray:
    if not isinstance(v, Tensor):
        raise BadArgument(f"{name} must be a tensor, got {type(v).__name__}")
    return v.array()


def _dim(d, rank, extra=0):
    d = _int("dim", d)
    if not -(rank + extra) <= d < rank + extra:
        raise ShapeMismatch(f"dim {d} out of range for rank {rank}")
    return d % (rank + extra)


class TensorBackend(MockBackend):
    apis = ("reshape", "cat", "transpose", "unsqueeze", "linear", "conv2d")

    def reshape(self, input, shape):
        x = _tensor("input", input)
        if not isinstance(shape, (list, tuple)) or not shape:
            raise BadArgument("shape must be a non-empty list of ints")
        shape = tuple(_int("shape", d) for d in shape)
        if any(d < 1 for d in shape) or math.prod(shape) != x.size:
            raise ShapeMismatch(f"cannot reshape {x.shape} to {shape}")
        return Tensor.from_array(x.reshape(shape))

    def cat(self, a, b, dim):
        x, y = _tensor("a", a), _tensor("b", b)
        if x.ndim != y.ndim:
            raise ShapeMismatch(f"rank mismatch {x.shape} vs {y.shape}")
        d = _dim(dim, x.ndim)
        if any(x.shape[i] != y.shape[i] for i in range(x.ndim) if i != d):
            raise ShapeMismatch(f"cannot cat {x.shape} and {y.shape} along {d}")
        return Tensor.from_array(np.concatenate([x, y], axis=d))

    def transpose(self, input, dim0, dim1):
        x = _tensor("input", input)
        return Tensor.from_array(np.swapaxes(x, _dim(dim0, x.ndim), _dim(dim1, x.ndim)))

    def unsqueeze(self, input, dim):
        x = _tensor("input", input)
        return Tensor.from_array(np.expand_dims(x, _dim(dim, x.ndim, extra=1)))

    def linear(self, input, out_features):
        x = _tensor("input", input)
        if _int("out_features", out_features) not in OUT_FEATURES:
            raise BadArgument(f"out_features must be in 1..8, got {out_features}")
        return Tensor.from_array(linear(x, out_features, self.seed))

    def conv2d(self, input, out_channels, kernel_size, stride=1, padding=0):
        x = _tensor("input", input)
        if x.ndim != 4:
            raise ShapeMismatch(f"conv2d expects a 4-D input, got {x.shape}")
        oc, k = _int("out_channels", out_channels), _int("kernel_size", kernel_size)
        s, p = _int("stride", stride), _int("padding", padding)
        if oc not in OUT_CHANNELS or k not in KERNELS or s not in STRIDES or p not in PADDINGS:
            raise BadArgument("conv2d parameter out of range")
        if conv_out(x.shape[2], k, s, p) < 1 or conv_out(x.shape[3], k, s, p) < 1:
            raise ShapeMismatch(f"kernel {k} too large for input {x.shape}")
        return Tensor.from_array(conv2d(x, oc, k, s, p, self.seed))


def predicted_dump(schema: StateSchema, resolve: dict) -> dict:
    return {}


def build_tensor_scenario() -> ScenarioCatalog:
    return ScenarioCatalog(
        name="tensor",
        transitions=[Reshape(), Cat(), Transpose(), Unsqueeze(), Linear(), Conv2d()],
        initializer=initializer,
        backend_factory=TensorBackend,
        overview=("PyTorch-style tensor operations. Inputs are seeded float tensors; "
                  "`linear` and `conv2d` use weights initialized from the program seed, so "
                  "results are deterministic. Shapes must agree exactly."),
        predicted_dump=predicted_dump,
    )
