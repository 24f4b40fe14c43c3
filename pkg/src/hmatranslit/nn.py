"""Small differentiable toolkit: parameter storage, GRU/affine/softmax ops, Adam, gradcheck.

All parameters of a model live in one flat float64 buffer; each named tensor is
a reshaped view into it, and likewise for its gradient and Adam moments. This
keeps the optimizer a single vectorized update.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np

from . import kernels

FORMAT_MAGIC = b"HMATRANSLIT\n"
FORMAT_VERSION = 1


class NonFiniteError(FloatingPointError):
    """A NaN or Inf appeared in a forward or backward pass."""


@dataclass
class ParamTensor:
    name: str
    values: np.ndarray
    grad: np.ndarray
    adam_m: np.ndarray
    adam_v: np.ndarray

    @property
    def shape(self):
        return self.values.shape


class ParamSet:
    """Named tensors backed by shared flat buffers."""

    def __init__(self, shapes: Mapping[str, tuple]):
        self.shapes = {name: tuple(int(s) for s in shape) for name, shape in shapes.items()}
        total = sum(int(np.prod(s)) for s in self.shapes.values())
        self.theta = np.zeros(total)
        self.grad = np.zeros(total)
        self.m = np.zeros(total)
        self.v = np.zeros(total)
        self.step_count = 0
        self.tensors: dict[str, ParamTensor] = {}
        offset = 0
        for name, shape in self.shapes.items():
            size = int(np.prod(shape))
            sl = slice(offset, offset + size)
            self.tensors[name] = ParamTensor(
                name,
                self.theta[sl].reshape(shape),
                self.grad[sl].reshape(shape),
                self.m[sl].reshape(shape),
                self.v[sl].reshape(shape),
            )
            offset += size

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name].values

    def g(self, name: str) -> np.ndarray:
        return self.tensors[name].grad

    def __iter__(self):
        return iter(self.tensors.values())

    def __len__(self):
        return self.theta.size

    def zero_grad(self) -> None:
        self.grad[:] = 0.0

    def init_uniform(self, rng: np.random.Generator, scale: float = 0.1) -> None:
        self.theta[:] = rng.uniform(-scale, scale, self.theta.size)

    def copy(self) -> "ParamSet":
        other = ParamSet(self.shapes)
        other.theta[:] = self.theta
        return other

    def assert_finite(self, what: str = "parameters") -> None:
        if not np.isfinite(self.theta).all():
            raise NonFiniteError(f"non-finite value in {what}")
        if not np.isfinite(self.grad).all():
            raise NonFiniteError(f"non-finite gradient in {what}")


@dataclass
class GruWeights:
    Wx: np.ndarray
    Wh: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        h3, _ = self.Wx.shape
        if h3 % 3 or self.Wh.shape != (h3, h3 // 3) or self.b.shape != (h3,):
            raise ValueError(
                f"inconsistent GRU shapes Wx{self.Wx.shape} Wh{self.Wh.shape} b{self.b.shape}"
            )

    @property
    def input_size(self) -> int:
        return self.Wx.shape[1]

    @property
    def hidden_size(self) -> int:
        return self.Wh.shape[1]

    @classmethod
    def from_params(cls, params: ParamSet, prefix: str) -> "GruWeights":
        return cls(params[prefix + ".Wx"], params[prefix + ".Wh"], params[prefix + ".b"])


def gru_shapes(prefix: str, d_in: int, k: int) -> dict:
    return {prefix + ".Wx": (3 * k, d_in), prefix + ".Wh": (3 * k, k), prefix + ".b": (3 * k,)}


# --- single ops ------------------------------------------------------------------


def embed(table: np.ndarray, idx: int) -> np.ndarray:
    if not 0 <= idx < table.shape[0]:
        raise IndexError(f"embedding id {idx} out of range [0, {table.shape[0]})")
    return table[idx].copy()


def gru_step(w: GruWeights, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    if x.shape != (w.input_size,) or h.shape != (w.hidden_size,):
        raise ValueError(
            f"shape mismatch: input {x.shape}, hidden {h.shape} for GRU "
            f"({w.input_size} -> {w.hidden_size})"
        )
    h_new, _, _, _ = kernels.gru_forward(w.Wx, w.Wh, w.b, np.asarray(x, float), np.asarray(h, float))
    return h_new


def affine(weight: np.ndarray, bias: np.ndarray, x: np.ndarray) -> np.ndarray:
    if weight.shape[1] != x.shape[0] or bias.shape[0] != weight.shape[0]:
        raise ValueError(f"shape mismatch: W{weight.shape} b{bias.shape} x{x.shape}")
    return weight @ x + bias


def log_softmax(logits: np.ndarray) -> np.ndarray:
    return kernels.log_softmax(np.asarray(logits, dtype=np.float64))


def nll_loss(logp: np.ndarray, gold: int) -> float:
    if not 0 <= gold < logp.shape[0]:
        raise IndexError(f"gold id {gold} out of range")
    return float(-logp[gold])


# --- optimizer -------------------------------------------------------------------


class Adam:
    def __init__(self, params: ParamSet, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps

    def step(self) -> None:
        p = self.params
        p.step_count += 1
        kernels.adam_update(p.theta, p.grad, p.m, p.v, float(p.step_count),
                            self.lr, self.beta1, self.beta2, self.eps)


def adam_step(params: ParamSet, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8) -> None:
    Adam(params, lr, beta1, beta2, eps).step()


# --- gradient checking -------------------------------------------------------------


def gradcheck(
    loss_fn: Callable[[], float],
    params: Mapping[str, np.ndarray],
    analytic: Mapping[str, np.ndarray],
    coords_per_tensor: int = 50,
    h: float = 1e-4,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Max relative error between ``analytic`` gradients and central differences.

    ``params`` are perturbed in place (and restored); ``loss_fn`` must read them.
    Relative error is ``|ga - gfd| / max(1e-8, |ga| + |gfd|)``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for name, arr in params.items():
        flat = arr.reshape(-1)
        if arr.size and not np.shares_memory(flat, arr):
            raise ValueError(f"{name} must be a contiguous array")
        ga_flat = np.asarray(analytic[name]).reshape(-1)
        n = flat.size
        coords = np.arange(n) if n <= coords_per_tensor else rng.choice(n, coords_per_tensor, replace=False)
        for i in coords:
            orig = flat[i]
            flat[i] = orig + h
            up = loss_fn()
            flat[i] = orig - h
            down = loss_fn()
            flat[i] = orig
            fd = (up - down) / (2 * h)
            ga = ga_flat[i]
            err = abs(ga - fd) / max(1e-8, abs(ga) + abs(fd))
            worst = max(worst, err)
    return worst


# --- serialization -------------------------------------------------------------------


def save_params(path, header: dict, params: ParamSet) -> None:
    """Versioned flat file: magic, JSON header line, then float64 LE tensors."""
    header = dict(header)
    header["format_version"] = FORMAT_VERSION
    header["tensors"] = [[name, list(shape)] for name, shape in params.shapes.items()]
    blob = json.dumps(header, sort_keys=True, ensure_ascii=True).encode("ascii")
    with open(path, "wb") as fh:
        fh.write(FORMAT_MAGIC)
        fh.write(blob + b"\n")
        fh.write(struct.pack("<Q", params.theta.size))
        fh.write(params.theta.astype("<f8").tobytes())


def load_params(path) -> tuple[dict, ParamSet]:
    with open(path, "rb") as fh:
        if fh.readline() != FORMAT_MAGIC:
            raise ValueError(f"{path}: not a model file")
        header = json.loads(fh.readline().decode("ascii"))
        if header.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {header.get('format_version')}")
        (count,) = struct.unpack("<Q", fh.read(8))
        data = np.frombuffer(fh.read(), dtype="<f8")
    shapes = {name: tuple(shape) for name, shape in header.pop("tensors")}
    params = ParamSet(shapes)
    if count != params.theta.size or data.size != count:
        raise ValueError(f"{path}: tensor data size {data.size} does not match header ({params.theta.size})")
    params.theta[:] = data
    return header, params
