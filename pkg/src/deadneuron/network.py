"""Fully connected ReLU networks: parameters, sampling and layer maps."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import linear_core as lc
from .arrangement import CoorientedArrangement, bounded_region, code_str, iter_codes
from .errors import DegenerateRow, DimensionMismatch, NotGeneric, WrongWidth

MAX_RETRIES = 100


@dataclass(frozen=True)
class Architecture:
    sizes: tuple

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if len(self.sizes) < 2 or any(s < 1 for s in self.sizes):
            raise ValueError(f"bad architecture {self.sizes}")

    @property
    def depth(self) -> int:
        return len(self.sizes) - 1

    @property
    def param_count(self) -> int:
        return sum(b * (a + 1) for a, b in zip(self.sizes, self.sizes[1:]))


@dataclass(frozen=True)
class Distribution:
    """Symmetric scalar law: ``uniform`` (halfwidth), ``normal`` (stddev) or
    ``he_uniform`` (halfwidth ``sqrt(6 / fan_in)``; ``scale`` fixes the fan-in,
    ``None`` means the layer's own fan-in)."""

    kind: str
    scale: float | None = 1.0

    def __post_init__(self):
        if self.kind not in ("uniform", "normal", "he_uniform"):
            raise ValueError(f"unknown distribution {self.kind!r}")
        if self.scale is not None and not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.scale is None and self.kind != "he_uniform":
            raise ValueError("scale required")

    @classmethod
    def parse(cls, text: str) -> "Distribution":
        """``uniform``, ``uniform:0.5``, ``normal:2``, ``he`` or ``he:3``."""
        kind, _, arg = text.partition(":")
        kind = {"he": "he_uniform"}.get(kind, kind)
        if kind == "he_uniform":
            return cls(kind, float(arg) if arg else None)
        return cls(kind, float(arg) if arg else 1.0)

    def __str__(self):
        return f"{self.kind}:{self.scale:g}" if self.scale is not None else self.kind

    def halfwidth(self, fan_in: int) -> float:
        if self.kind == "uniform":
            return self.scale
        return math.sqrt(6.0 / (self.scale if self.scale is not None else fan_in))

    def sample(self, rng: np.random.Generator, shape, fan_in: int = 1) -> np.ndarray:
        if self.kind == "normal":
            return rng.normal(0.0, self.scale, size=shape)
        h = self.halfwidth(fan_in)
        return rng.uniform(-h, h, size=shape)


@dataclass(frozen=True)
class NetworkParams:
    weights: tuple
    biases: tuple
    rejections: int = field(default=0, compare=False)

    def __post_init__(self):
        ws = tuple(np.array(w, dtype=float, ndmin=2) for w in self.weights)
        bs = tuple(np.array(b, dtype=float, ndmin=1) for b in self.biases)
        if len(ws) != len(bs) or not ws:
            raise DimensionMismatch("need one bias per weight matrix")
        for i, (w, b) in enumerate(zip(ws, bs)):
            if w.shape[0] != b.shape[0]:
                raise DimensionMismatch(f"layer {i + 1}: bias length {b.shape[0]} != rows {w.shape[0]}")
            if i and w.shape[1] != ws[i - 1].shape[0]:
                raise DimensionMismatch(f"layer {i + 1}: expects {w.shape[1]} inputs, got {ws[i - 1].shape[0]}")
            w.flags.writeable = False
            b.flags.writeable = False
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    def __eq__(self, other):
        if not isinstance(other, NetworkParams):
            return NotImplemented
        return len(self.weights) == len(other.weights) and all(
            np.array_equal(a, b) for a, b in zip(self.weights + self.biases, other.weights + other.biases))

    __hash__ = None

    @property
    def arch(self) -> Architecture:
        return Architecture((self.weights[0].shape[1],) + tuple(w.shape[0] for w in self.weights))

    @property
    def layers(self) -> list:
        return [lc.AffineMap.from_arrays(w, b) for w, b in zip(self.weights, self.biases)]

    def flat(self) -> np.ndarray:
        return np.concatenate([np.concatenate([w, b[:, None]], axis=1).ravel()
                               for w, b in zip(self.weights, self.biases)])

    def with_flat(self, theta) -> "NetworkParams":
        theta = np.asarray(theta, dtype=float)
        ws, bs, k = [], [], 0
        for w in self.weights:
            r, c = w.shape
            block = theta[k:k + r * (c + 1)].reshape(r, c + 1)
            ws.append(block[:, :c])
            bs.append(block[:, c])
            k += r * (c + 1)
        return NetworkParams(tuple(ws), tuple(bs))

    def to_record(self) -> dict:
        return {"arch": list(self.arch.sizes),
                "layers": [{"W": w.tolist(), "b": b.tolist()} for w, b in zip(self.weights, self.biases)]}

    @classmethod
    def from_record(cls, rec: dict) -> "NetworkParams":
        params = cls(tuple(layer["W"] for layer in rec["layers"]),
                     tuple(layer["b"] for layer in rec["layers"]))
        if "arch" in rec and list(params.arch.sizes) != list(rec["arch"]):
            raise DimensionMismatch(f"arch {rec['arch']} does not match layer shapes {params.arch.sizes}")
        return params

    def to_json(self) -> str:
        return json.dumps(self.to_record())

    @classmethod
    def from_json(cls, text: str) -> "NetworkParams":
        return cls.from_record(json.loads(text))


# --- genericity on arrays -----------------------------------------------------

def generic_rows(W: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """Numpy genericity check for the arrangement ``{W x + b = 0}``.

    Every ``min(m, n)`` rows of ``W`` must be independent and, when ``m > n``,
    no ``n + 1`` hyperplanes may share a point.  Rows are scaled to unit
    length so the determinant thresholds are scale free.
    """
    m, n = W.shape
    norms = np.linalg.norm(W, axis=1)
    if np.any(norms <= tol) or np.any(np.abs(b) <= tol):
        return False
    A = np.concatenate([W, b[:, None]], axis=1) / norms[:, None]
    k = min(m, n)
    subs = np.array(list(combinations(range(m), k)))
    blocks = A[subs][:, :, :n]
    if k == n:
        if np.any(np.abs(np.linalg.det(blocks)) <= tol):
            return False
    elif np.any(np.linalg.svd(blocks, compute_uv=False)[:, -1] <= tol):
        return False
    if m > n:
        subs = np.array(list(combinations(range(m), n + 1)))
        aug = A[subs]
        scale = np.linalg.norm(aug, axis=2).prod(axis=1)
        if np.any(np.abs(np.linalg.det(aug)) <= tol * scale):
            return False
    return True


def _degenerate_layer(w, b):
    return bool(np.any(np.linalg.norm(w, axis=1) <= lc.EPS) or np.any(np.abs(b) <= lc.EPS))


def sample_params(arch: Architecture, dist: Distribution, seed: int,
                  max_retries: int = MAX_RETRIES) -> NetworkParams:
    """I.i.d. parameters; layer ``l`` draws from its own child stream.

    Degenerate draws (zero row, zero bias, non-generic first layer) are
    redrawn from the same stream; the number of redraws is kept in
    ``rejections``.
    """
    if isinstance(arch, (tuple, list)):
        arch = Architecture(arch)
    children = np.random.SeedSequence(seed).spawn(arch.depth)
    ws, bs, rejected = [], [], 0
    for ell, (fan_in, width) in enumerate(zip(arch.sizes, arch.sizes[1:])):
        rng = np.random.default_rng(children[ell])
        for attempt in range(max_retries + 1):
            w = dist.sample(rng, (width, fan_in), fan_in)
            b = dist.sample(rng, (width,), fan_in)
            bad = _degenerate_layer(w, b) or (ell == 0 and not generic_rows(w, b))
            if not bad:
                break
            rejected += 1
        else:
            raise NotGeneric(f"layer {ell + 1}: no valid draw in {max_retries} retries")
        ws.append(w)
        bs.append(b)
    return NetworkParams(tuple(ws), tuple(bs), rejected)


def sample_batch(n0: int, n1: int, dist: Distribution, count: int, rng: np.random.Generator):
    """``count`` two-layer draws for a single second-layer neuron, as arrays.

    Returns ``(W1, b1, w, b)`` with shapes ``(N, n1, n0)``, ``(N, n1)``,
    ``(N, n1)``, ``(N,)``.  No degeneracy screening; callers handle the
    (measure-zero) bad rows.
    """
    W1 = dist.sample(rng, (count, n1, n0), n0)
    b1 = dist.sample(rng, (count, n1), n0)
    w = dist.sample(rng, (count, n1), n1)
    b = dist.sample(rng, (count,), n1)
    return W1, b1, w, b


# --- maps -----------------------------------------------------------------------

def relu(v):
    return np.maximum(v, 0.0)


def layer_map(params: NetworkParams, ell: int, x) -> np.ndarray:
    """Layer ``ell`` (1-based): ReLU of the affine map, affine only at the last layer."""
    if not 1 <= ell <= len(params.weights):
        raise ValueError(f"layer {ell} out of range")
    W, b = params.weights[ell - 1], params.biases[ell - 1]
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != W.shape[1]:
        raise DimensionMismatch(f"expected input length {W.shape[1]}, got {x.shape[-1]}")
    z = x @ W.T + b
    return z if ell == len(params.weights) else relu(z)


def forward(params: NetworkParams, x) -> np.ndarray:
    for ell in range(1, len(params.weights) + 1):
        x = layer_map(params, ell, x)
    return x


def first_layer_arrangement(params: NetworkParams) -> CoorientedArrangement:
    W, b = params.weights[0], params.biases[0]
    bad = np.flatnonzero(np.linalg.norm(W, axis=1) <= lc.EPS)
    if bad.size:
        raise DegenerateRow(f"first-layer row {int(bad[0])} is (near) zero")
    return CoorientedArrangement.from_arrays(W, b)


# --- configurations (first layer one wider than the input) ---------------------

def configuration_codes(n0: int) -> list:
    """Codewords in configuration order for ``n1 = n0 + 1``."""
    m = n0 + 1
    plus = (1,) * m
    first = [plus]
    first += [tuple(-1 if j == i else 1 for j in range(m)) for i in range(m)]
    first += [tuple(1 if j == i else -1 for j in range(m)) for i in range(m)]
    # With two hyperplanes the one-positive codes repeat the one-negative ones.
    first = list(dict.fromkeys(first))
    seen = set(first)
    rest = [c for c in iter_codes(m) if c not in seen]
    return first + sorted(rest)


def code_to_index(code) -> int:
    code = tuple(code)
    m = len(code)
    neg = [j for j, s in enumerate(code) if s < 0]
    if not neg:
        return 0
    if len(neg) == 1:
        return neg[0] + 1
    if len(neg) == m - 1:
        return [j for j, s in enumerate(code) if s > 0][0] + m + 1
    return configuration_codes(m - 1).index(code)


def index_to_code(index: int, n0: int) -> tuple:
    codes = configuration_codes(n0)
    if not 0 <= index < len(codes):
        raise ValueError(f"index {index} out of range for n0={n0}")
    return codes[index]


def configuration_index(params: NetworkParams) -> int:
    n0, n1 = params.arch.sizes[0], params.arch.sizes[1]
    if n1 != n0 + 1:
        raise WrongWidth(f"configuration index needs n1 = n0 + 1, got ({n0}, {n1})")
    W, b = params.weights[0], params.biases[0]
    if not generic_rows(W, b):
        raise NotGeneric("first-layer arrangement is not generic")
    info = bounded_region(first_layer_arrangement(params))
    return code_to_index(info.codeword)


def configuration_index_batch(W1: np.ndarray, b1: np.ndarray) -> np.ndarray:
    """Vectorised configuration index: the bounded simplex's code is the sign
    pattern at the centroid of its vertices."""
    N, m, n = W1.shape
    if m != n + 1:
        raise WrongWidth(f"configuration index needs n1 = n0 + 1, got ({n}, {m})")
    centroid = np.zeros((N, n))
    for i in range(m):
        idx = [j for j in range(m) if j != i]
        centroid += np.linalg.solve(W1[:, idx, :], -b1[:, idx, None])[..., 0]
    centroid /= m
    signs = np.where(np.einsum("nij,nj->ni", W1, centroid) + b1 > 0, 1, -1)
    table = {c: k for k, c in enumerate(configuration_codes(n))}
    return np.array([table[tuple(r)] for r in signs.tolist()], dtype=np.int64)


def describe_index(index: int, n0: int) -> str:
    return f"C{index} {code_str(index_to_code(index, n0))}"
