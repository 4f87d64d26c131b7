"""Deciding whether a second-layer neuron can never activate.

Three deciders live here:

* :func:`is_stably_unactivated_exact` maximises the neuron's pre-activation
  over the closure of every region of the first-layer arrangement (one LP per
  region).  Closures cover the input space and the pre-activation is affine on
  each, so the maximum of the region optima is the global supremum.
* :func:`sup_preactivation_batch` computes the same supremum for many
  parameter draws at once from arrangement vertices and edge directions;
  the estimators use it.
* :func:`detector_paper_style` is the sampling heuristic: random inputs in a
  ball, random parameters near the given ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import linear_core as lc
from .arrangement import DEFAULT_CAP, code_str, enumerate_regions, is_generic
from .errors import DimensionMismatch, MarginalVerdict, NotGeneric
from .network import NetworkParams, first_layer_arrangement, relu

CHUNK = 2000


@dataclass(frozen=True)
class NeuronRef:
    """Neuron ``index`` (zero-based) of layer ``layer``."""

    layer: int = 2
    index: int = 0


@dataclass
class StabilityVerdict:
    stable: bool
    margin: float
    marginal: bool = False
    regions_checked: int = 0
    unbounded_regions: int = 0
    certificates: dict = field(default_factory=dict, repr=False)

    def to_record(self) -> dict:
        margin = self.margin if math.isfinite(self.margin) else ("inf" if self.margin > 0 else "-inf")
        return {"stable": self.stable, "marginal": self.marginal, "margin": margin,
                "regions_checked": self.regions_checked, "unbounded_regions": self.unbounded_regions}

    def to_json(self) -> str:
        return json.dumps(self.to_record())


@dataclass(frozen=True)
class DetectorConfig:
    domain_samples: int = 10_000
    domain_radius: float = 100.0
    perturbation_count: int | None = None  # None: 4 * n0
    perturbation_radius: float = 1e-3

    def __post_init__(self):
        if self.domain_samples < 1 or self.domain_radius <= 0 or self.perturbation_radius < 0:
            raise ValueError("detector settings must be positive")
        if self.perturbation_count is not None and self.perturbation_count < 1:
            raise ValueError("perturbation_count must be positive")

    def perturbations(self, n0: int) -> int:
        return self.perturbation_count if self.perturbation_count is not None else 4 * n0


def _neuron_row(params: NetworkParams, neuron: NeuronRef):
    if neuron.layer != 2:
        raise ValueError("only second-layer neurons are supported")
    if len(params.weights) < 2:
        raise DimensionMismatch("network has no second layer")
    W2, b2 = params.weights[1], params.biases[1]
    if not 0 <= neuron.index < W2.shape[0]:
        raise ValueError(f"neuron index {neuron.index} out of range")
    return W2[neuron.index], float(b2[neuron.index])


def all_negative_test(params: NetworkParams, neuron: NeuronRef = NeuronRef()) -> bool:
    w, b = _neuron_row(params, neuron)
    return bool(np.all(w < 0) and b < 0)


def is_stably_unactivated_exact(params: NetworkParams, neuron: NeuronRef = NeuronRef(), *,
                                eps: float = lc.EPS, cap: int = DEFAULT_CAP, exact: bool = False,
                                raise_marginal: bool = True) -> StabilityVerdict:
    """Region-wise LP decision.

    Raises :class:`MarginalVerdict` (carrying the verdict) when the supremum
    is within ``eps`` of zero, unless ``raise_marginal`` is false.
    """
    w, b = _neuron_row(params, neuron)
    arr = first_layer_arrangement(params)
    if not is_generic(arr, cap=cap, exact=exact):
        raise NotGeneric("first-layer arrangement is not generic")
    W1, b1 = params.weights[0], params.biases[0]
    regions = enumerate_regions(arr, cap=cap, exact=exact, check_generic=False)

    certs = {}
    best = -math.inf
    unbounded = 0
    if exact:
        # Forming w @ W1 in floats would tilt the objective off directions
        # along which it is exactly flat.
        wq, bq = [Fraction(v) for v in w], Fraction(b)
        W1q = [[Fraction(v) for v in row] for row in W1]
        b1q = [Fraction(v) for v in b1]
    else:
        wq, bq, W1q, b1q = w.tolist(), b, W1.tolist(), b1.tolist()
    n = W1.shape[1]
    for reg in regions:
        c = reg.codeword
        on = [j for j, s in enumerate(c) if s > 0]
        obj = [sum((wq[j] * W1q[j][k] for j in on), 0) for k in range(n)]
        const = sum((wq[j] * b1q[j] for j in on), 0) + bq
        cons = [([s * v for v in W1q[j]], s * b1q[j]) for j, s in enumerate(c)]
        res = lc.maximize_linear(obj, cons, exact=exact)
        certs[code_str(c)] = res
        if res.unbounded:
            unbounded += 1
            best = math.inf
        elif res.bounded:
            best = max(best, float(res.optimum + const))
    stable = unbounded == 0 and best < -eps
    marginal = abs(best) <= eps
    verdict = StabilityVerdict(stable and not marginal, best, marginal, len(regions), unbounded, certs)
    if marginal and raise_marginal:
        raise MarginalVerdict(verdict)
    return verdict


# --- batched supremum -----------------------------------------------------------

def _cross_rows(rows: np.ndarray) -> np.ndarray:
    """Null direction of ``(N, n - 1, n)`` stacked row blocks via cofactors."""
    N, k, n = rows.shape
    if n == 1:
        return np.ones((N, 1))
    d = np.empty((N, n))
    for col in range(n):
        minor = np.delete(rows, col, axis=2)
        d[:, col] = (-1) ** col * np.linalg.det(minor)
    return d


def _sup_chunk(W1, b1, w, b, tol):
    N, m, n = W1.shape
    sup = np.full(N, -np.inf)
    bad = np.zeros(N, dtype=bool)
    norms = np.linalg.norm(W1, axis=2)
    bad |= (norms <= tol).any(axis=1)
    U = W1 / np.where(norms > 0, norms, 1.0)[..., None]

    if m < n:
        # The pre-activations sweep out all of R^m.
        s = np.linalg.svd(U, compute_uv=False)
        bad |= s[:, -1] <= tol
        sup = np.where((w > 0).any(axis=1), np.inf, b)
        return sup, bad

    # Vertex values.
    for S in combinations(range(m), n):
        S = list(S)
        A = W1[:, S, :]
        det = np.linalg.det(U[:, S, :])
        sing = np.abs(det) <= tol
        bad |= sing
        A = np.where(sing[:, None, None], np.eye(n), A)
        v = np.linalg.solve(A, -b1[:, S, None])[..., 0]
        z = np.einsum("nij,nj->ni", W1, v) + b1
        z[:, S] = 0.0
        sup = np.maximum(sup, np.einsum("ni,ni->n", w, relu(z)) + b)

    # Slopes along the unbounded ends of the arrangement's lines.
    for T in combinations(range(m), n - 1):
        T = list(T)
        d = _cross_rows(U[:, T, :])
        d /= np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-300)
        rate = np.einsum("nij,nj->ni", U, d)
        rate[:, T] = 0.0
        scaled = w * norms
        up = np.einsum("ni,ni->n", scaled, relu(rate))
        down = np.einsum("ni,ni->n", scaled, relu(-rate))
        sup = np.where((up > tol) | (down > tol), np.inf, sup)
    return sup, bad


def sup_preactivation_batch(W1: np.ndarray, b1: np.ndarray, w: np.ndarray, b: np.ndarray,
                            *, tol: float = 1e-12, chunk: int = CHUNK):
    """Supremum over the input space of ``w @ relu(W1 @ x + b1) + b`` per draw.

    Shapes: ``W1`` ``(N, m, n)``, ``b1`` and ``w`` ``(N, m)``, ``b`` ``(N,)``.
    Returns ``(sup, degenerate)``; ``sup`` is ``inf`` where unbounded and
    ``degenerate`` flags draws whose first layer is not generic (their
    ``sup`` is meaningless).

    With at least as many rows as columns every closed region is a pointed
    polyhedron, so the supremum is either reached at an arrangement vertex or
    is infinite along the end of some line where ``n - 1`` hyperplanes meet.
    """
    W1, b1, w, b = (np.asarray(a, dtype=float) for a in (W1, b1, w, b))
    N = W1.shape[0]
    sup = np.empty(N)
    bad = np.empty(N, dtype=bool)
    for s in range(0, N, chunk):
        e = min(N, s + chunk)
        sup[s:e], bad[s:e] = _sup_chunk(W1[s:e], b1[s:e], w[s:e], b[s:e], tol)
    return sup, bad


def decide_batch(W1, b1, w, b, *, eps: float = lc.EPS, tol: float = 1e-12):
    """Vectorised verdicts: ``(stable, marginal, degenerate, sup)`` arrays."""
    sup, bad = sup_preactivation_batch(W1, b1, w, b, tol=tol)
    marginal = ~bad & (np.abs(sup) <= eps)
    stable = ~bad & ~marginal & (sup < -eps)
    return stable, marginal, bad, sup


def sup_preactivation(params: NetworkParams, neuron: NeuronRef = NeuronRef()) -> float:
    w, b = _neuron_row(params, neuron)
    sup, bad = sup_preactivation_batch(params.weights[0][None], params.biases[0][None],
                                       w[None], np.array([b]))
    if bad[0]:
        raise NotGeneric("first-layer arrangement is not generic")
    return float(sup[0])


# --- sampling detector ----------------------------------------------------------

def uniform_ball(rng: np.random.Generator, count: int, dim: int, radius: float) -> np.ndarray:
    g = rng.standard_normal((count, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * rng.random(count) ** (1.0 / dim))[:, None]


def detector_paper_style(params: NetworkParams, neuron: NeuronRef = NeuronRef(),
                         cfg: DetectorConfig = DetectorConfig(), seed: int = 0) -> bool:
    """True when the neuron's pre-activation is ``<= 0`` at every sampled
    input under every sampled nearby parameter."""
    _neuron_row(params, neuron)
    rng = np.random.default_rng(seed)
    n0 = params.arch.sizes[0]
    x = uniform_ball(rng, cfg.domain_samples, n0, cfg.domain_radius)
    head = NetworkParams(params.weights[:2], params.biases[:2])
    theta = head.flat()
    deltas = uniform_ball(rng, cfg.perturbations(n0), theta.size, 1.0) * cfg.perturbation_radius
    for delta in deltas:
        p = head.with_flat(theta + delta)
        h = relu(x @ p.weights[0].T + p.biases[0])
        z = h @ p.weights[1][neuron.index] + p.biases[1][neuron.index]
        if np.any(z > 0):
            return False
    return True
