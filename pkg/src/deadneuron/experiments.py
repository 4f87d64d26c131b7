"""Monte Carlo estimators and verification suites.

Sampling is split into fixed-size chunks, each with its own child of a
:class:`numpy.random.SeedSequence`, so the result depends only on the seed and
never on how many worker threads process the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist

import numpy as np

from . import linear_core as lc
from .arrangement import count_facets, enumerate_regions, facet_statistics, random_generic, region_counts
from .errors import MarginalVerdict, NotGeneric, OutOfTheoremRange
from .intercepts import classify_batch, in_h1_batch, p_plus_batch
from .network import (Distribution, NetworkParams, configuration_codes, configuration_index_batch,
                      sample_batch)
from .stability import DetectorConfig, NeuronRef, decide_batch, detector_paper_style, is_stably_unactivated_exact

CHUNK = 5000
Z99 = NormalDist().inv_cdf(0.995)
MODES = ("exact", "lp", "detector")


def wilson(hits: int, n: int, z: float = Z99) -> tuple:
    if n <= 0:
        return (0.0, 1.0)
    p = hits / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n) if n > 0 else math.inf


def theorem_probability(n0: int, n1: int) -> Fraction:
    if n0 < 1 or n1 < 1:
        raise ValueError("widths must be positive")
    if n1 <= n0:
        return Fraction(1, 2 ** (n1 + 1))
    if n1 == n0 + 1:
        return Fraction(2 ** n0 + 1, 4 ** (n0 + 1))
    raise OutOfTheoremRange(f"no closed form for n1={n1} > n0+1={n0 + 1}")


def _stream(seed: int, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))


def _map_chunks(fn, ss: np.random.SeedSequence, total: int, threads: int = 1, chunk: int = CHUNK):
    """``fn(rng, count)`` over consecutive chunks; results in chunk order."""
    if total < 1:
        raise ValueError("sample count must be positive")
    counts = [min(chunk, total - s) for s in range(0, total, chunk)]
    rngs = [np.random.default_rng(c) for c in ss.spawn(len(counts))]
    if threads <= 1:
        return [fn(r, k) for r, k in zip(rngs, counts)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, rngs, counts))


# --- probability of a stably unactivated neuron ------------------------------------

REPORT_FIELDS = ("n0", "n1", "mode", "samples", "hits", "marginal_discards",
                 "p_hat", "ci_low", "ci_high", "theory", "seed")


@dataclass
class EstimateReport:
    n0: int
    n1: int
    mode: str
    samples: int
    hits: int
    marginal_discards: int
    p_hat: float
    ci_low: float
    ci_high: float
    theory: float | None
    seed: int
    negative_hits: int = field(default=0, compare=False)  # all-negative draws

    @classmethod
    def build(cls, n0, n1, mode, samples, hits, discards, seed, negative_hits=0):
        lo, hi = wilson(hits, samples)
        try:
            theory = float(theorem_probability(n0, n1))
        except OutOfTheoremRange:
            theory = None
        return cls(n0, n1, mode, samples, hits, discards, hits / samples if samples else math.nan,
                   lo, hi, theory, seed, negative_hits)

    @property
    def sigma(self) -> float:
        """Binomial standard error at the estimate."""
        return binomial_sigma(self.p_hat, self.samples)

    def sigma_at(self, p: float) -> float:
        return binomial_sigma(p, self.samples)

    @property
    def p_negative(self) -> float:
        return self.negative_hits / self.samples

    def to_record(self) -> dict:
        return {k: getattr(self, k) for k in REPORT_FIELDS}


def _exact_chunk(n0, n1, dist, eps):
    def run(rng, count):
        W1, b1, w, b = sample_batch(n0, n1, dist, count, rng)
        stable, marginal, bad, _ = decide_batch(W1, b1, w, b, eps=eps)
        keep = ~(marginal | bad)
        neg = keep & (w < 0).all(axis=1) & (b < 0)
        return int(keep.sum()), int(stable.sum()), int((~keep).sum()), int(neg.sum())
    return run


def _per_sample_chunk(n0, n1, dist, eps, mode, cfg):
    def run(rng, count):
        W1, b1, w, b = sample_batch(n0, n1, dist, count, rng)
        det_seeds = rng.integers(0, 2 ** 63, size=count)
        used = hits = discards = neg = 0
        for i in range(count):
            params = NetworkParams((W1[i], w[i][None]), (b1[i], b[i:i + 1]))
            try:
                if mode == "lp":
                    ok = is_stably_unactivated_exact(params, eps=eps).stable
                else:
                    ok = detector_paper_style(params, NeuronRef(), cfg, int(det_seeds[i]))
            except (MarginalVerdict, NotGeneric):
                discards += 1
                continue
            used += 1
            hits += ok
            neg += bool((w[i] < 0).all() and b[i] < 0)
        return used, hits, discards, neg
    return run


def estimate_prob_stable(n0: int, n1: int, dist: Distribution, samples: int, seed: int, *,
                         mode: str = "exact", threads: int = 1, eps: float = lc.EPS,
                         detector: DetectorConfig | None = None) -> EstimateReport:
    """Fraction of i.i.d. draws whose first second-layer neuron is stably
    unactivated.  Marginal and non-generic draws are discarded and counted."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    ss = _stream(seed, n0, n1)
    if mode == "exact":
        fn = _exact_chunk(n0, n1, dist, eps)
    else:
        fn = _per_sample_chunk(n0, n1, dist, eps, mode, detector or DetectorConfig())
    parts = _map_chunks(fn, ss, samples, threads)
    used, hits, discards, neg = (sum(col) for col in zip(*parts))
    return EstimateReport.build(n0, n1, mode, used, hits, discards, seed, neg)


def conjecture_sweep(n0: int, n1_values, dist: Distribution, samples_per_cell: int, seed: int, *,
                     mode: str = "exact", threads: int = 1) -> list:
    return [estimate_prob_stable(n0, n1, dist, samples_per_cell, seed, mode=mode, threads=threads)
            for n1 in n1_values]


def reference_level(n0: int) -> Fraction:
    return Fraction(1, 4 ** (n0 + 1))


# --- configuration decomposition (n1 = n0 + 1) -------------------------------------

@dataclass
class DeltaEntry:
    index: int
    code: tuple
    samples: int
    hits: int

    @property
    def delta_hat(self) -> float:
        return self.hits / self.samples if self.samples else math.nan

    @property
    def sigma(self) -> float:
        return binomial_sigma(self.delta_hat, self.samples) if self.samples else math.inf


@dataclass
class DeltaReport:
    n0: int
    seed: int
    entries: list
    discards: int

    @property
    def samples(self) -> int:
        return sum(e.samples for e in self.entries)

    def sum_over(self, indices) -> tuple:
        """``(sum of delta_hat, standard error)`` over the given indices."""
        es = [self.entries[i] for i in indices]
        return (sum(e.delta_hat for e in es), math.sqrt(sum(e.sigma ** 2 for e in es)))

    def total(self) -> tuple:
        return self.sum_over(range(len(self.entries)))

    def facet_indices(self) -> range:
        return range(1, self.n0 + 2)

    def vertex_indices(self) -> range:
        # empty for n0 = 1, where the one-positive codes are facet codes
        return range(self.n0 + 2, 2 * self.n0 + 3) if self.n0 > 1 else range(0)

    def residual_indices(self) -> range:
        return range(2 * self.n0 + 3 if self.n0 > 1 else 3, len(self.entries))

    def to_record(self) -> dict:
        total, sigma = self.total()
        return {"n0": self.n0, "seed": self.seed, "samples": self.samples, "discards": self.discards,
                "total": total, "total_sigma": sigma,
                "entries": [{"index": e.index, "code": "".join("+" if s > 0 else "-" for s in e.code),
                             "conditional_samples": e.samples, "conditional_hits": e.hits,
                             "delta_hat": e.delta_hat} for e in self.entries]}


def _config_chunk(n0, dist, eps):
    """Per chunk: configuration index, the events E+ and E-, and the
    intercept classification of the second-layer hyperplane."""
    n1 = n0 + 1

    def run(rng, count):
        W1, b1, w, b = sample_batch(n0, n1, dist, count, rng)
        stable, marginal, bad, _ = decide_batch(W1, b1, w, b, eps=eps)
        keep = ~(marginal | bad)
        W1s = np.where(keep[:, None, None], W1, np.eye(n1, n0))
        b1s = np.where(keep[:, None], b1, np.arange(1.0, n1 + 1))
        idx = np.where(keep, configuration_index_batch(W1s, b1s), -1)
        p = p_plus_batch(W1s, b1s)
        neg = (w < 0).all(axis=1) & (b < 0)
        undef = keep & ((np.abs(w) <= lc.EPS).any(axis=1) | (np.abs(b) <= lc.EPS))
        return {"idx": idx, "keep": keep, "eplus": stable & ~neg, "b": b, "p": p,
                "cls": classify_batch(p, w, b)[0], "h1": in_h1_batch(p, w, b),
                "mcls": classify_batch(-p, w, b)[0], "undef": undef}
    return run


def _merge(parts):
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def _config_draws(n0, dist, samples, seed, side, threads, eps):
    ss = _stream(seed, n0, side)
    return _merge(_map_chunks(_config_chunk(n0, dist, eps), ss, samples, threads))


def estimate_deltas(n0: int, dist: Distribution, samples: int, seed: int, *,
                    threads: int = 1, eps: float = lc.EPS) -> DeltaReport:
    """Conditional frequency of E+ (stable, not all-negative) per configuration."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    d = _config_draws(n0, dist, samples, seed, 0, threads, eps)
    return _delta_report(n0, seed, d)


def _delta_report(n0, seed, d):
    codes = configuration_codes(n0)
    idx, eplus = d["idx"], d["eplus"]
    count = np.bincount(idx[idx >= 0], minlength=len(codes))
    hits = np.bincount(idx[eplus], minlength=len(codes))
    entries = [DeltaEntry(i, codes[i], int(count[i]), int(hits[i])) for i in range(len(codes))]
    return DeltaReport(n0, seed, entries, int((idx < 0).sum()))


@dataclass
class RelationCheck:
    """Two independent estimates of quantities that should agree."""

    label: str
    left: float
    left_sigma: float
    right: float
    right_sigma: float

    @property
    def sigma(self) -> float:
        return math.hypot(self.left_sigma, self.right_sigma)

    @property
    def agrees(self) -> bool:
        return abs(self.left - self.right) <= 3 * self.sigma


@dataclass
class C0Report:
    n0: int
    seed: int
    deltas: DeltaReport
    c0: RelationCheck
    case3: list
    undefined_intercepts: int


def _half_freq(mask, cond):
    n = int(cond.sum())
    p = float(mask[cond].mean()) if n else math.nan
    return 0.5 * p, 0.5 * binomial_sigma(p, n)


def check_c0_relation(n0: int, dist: Distribution, samples: int, seed: int, *,
                      threads: int = 1, eps: float = lc.EPS) -> C0Report:
    """Compare each configuration probability with its intercept description.

    The left sides (conditional E+ frequencies) and the right sides (intercept
    class frequencies) come from independent sample streams.
    """
    left = _config_draws(n0, dist, samples, seed, 0, threads, eps)
    right = _config_draws(n0, dist, samples, seed, 1, threads, eps)
    deltas = _delta_report(n0, seed, left)
    e0 = deltas.entries[0]
    r, rs = _half_freq(right["h1"], right["idx"] == 0)
    c0 = RelationCheck("delta_0 = P(H in H1_p)/2", e0.delta_hat, e0.sigma, r, rs)

    case3 = []
    m = n0 + 1
    for i in (range(1, m + 1) if n0 > 1 else ()):
        a, b = deltas.entries[i], deltas.entries[i + m]
        # p has its single positive entry at position i - 1 in configuration i + m.
        s1 = (right["cls"] == i - 1) & right["h1"]
        r, rs = _half_freq(s1, right["idx"] == i + m)
        case3.append(RelationCheck(f"delta_{i} - delta_{i + m} = P(H in S1_{i})/2",
                                   a.delta_hat - b.delta_hat, math.hypot(a.sigma, b.sigma), r, rs))
    undefined = int(left["undef"].sum() + right["undef"].sum())
    return C0Report(n0, seed, deltas, c0, case3, undefined)


# --- facet statistics ---------------------------------------------------------------

@dataclass
class FacetRow:
    m: int
    n0: int
    regions: int
    bounded: int
    total_facets: int
    average: Fraction
    empirical_total: int | None = None
    axis_hits: float | None = None  # mean number of coordinate axes reached by the image
    maxneg_facets: float | None = None  # mean facet count of a maximally negative region


def _axis_stats(arr, regions):
    one_plus = sum(1 for r in regions if sum(1 for s in r.codeword if s > 0) == 1)
    most = max(sum(1 for s in r.codeword if s < 0) for r in regions)
    maxneg = [r for r in regions if sum(1 for s in r.codeword if s < 0) == most]
    return one_plus, count_facets(arr, maxneg[0].codeword)


def facet_report(n0: int, m_values, *, trials: int = 5, seed: int = 0,
                 empirical_max_m: int = 10, empirical_max_n: int = 3) -> list:
    """Analytic facet totals and averages per ``m``; small cases are also
    enumerated on random generic arrangements and cross-checked."""
    rows = []
    for m in m_values:
        if m <= n0:
            raise ValueError("facet report needs m > n0")
        total, avg = facet_statistics(m, n0)
        regions, bounded = region_counts(m, n0)
        row = FacetRow(m, n0, regions, bounded, total, avg)
        if m <= empirical_max_m and n0 <= empirical_max_n:
            rng = np.random.default_rng(_stream(seed, n0, m))
            totals, axes, maxneg = set(), [], []
            for _ in range(trials):
                arr = random_generic(m, n0, rng)
                regs = enumerate_regions(arr, facets=True)
                totals.add(sum(r.facet_count for r in regs) // 2)
                a, f = _axis_stats(arr, regs)
                axes.append(a)
                maxneg.append(f)
            if len(totals) != 1:
                raise RuntimeError(f"facet totals vary across arrangements: {sorted(totals)}")
            row.empirical_total = totals.pop()
            row.axis_hits = float(np.mean(axes))
            row.maxneg_facets = float(np.mean(maxneg))
        rows.append(row)
    return rows


# --- image of the first layer -------------------------------------------------------

def image_contains(W1, b1, y, *, eps: float = lc.EPS) -> bool:
    """Whether ``y`` (non-negative) is ``relu(W1 @ x + b1)`` for some ``x``."""
    W1 = np.asarray(W1, dtype=float)
    b1 = np.asarray(b1, dtype=float)
    cons = []
    for k, yk in enumerate(y):
        if yk > 0:
            cons.append((W1[k].tolist(), float(b1[k] - yk), lc.GE))
            cons.append((W1[k].tolist(), float(b1[k] - yk), lc.LE))
        else:
            cons.append((W1[k].tolist(), float(b1[k]), lc.LE))
    res = lc.maximize_linear([0.0] * W1.shape[1], cons, eps=eps)
    return not res.infeasible


def half_axis_hits(W1, b1, lambdas=(0.1, 1.0, 10.0, 100.0)) -> np.ndarray:
    """``hits[j, k]``: is ``lambdas[k] * e_j`` in the image of the first layer."""
    m = np.asarray(W1).shape[0]
    out = np.zeros((m, len(lambdas)), dtype=bool)
    for j in range(m):
        for k, lam in enumerate(lambdas):
            y = np.zeros(m)
            y[j] = lam
            out[j, k] = image_contains(W1, b1, y)
    return out


def expected_half_axis_hits(W1, b1, lambdas=(0.1, 1.0, 10.0, 100.0)) -> np.ndarray:
    """Hit pattern predicted from the configuration when the first layer is
    at most as wide as the input or exactly one wider."""
    W1 = np.asarray(W1, dtype=float)
    b1 = np.asarray(b1, dtype=float)
    m, n = W1.shape
    lam = np.asarray(lambdas, dtype=float)
    out = np.ones((m, lam.size), dtype=bool)
    if m <= n:
        return out
    if m != n + 1:
        raise ValueError("prediction only for n1 <= n0 + 1")
    p = p_plus_batch(W1[None], b1[None])[0]
    idx = int(configuration_index_batch(W1[None], b1[None])[0])
    if idx == 0:
        out = lam[None, :] >= p[:, None]
    elif idx <= m:
        out[idx - 1] = False
        if m == 2:
            # the other axis is also the single positive one
            k = 2 - idx
            out[k] = lam <= p[k]
    elif idx <= 2 * m and m > 2:
        out[idx - m - 1] = lam <= p[idx - m - 1]
    return out
