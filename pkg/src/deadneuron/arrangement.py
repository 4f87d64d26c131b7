"""Cooriented hyperplane arrangements.

A hyperplane is ``{x : normal @ x + offset = 0}`` with positive side where
``normal @ x + offset > 0``.  Codewords are tuples over ``{+1, -1}`` indexed by
hyperplane position; they are always produced in lexicographic order with
``-1 < +1``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

from . import linear_core as lc
from .errors import CountOverflow, NoneBounded, NotGeneric, SingularError, SizeLimitExceeded

DEFAULT_CAP = 20
INTERIOR_MARGIN = 1e-7
_INT64_MAX = 2**63 - 1

Codeword = tuple  # tuple of +1/-1


def code_str(code: Sequence[int]) -> str:
    return "".join("+" if c > 0 else "-" for c in code)


def parse_code(text: str) -> Codeword:
    if set(text) - {"+", "-"}:
        raise ValueError(f"bad codeword {text!r}")
    return tuple(1 if ch == "+" else -1 for ch in text)


def negate(code: Sequence[int]) -> Codeword:
    return tuple(-c for c in code)


@dataclass(frozen=True)
class Hyperplane:
    normal: tuple
    offset: float | Fraction

    def __post_init__(self):
        if not self.normal or all(v == 0 for v in self.normal):
            raise ValueError("hyperplane normal must be nonzero")
        if math.sqrt(sum(float(v) ** 2 for v in self.normal)) <= lc.EPS:
            raise ValueError("hyperplane normal is numerically zero")

    def value(self, x):
        return lc.dot(self.normal, x) + self.offset


@dataclass(frozen=True)
class CoorientedArrangement:
    hyperplanes: tuple[Hyperplane, ...]
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("ambient dimension must be positive")
        for h in self.hyperplanes:
            if len(h.normal) != self.dim:
                raise ValueError("normal length differs from ambient dimension")

    @classmethod
    def from_arrays(cls, normals, offsets) -> "CoorientedArrangement":
        normals = [tuple(r) for r in normals]
        hs = tuple(Hyperplane(tuple(r), o) for r, o in zip(normals, offsets))
        if not hs:
            raise ValueError("empty arrangement")
        return cls(hs, len(normals[0]))

    def __len__(self):
        return len(self.hyperplanes)

    @property
    def normals(self):
        return [h.normal for h in self.hyperplanes]

    @property
    def offsets(self):
        return [h.offset for h in self.hyperplanes]

    def sign_vector(self, x) -> Codeword:
        """Codeword of the point ``x``; zero where ``x`` lies on a hyperplane."""
        out = []
        for h in self.hyperplanes:
            v = h.value(x)
            out.append(1 if v > 0 else (-1 if v < 0 else 0))
        return tuple(out)

    def permuted(self, order: Sequence[int]) -> "CoorientedArrangement":
        return CoorientedArrangement(tuple(self.hyperplanes[i] for i in order), self.dim)

    def to_json(self) -> str:
        return json.dumps(to_record(self))

    @classmethod
    def from_json(cls, text: str) -> "CoorientedArrangement":
        return from_record(json.loads(text))


def to_record(arr: CoorientedArrangement) -> dict:
    return {
        "dim": arr.dim,
        "hyperplanes": [
            {"normal": [float(v) for v in h.normal], "offset": float(h.offset)}
            for h in arr.hyperplanes
        ],
    }


def from_record(rec: dict) -> CoorientedArrangement:
    dim = int(rec["dim"])
    hs = tuple(Hyperplane(tuple(float(v) for v in h["normal"]), float(h["offset"]))
               for h in rec["hyperplanes"])
    return CoorientedArrangement(hs, dim)


@dataclass(frozen=True)
class RegionInfo:
    codeword: Codeword
    bounded: bool
    witness: tuple
    facet_count: int | None = None


# --- genericity -------------------------------------------------------------


def is_generic(arr: CoorientedArrangement, *, cap: int = DEFAULT_CAP, exact: bool = False,
               eps: float = lc.EPS) -> bool:
    """Every q <= n of the hyperplanes meet in dimension n - q; any n + 1 miss.

    Only subsets of size ``min(m, n)`` and ``n + 1`` need checking: full rank
    of every n-subset of normals implies it for smaller subsets.
    """
    m, n = len(arr), arr.dim
    if m > cap:
        raise SizeLimitExceeded(f"{m} hyperplanes exceeds cap {cap}")
    normals = arr.normals
    q = min(m, n)
    for idx in itertools.combinations(range(m), q):
        if lc.rank([normals[i] for i in idx], exact=exact, eps=eps) < q:
            return False
    if m > n:
        for idx in itertools.combinations(range(m), n + 1):
            aug = [list(normals[i]) + [arr.offsets[i]] for i in idx]
            if lc.rank(aug, exact=exact, eps=eps) < n + 1:
                return False
    return True


def _require_generic(arr, cap, exact):
    if not is_generic(arr, cap=cap, exact=exact):
        raise NotGeneric("arrangement is not generic")


# --- region LPs -------------------------------------------------------------


def _unit_rows(arr: CoorientedArrangement, exact: bool):
    """Rows scaled so that signed slacks are comparable across hyperplanes."""
    rows = []
    for h in arr.hyperplanes:
        if exact:
            s = max(abs(Fraction(v)) for v in h.normal)
            rows.append(([Fraction(v) / s for v in h.normal], Fraction(h.offset) / s))
        else:
            s = math.sqrt(sum(float(v) ** 2 for v in h.normal))
            rows.append(([float(v) / s for v in h.normal], float(h.offset) / s))
    return rows


def _margin_lp(rows, signs, n, exact, equal_to_zero=None):
    """Maximise the smallest signed slack ``t`` (capped at 1) over the region.

    ``signs`` maps hyperplane index -> +-1 for the constraints in force;
    ``equal_to_zero`` pins one hyperplane as an equality.
    """
    cons = []
    for j, c in signs.items():
        a, b = rows[j]
        cons.append(([c * v for v in a] + [-1], c * b))
    if equal_to_zero is not None:
        a, b = rows[equal_to_zero]
        cons.append((list(a) + [0], b, lc.GE))
        cons.append((list(a) + [0], b, lc.LE))
    cons.append(([0] * n + [-1], 1))
    return lc.maximize_linear([0] * n + [1], cons, exact=exact)


def _accept(res, exact, margin):
    if not res.bounded:
        return False
    return res.optimum > 0 if exact else res.optimum > margin


def region_witness(arr: CoorientedArrangement, code: Sequence[int], *, exact: bool = False,
                   margin: float = INTERIOR_MARGIN):
    """Interior point of the region with this codeword, or ``None`` if empty."""
    rows = _unit_rows(arr, exact)
    res = _margin_lp(rows, dict(enumerate(code)), arr.dim, exact)
    if not _accept(res, exact, margin):
        return None
    return tuple(res.argmax[: arr.dim])


def is_bounded_region(arr: CoorientedArrangement, code: Sequence[int], *, method: str = "recession",
                      exact: bool = False) -> bool:
    """Boundedness of the (assumed nonempty) region with this codeword.

    ``recession``: one LP; the region is bounded iff its recession cone
    ``{d : c_j normal_j @ d >= 0}`` is ``{0}``, i.e. iff the cone has no point
    with ``sum_j c_j normal_j @ d >= 1``.
    ``axes``: 2n LPs maximising each of ``+-x_i`` over the closed region.
    """
    rows = _unit_rows(arr, exact)
    n = arr.dim
    if method == "recession":
        cons = [([c * v for v in a], 0) for (a, _), c in zip(rows, code)]
        total = [sum(c * a[k] for (a, _), c in zip(rows, code)) for k in range(n)]
        cons.append((total, -1))
        return lc.maximize_linear([0] * n, cons, exact=exact).infeasible
    if method == "axes":
        cons = [([c * v for v in a], c * b) for (a, b), c in zip(rows, code)]
        for i in range(n):
            for s in (1, -1):
                obj = [0] * n
                obj[i] = s
                if lc.maximize_linear(obj, cons, exact=exact).unbounded:
                    return False
        return True
    raise ValueError(f"unknown method {method!r}")


def count_facets(arr: CoorientedArrangement, code: Sequence[int], *, exact: bool = False,
                 margin: float = INTERIOR_MARGIN) -> int:
    """Number of hyperplanes carrying a facet of the region's closure."""
    rows = _unit_rows(arr, exact)
    total = 0
    for i in range(len(arr)):
        signs = {j: c for j, c in enumerate(code) if j != i}
        res = _margin_lp(rows, signs, arr.dim, exact, equal_to_zero=i)
        if _accept(res, exact, margin):
            total += 1
    return total


def _probe_cloud(n: int, count: int = 4096):
    """Fixed sample of points at several scales, used to certify cells cheaply."""
    rng = np.random.default_rng(20240601)
    scales = np.repeat([0.3, 1.0, 3.0, 10.0, 100.0], -(-count // 5))[:count]
    return rng.standard_normal((count, n)) * scales[:, None]


def _vertex_probes(A, b):
    """Points just off each vertex, one per adjacent orthant of its n hyperplanes."""
    m, n = A.shape
    if m < n:
        return np.empty((0, n))
    pts = []
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    for idx in itertools.combinations(range(m), n):
        idx = list(idx)
        try:
            v = np.linalg.solve(A[idx], -b[idx])
            D = np.linalg.solve(A[idx], signs.T).T
        except np.linalg.LinAlgError:
            continue
        rest = [j for j in range(m) if j not in idx]
        gap = np.abs(A[rest] @ v + b[rest]).min() if rest else 1.0
        step = 0.5 * gap / max(np.abs(D @ A[rest].T).max() if rest else 1.0, 1e-300)
        pts.append(v + min(step, 1.0) * D)
    return np.vstack(pts) if pts else np.empty((0, n))


def enumerate_regions(arr: CoorientedArrangement, *, cap: int = DEFAULT_CAP, exact: bool = False,
                      margin: float = INTERIOR_MARGIN, facets: bool = False,
                      bounded_method: str = "recession", check_generic: bool = True
                      ) -> list[RegionInfo]:
    """All nonempty regions, in lexicographic codeword order.

    Candidates are explored depth first over codeword prefixes and a prefix
    whose cell is empty is not extended, so the leaves reached are exactly the
    feasible codewords of ``{+1,-1}^m``.  In float mode a cell is accepted
    without an LP when a probe point (or the parent's witness) already sits
    inside it with slack above ``margin``; that point's slack is a lower bound
    on the LP optimum, so the decision is the same either way.
    """
    m, n = len(arr), arr.dim
    if m > cap:
        raise SizeLimitExceeded(f"{m} hyperplanes exceeds cap {cap}")
    if check_generic:
        _require_generic(arr, cap, exact)
    rows = _unit_rows(arr, exact)
    found = []

    if exact:
        def visit_exact(prefix):
            for sgn in (-1, 1):
                cand = prefix + [sgn]
                res = _margin_lp(rows, dict(enumerate(cand)), n, exact)
                if _accept(res, exact, margin):
                    if len(cand) == m:
                        found.append((tuple(cand), tuple(res.argmax[:n])))
                    else:
                        visit_exact(cand)

        visit_exact([])
    else:
        A = np.array([r[0] for r in rows])
        b = np.array([r[1] for r in rows])
        cloud = np.vstack([_vertex_probes(A, b), _probe_cloud(n)])
        S = cloud @ A.T + b

        def visit(prefix, mask, witness):
            k = len(prefix)
            for sgn in (-1, 1):
                cand = prefix + [sgn]
                cmask = mask & (sgn * S[:, k] > margin)
                if cmask.any():
                    w = tuple(cloud[int(np.argmax(cmask))].tolist())
                elif witness is not None and sgn * (A[k] @ witness + b[k]) > margin:
                    w = witness
                else:
                    res = _margin_lp(rows, dict(enumerate(cand)), n, exact)
                    if not _accept(res, exact, margin):
                        continue
                    w = tuple(res.argmax[:n])
                if k + 1 == m:
                    found.append((tuple(cand), w))
                else:
                    visit(cand, cmask, np.asarray(w))

        visit([], np.ones(len(cloud), dtype=bool), None)

    dirs = None if exact else _probe_cloud(n) @ A.T
    out = []
    for code, witness in found:
        if dirs is not None and bounded_method == "recession" and \
                (np.asarray(code) * dirs > 0).all(axis=1).any():
            bounded = False  # a probe direction lies in the recession cone
        else:
            bounded = is_bounded_region(arr, code, method=bounded_method, exact=exact)
        fc = count_facets(arr, code, exact=exact, margin=margin) if facets else None
        out.append(RegionInfo(code, bounded, witness, fc))
    return out


def shared_face_dimension(arr: CoorientedArrangement, code_a: Sequence[int], code_b: Sequence[int],
                          *, eps: float = 1e-7) -> int:
    """Dimension of ``closure(R_a) & closure(R_b)``; ``-1`` when empty.

    In a generic arrangement the dimension is ``n`` minus the number of
    hyperplanes containing the intersection; containment is decided by
    maximising and minimising each pre-activation over it.
    """
    rows = _unit_rows(arr, False)
    cons = []
    for (a, b), ca, cb in zip(rows, code_a, code_b):
        if ca == cb:
            cons.append(([ca * v for v in a], ca * b))
        else:
            cons.append((a, b, lc.GE))
            cons.append((a, b, lc.LE))
    n = arr.dim
    if lc.maximize_linear([0.0] * n, cons).infeasible:
        return -1
    inside = 0
    for a, b in rows:
        hi = lc.maximize_linear(a, cons)
        lo = lc.maximize_linear([-v for v in a], cons)
        if hi.bounded and lo.bounded and abs(hi.optimum + b) <= eps and abs(-lo.optimum + b) <= eps:
            inside += 1
    return n - inside


def codewords(arr: CoorientedArrangement, **kw) -> list[Codeword]:
    return [r.codeword for r in enumerate_regions(arr, **kw)]


def missing_codewords(arr: CoorientedArrangement, **kw) -> set[Codeword]:
    present = set(codewords(arr, **kw))
    return {c for c in itertools.product((-1, 1), repeat=len(arr)) if c not in present}


def bounded_regions(arr: CoorientedArrangement, **kw) -> list[RegionInfo]:
    return [r for r in enumerate_regions(arr, **kw) if r.bounded]


def simplex_vertices(arr: CoorientedArrangement, *, exact: bool = False) -> list[tuple]:
    """For ``n + 1`` hyperplanes: vertex ``i`` is the meet of all but hyperplane ``i``."""
    m, n = len(arr), arr.dim
    if m != n + 1:
        raise ValueError("simplex vertices need exactly n + 1 hyperplanes")
    verts = []
    for i in range(m):
        idx = [j for j in range(m) if j != i]
        try:
            v = lc.solve_linear([arr.hyperplanes[j].normal for j in idx],
                                [-arr.hyperplanes[j].offset for j in idx], exact=exact)
        except SingularError as exc:
            raise NotGeneric(str(exc)) from exc
        verts.append(tuple(v))
    return verts


def bounded_region(arr: CoorientedArrangement, *, exact: bool = False) -> RegionInfo:
    """The unique bounded region of ``n + 1`` generic hyperplanes.

    Its closure is the simplex spanned by the ``n + 1`` vertices; the centroid
    is an interior witness.  Fewer hyperplanes give :class:`NoneBounded`.
    """
    m, n = len(arr), arr.dim
    if m <= n:
        raise NoneBounded(f"{m} generic hyperplanes in R^{n} bound no region")
    if m > n + 1:
        raise ValueError("several bounded regions; use bounded_regions()")
    _require_generic(arr, DEFAULT_CAP, exact)
    verts = simplex_vertices(arr, exact=exact)
    k = len(verts)
    centroid = tuple(sum(v[d] for v in verts) / k for d in range(n))
    code = arr.sign_vector(centroid)
    if 0 in code:
        raise NotGeneric("degenerate simplex")
    return RegionInfo(code, True, centroid)


# --- induced arrangement ----------------------------------------------------


def _chart(normal, exact: bool):
    """Orthonormal (orthogonal in exact mode) basis of the normal's complement.

    Gram-Schmidt over the standard basis after the normal, in index order.
    """
    n = len(normal)
    conv = Fraction if exact else float
    basis = [[conv(v) for v in normal]]
    out = []
    for k in range(n):
        v = [conv(0)] * n
        v[k] = conv(1)
        for u in basis:
            f = lc.dot(v, u) / lc.dot(u, u)
            v = [a - f * b for a, b in zip(v, u)]
        nrm2 = lc.dot(v, v)
        if (nrm2 > 0) if exact else (nrm2 > 1e-12):
            if not exact:
                s = math.sqrt(nrm2)
                v = [a / s for a in v]
            basis.append(v)
            out.append(v)
        if len(out) == n - 1:
            break
    return out


def induced_arrangement(arr: CoorientedArrangement, i: int, *, exact: bool = False,
                        check_generic: bool = True) -> CoorientedArrangement:
    """Traces of the other hyperplanes on hyperplane ``i``, as an arrangement in R^{n-1}."""
    n = arr.dim
    if n < 2:
        raise ValueError("induced arrangement needs n >= 2")
    if check_generic:
        _require_generic(arr, DEFAULT_CAP, exact)
    h = arr.hyperplanes[i]
    conv = Fraction if exact else float
    a = [conv(v) for v in h.normal]
    origin = [-conv(h.offset) * v / lc.dot(a, a) for v in a]
    chart = _chart(a, exact)
    hs = []
    for j, g in enumerate(arr.hyperplanes):
        if j == i:
            continue
        gn = [conv(v) for v in g.normal]
        normal = tuple(lc.dot(gn, u) for u in chart)
        offset = lc.dot(gn, origin) + conv(g.offset)
        hs.append(Hyperplane(normal, offset))
    return CoorientedArrangement(tuple(hs), n - 1)


# --- counting formulas ------------------------------------------------------


def _checked(value: int) -> int:
    if value > _INT64_MAX:
        raise CountOverflow(f"count {value} exceeds signed 64-bit range")
    return value


def region_counts(m: int, n: int) -> tuple[int, int]:
    """(regions, bounded regions) of m generic hyperplanes in R^n."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    if m <= n:
        return _checked(2**m), 0
    return _checked(sum(comb(m, k) for k in range(n + 1))), _checked(comb(m - 1, n))


def facet_statistics(m: int, n: int) -> tuple[int, Fraction]:
    """(total facets, average facets per region) for m > n generic hyperplanes.

    Each hyperplane carries one facet per region of its induced arrangement,
    and each facet borders two regions.
    """
    if not m > n >= 1:
        raise ValueError("facet statistics need m > n >= 1")
    total = _checked(m * sum(comb(m - 1, k) for k in range(n)))
    regions, _ = region_counts(m, n)
    return total, Fraction(2 * total, regions)


def random_generic(m: int, n: int, rng, *, attempts: int = 100) -> CoorientedArrangement:
    """Arrangement with standard-normal coefficients, redrawn until generic."""
    for _ in range(attempts):
        W = rng.standard_normal((m, n))
        b = rng.standard_normal(m)
        arr = CoorientedArrangement.from_arrays(W.tolist(), b.tolist())
        if is_generic(arr, cap=max(m, DEFAULT_CAP)):
            return arr
    raise NotGeneric("could not draw a generic arrangement")


def iter_codes(m: int) -> Iterable[Codeword]:
    return itertools.product((-1, 1), repeat=m)
