"""Small dense linear algebra and a two-phase simplex kernel.

Everything here works on plain Python sequences and is generic over the
scalar type: floats by default, :class:`fractions.Fraction` when
``exact=True``.  Instance sizes in this package are tiny (a handful of
variables, a few dozen constraints), so the simplex favours determinism
(Bland's rule) over speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NumericalInstability, SingularError

EPS = 1e-9

GE = ">="
LE = "<="

INFEASIBLE = "infeasible"
BOUNDED = "bounded"
UNBOUNDED = "unbounded"

_MAX_PIVOTS = 10_000


@dataclass(frozen=True)
class AffineMap:
    """``x -> matrix @ x + offset``."""

    matrix: tuple[tuple[float, ...], ...]
    offset: tuple[float, ...]

    def __post_init__(self):
        if len(self.matrix) != len(self.offset):
            raise DimensionMismatch("offset length must equal the row count")
        widths = {len(r) for r in self.matrix}
        if len(widths) > 1:
            raise DimensionMismatch("ragged matrix")

    @classmethod
    def from_arrays(cls, matrix, offset) -> "AffineMap":
        return cls(tuple(tuple(float(v) for v in row) for row in matrix),
                   tuple(float(v) for v in offset))

    @property
    def rows(self) -> int:
        return len(self.matrix)

    @property
    def cols(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0

    def __call__(self, x):
        if len(x) != self.cols:
            raise DimensionMismatch(f"expected length {self.cols}, got {len(x)}")
        return [dot(row, x) + c for row, c in zip(self.matrix, self.offset)]


@dataclass(frozen=True)
class LpResult:
    status: str
    optimum: float | Fraction | None = None
    argmax: tuple | None = None
    ray: tuple | None = None

    @property
    def infeasible(self) -> bool:
        return self.status == INFEASIBLE

    @property
    def bounded(self) -> bool:
        return self.status == BOUNDED

    @property
    def unbounded(self) -> bool:
        return self.status == UNBOUNDED


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _scalar(exact: bool):
    return Fraction if exact else float


def _convert(values, exact: bool):
    conv = _scalar(exact)
    out = []
    for v in values:
        if not exact and not math.isfinite(v):
            raise ValueError(f"non-finite entry {v!r}")
        out.append(conv(v))
    return out


def solve_linear(matrix: Sequence[Sequence[float]], rhs: Sequence[float], *,
                 exact: bool = False, eps: float = EPS) -> list:
    """Solve a square system by Gaussian elimination with partial pivoting.

    Raises :class:`SingularError` when a pivot falls below ``eps`` times the
    largest entry of the matrix (exact zero in exact mode).
    """
    n = len(matrix)
    if n == 0 or any(len(row) != n for row in matrix):
        raise DimensionMismatch("matrix must be square and non-empty")
    if len(rhs) != n:
        raise DimensionMismatch("rhs length must equal the matrix size")
    aug = [_convert(row, exact) + _convert([r], exact) for row, r in zip(matrix, rhs)]
    scale = max(abs(v) for row in aug for v in row[:n])
    tol = 0 if exact else eps * (scale if scale > 0 else 1.0)

    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(aug[r][col]))
        if abs(aug[piv][col]) <= tol:
            raise SingularError(f"pivot {col} below tolerance")
        aug[col], aug[piv] = aug[piv], aug[col]
        prow = aug[col]
        p = prow[col]
        for r in range(col + 1, n):
            f = aug[r][col] / p
            if f:
                row = aug[r]
                for k in range(col, n + 1):
                    row[k] -= f * prow[k]

    x = [0] * n
    for r in range(n - 1, -1, -1):
        s = aug[r][n] - sum(aug[r][k] * x[k] for k in range(r + 1, n))
        x[r] = s / aug[r][r]
    return x


def rank(matrix: Sequence[Sequence[float]], *, exact: bool = False, eps: float = EPS) -> int:
    """Row rank by elimination; rows are normalised first in float mode."""
    rows = [_convert(r, exact) for r in matrix]
    if not rows:
        return 0
    if not exact:
        rows = [[v / m for v in r] if (m := max(abs(v) for v in r)) > 0 else r for r in rows]
    ncols = len(rows[0])
    tol = 0 if exact else eps
    rk = 0
    for col in range(ncols):
        if rk == len(rows):
            break
        piv = max(range(rk, len(rows)), key=lambda r: abs(rows[r][col]))
        if abs(rows[piv][col]) <= tol:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        prow = rows[rk]
        for r in range(rk + 1, len(rows)):
            f = rows[r][col] / prow[col]
            if f:
                rows[r] = [a - f * b for a, b in zip(rows[r], prow)]
        rk += 1
    return rk


# --- simplex ---------------------------------------------------------------
#
# The tableau lives in a numpy array: float64 normally, dtype=object holding
# Fractions in exact mode, so both paths share one implementation.


def _normalise_constraint(c):
    if len(c) == 2:
        normal, offset = c
        sense = GE
    else:
        normal, offset, sense = c
    if sense not in (GE, LE):
        raise ValueError(f"unknown sense {sense!r}")
    return normal, offset, sense


def _pivot(T, Z, basis, r, q):
    T[r] = T[r] / T[r, q]
    col = T[:, q].copy()
    col[r] = 0
    T -= np.outer(col, T[r])
    Z -= np.outer(Z[:, q], T[r])
    basis[r] = q


def _run(T, Z, zi, basis, nallowed, eps):
    """Maximise with Bland's rule on reduced-cost row ``Z[zi]``.

    Returns ``None`` at optimum, else the entering column of an unbounded
    direction.
    """
    for _ in range(_MAX_PIVOTS):
        cand = np.flatnonzero(Z[zi, :nallowed] > eps)
        if cand.size == 0:
            return None
        q = int(cand[0])
        colq = T[:, q]
        rows = np.flatnonzero(colq > eps)
        if rows.size == 0:
            return q
        ratios = T[rows, -1] / colq[rows]
        best = min(zip(ratios.tolist(), (basis[i] for i in rows), rows.tolist()))
        _pivot(T, Z, basis, best[2], q)
    raise NumericalInstability("pivot limit reached")


def maximize_linear(objective: Sequence[float], constraints, *, full_space: bool = False,
                    exact: bool = False, eps: float = EPS) -> LpResult:
    """Maximise ``objective @ x`` over ``{x : normal_i @ x + offset_i (>=|<=) 0}``.

    ``constraints`` holds ``(normal, offset)`` pairs (sense ``>=``) or
    ``(normal, offset, sense)`` triples.  ``x`` is free.  The result is one
    of infeasible / bounded (optimum, argmax) / unbounded (ray).
    """
    n = len(objective)
    if n == 0:
        raise DimensionMismatch("objective must be non-empty")
    cons = [_normalise_constraint(c) for c in constraints]
    if not cons and not full_space:
        raise ValueError("no constraints given; pass full_space=True for R^n")
    dtype = object if exact else float
    zero = Fraction(0) if exact else 0.0
    tol = 0 if exact else eps
    c = np.array(_convert(objective, exact), dtype=dtype)

    if not cons:
        if all(v == 0 for v in c):
            return LpResult(BOUNDED, zero, tuple([zero] * n))
        return LpResult(UNBOUNDED, ray=tuple(c.tolist()))

    m = len(cons)
    A = np.empty((m, n), dtype=dtype)
    beta = np.empty(m, dtype=dtype)
    for i, (normal, offset, sense) in enumerate(cons):
        if len(normal) != n:
            raise DimensionMismatch(f"constraint normal has length {len(normal)}, expected {n}")
        A[i] = _convert(normal, exact)
        beta[i] = _convert([offset], exact)[0]
        if sense == LE:
            A[i] = -A[i]
            beta[i] = -beta[i]
    if not exact:
        s = np.maximum(np.abs(A).max(axis=1), np.abs(beta))
        s[s == 0] = 1.0
        A /= s[:, None]
        beta /= s

    # Columns: x+ (n), x- (n), slack (m), artificials, rhs.
    # Row i:  a.x+ - a.x- - s_i = -beta_i, negated when that rhs is negative.
    nbase = 2 * n + m
    flip = np.array([-b < 0 for b in beta])
    art_rows = np.flatnonzero(~flip)
    nart = art_rows.size
    T = np.zeros((m, nbase + nart + 1), dtype=dtype)
    if exact:
        T[:] = Fraction(0)
    T[:, :n] = A
    T[:, n:2 * n] = -A
    T[np.arange(m), 2 * n + np.arange(m)] = -1
    T[:, -1] = -beta
    T[flip] = -T[flip]
    basis = [2 * n + i for i in range(m)]
    for k, i in enumerate(art_rows):
        T[i, nbase + k] = 1
        basis[i] = nbase + k

    # Z[0]: phase-1 reduced costs, Z[1]: phase-2 reduced costs; last column is
    # minus the objective value.
    Z = np.zeros((2, T.shape[1]), dtype=dtype)
    if exact:
        Z[:] = Fraction(0)
    Z[1, :n] = c
    Z[1, n:2 * n] = -c
    if nart:
        Z[0] = T[art_rows].sum(axis=0)
        Z[0, nbase:nbase + nart] = 0
        _run(T, Z, 0, basis, nbase, tol)
        feas_tol = 0 if exact else eps * max(1.0, float(np.abs(T[:, -1]).max()))
        if Z[0, -1] > feas_tol:
            return LpResult(INFEASIBLE)
        # Drive remaining artificials out of the basis; drop redundant rows.
        keep = []
        for i in range(T.shape[0]):
            if basis[i] >= nbase:
                nz = np.flatnonzero(np.abs(T[i, :nbase]) > tol)
                if nz.size == 0:
                    continue
                _pivot(T, Z, basis, i, int(nz[0]))
            keep.append(i)
        if len(keep) < T.shape[0]:
            T = T[keep]
            basis = [basis[i] for i in keep]

    q = _run(T, Z, 1, basis, nbase, tol)
    if q is not None:
        y = [zero] * nbase
        y[q] = Fraction(1) if exact else 1.0
        for i, bv in enumerate(basis):
            y[bv] = -T[i, q]
        ray = [y[j] - y[n + j] for j in range(n)]
        if not exact:
            s = max(abs(v) for v in ray)
            ray = [float(v / s) + 0.0 for v in ray]
            _check_ray(A, c, ray, eps)
        return LpResult(UNBOUNDED, ray=tuple(ray))

    y = [zero] * nbase
    for i, bv in enumerate(basis):
        y[bv] = T[i, -1]
    x = [y[j] - y[n + j] for j in range(n)]
    if exact:
        return LpResult(BOUNDED, dot(c, x), tuple(x))
    x = [float(v) + 0.0 for v in x]
    _check_point(A, beta, x, eps)
    return LpResult(BOUNDED, float(dot(c, x)), tuple(x))


def _check_point(A, beta, x, eps):
    scale = max(1.0, max(abs(v) for v in x))
    if np.any(A @ np.asarray(x) + beta < -1e3 * eps * scale):
        raise NumericalInstability("argmax violates a constraint")


def _check_ray(A, c, ray, eps):
    r = np.asarray(ray)
    if float(c @ r) <= eps:
        raise NumericalInstability("ray does not increase the objective")
    if np.any(A @ r < -1e3 * eps):
        raise NumericalInstability("ray leaves the feasible set")
