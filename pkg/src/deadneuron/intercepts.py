"""Axis intercepts of hyperplanes in the first-layer image space.

For a hyperplane ``w @ y + b = 0`` in R^k the intercept on axis ``j`` is
``-b / w_j``.  Given a reference tuple ``p`` (the intercepts of the image
hyperplane of the first pre-activation map when the first layer is one wider
than the input), hyperplanes whose intercepts share the signs of ``p`` are
split by the ratios ``lambda_j = q_j / p_j``: class ``S_j`` when ``lambda_j`` is
the strict maximum, class ``P`` on ties.

Scalar functions take :class:`~deadneuron.arrangement.Hyperplane` objects;
the ``*_batch`` variants work on stacked numpy arrays for the estimators.
Positions are zero-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linear_core as lc
from .arrangement import Hyperplane
from .errors import DeadNeuronError, NotGeneric, SingularError, UndefinedIntercepts

TIE_RTOL = 1e-9


class NotInHp(DeadNeuronError):
    """The hyperplane is not in the sign class of the reference tuple."""


@dataclass(frozen=True)
class InterceptTuple:
    values: tuple

    def __post_init__(self):
        if any(abs(v) <= lc.EPS for v in self.values):
            raise UndefinedIntercepts("intercept tuple has a (near) zero entry")

    def __len__(self):
        return len(self.values)

    def __neg__(self):
        return InterceptTuple(tuple(-v for v in self.values))

    def signs(self) -> tuple:
        return tuple(1 if v > 0 else -1 for v in self.values)


@dataclass(frozen=True)
class PartitionClass:
    tag: str  # "P" or "S"
    index: int | None  # argmax position for "S"
    lambdas: tuple

    def __str__(self):
        return "P" if self.tag == "P" else f"S{self.index}"


def intercept_tuple(h: Hyperplane, eps: float = lc.EPS) -> InterceptTuple:
    if abs(h.offset) <= eps or any(abs(w) <= eps for w in h.normal):
        raise UndefinedIntercepts("hyperplane misses an axis or contains the origin")
    return InterceptTuple(tuple(-h.offset / w for w in h.normal))


def _ties(lams, rtol):
    for i in range(len(lams)):
        for j in range(i + 1, len(lams)):
            if abs(lams[i] - lams[j]) <= rtol * max(lams[i], lams[j]):
                return True
    return False


def classify(p: InterceptTuple, h: Hyperplane, *, rtol: float = TIE_RTOL) -> PartitionClass | None:
    """Partition class of ``h`` relative to ``p``; ``None`` when ``h`` is outside ``H_p``."""
    try:
        q = intercept_tuple(h)
    except UndefinedIntercepts:
        return None
    if len(q) != len(p):
        raise ValueError("intercept tuples differ in length")
    if any((a > 0) != (b > 0) for a, b in zip(q.values, p.values)):
        return None
    lams = tuple(a / b for a, b in zip(q.values, p.values))
    if _ties(lams, rtol):
        return PartitionClass("P", None, lams)
    return PartitionClass("S", max(range(len(lams)), key=lams.__getitem__), lams)


def in_h1(p: InterceptTuple, h: Hyperplane, *, eps: float = lc.EPS) -> bool:
    """Whether ``h`` is in ``H_p`` with every ratio at most one."""
    cls = classify(p, h)
    if cls is None:
        raise NotInHp("hyperplane is not in H_p")
    return all(lam <= 1 + eps for lam in cls.lambdas)


def p_plus_intercepts(W1, b1) -> InterceptTuple:
    """Intercepts of the image hyperplane of ``x -> W1 @ x + b1`` (``n + 1`` rows, ``n`` columns).

    Axis ``i`` is met at the image of the vertex where every other
    pre-activation vanishes.
    """
    W1 = [list(r) for r in W1]
    b1 = list(b1)
    m = len(W1)
    if m != len(W1[0]) + 1:
        raise ValueError("need exactly one more row than columns")
    vals = []
    for i in range(m):
        idx = [j for j in range(m) if j != i]
        try:
            v = lc.solve_linear([W1[j] for j in idx], [-b1[j] for j in idx])
        except SingularError as exc:
            raise NotGeneric(str(exc)) from exc
        vals.append(lc.dot(W1[i], v) + b1[i])
    return InterceptTuple(tuple(vals))


# --- batched ----------------------------------------------------------------

NOT_IN_HP = -1
TIE = -2


def p_plus_batch(W1: np.ndarray, b1: np.ndarray) -> np.ndarray:
    """Stacked :func:`p_plus_intercepts`; ``W1`` has shape ``(N, n + 1, n)``."""
    N, m, n = W1.shape
    out = np.empty((N, m))
    for i in range(m):
        idx = [j for j in range(m) if j != i]
        v = np.linalg.solve(W1[:, idx, :], -b1[:, idx, None])[..., 0]
        out[:, i] = np.einsum("ij,ij->i", W1[:, i, :], v) + b1[:, i]
    return out


def classify_batch(p: np.ndarray, w: np.ndarray, b: np.ndarray, *, rtol: float = TIE_RTOL):
    """Class codes for each row: position of ``S``, :data:`TIE` for ``P`` or
    :data:`NOT_IN_HP`.  Also returns the ratio array (``nan`` outside ``H_p``)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        q = -b[:, None] / w
        lam = q / p
    defined = (np.abs(w) > lc.EPS).all(axis=1) & (np.abs(b) > lc.EPS)
    inside = defined & (lam > 0).all(axis=1)
    lam = np.where(inside[:, None], lam, np.nan)
    srt = np.sort(np.where(inside[:, None], lam, 0.0), axis=1)
    tie = (np.diff(srt, axis=1) <= rtol * srt[:, 1:]).any(axis=1) if lam.shape[1] > 1 \
        else np.zeros(len(lam), dtype=bool)
    code = np.where(inside, np.argmax(np.where(inside[:, None], lam, -np.inf), axis=1), NOT_IN_HP)
    code = np.where(inside & tie, TIE, code)
    return code, lam


def in_h1_batch(p: np.ndarray, w: np.ndarray, b: np.ndarray, *, eps: float = lc.EPS) -> np.ndarray:
    """Rows in ``H_p`` with all ratios at most one (``False`` outside ``H_p``)."""
    code, lam = classify_batch(p, w, b)
    return (code != NOT_IN_HP) & (np.nan_to_num(lam, nan=np.inf) <= 1 + eps).all(axis=1)
