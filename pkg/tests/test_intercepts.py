import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deadneuron.arrangement import CoorientedArrangement, Hyperplane, bounded_region, codewords, random_generic, \
    shared_face_dimension
from deadneuron.errors import NotGeneric, UndefinedIntercepts
from deadneuron.intercepts import (NOT_IN_HP, TIE, InterceptTuple, NotInHp, classify, classify_batch, in_h1,
                                   in_h1_batch, intercept_tuple, p_plus_batch, p_plus_intercepts)

from conftest import TRIANGLE_B, TRIANGLE_W


def plane(q, offset=-1.0):
    """Hyperplane whose intercept tuple is ``q``."""
    return Hyperplane(tuple(-offset / v for v in q), offset)


def test_intercept_examples():
    assert intercept_tuple(Hyperplane((-2.0, -2.0, -2.0), 1.0)).values == (0.5, 0.5, 0.5)
    assert intercept_tuple(Hyperplane((1.0, -2.0), 4.0)).values == (-4.0, 2.0)
    with pytest.raises(UndefinedIntercepts):
        intercept_tuple(Hyperplane((1.0, 0.0), 1.0))
    with pytest.raises(UndefinedIntercepts):
        intercept_tuple(Hyperplane((1.0, 1.0), 0.0))
    with pytest.raises(UndefinedIntercepts):
        InterceptTuple((1.0, 0.0))


def test_classify_examples():
    p = InterceptTuple((1.0, 1.0, 1.0))
    c = classify(p, plane((0.5, 0.25, 0.1)))
    assert c.tag == "S" and c.index == 0
    assert c.lambdas == pytest.approx((0.5, 0.25, 0.1))
    assert classify(p, plane((0.5, 0.5, 0.1))).tag == "P"
    c = classify(InterceptTuple((2.0, -3.0)), plane((1.0, -6.0)))
    assert c.tag == "S" and c.index == 1
    assert c.lambdas == pytest.approx((0.5, 2.0))
    assert str(c) == "S1"


def test_classify_outside():
    p = InterceptTuple((1.0, 1.0))
    assert classify(p, plane((1.0, -1.0))) is None
    assert classify(p, Hyperplane((1.0, 0.0), 1.0)) is None
    with pytest.raises(NotInHp):
        in_h1(p, plane((1.0, -1.0)))


def test_in_h1_examples():
    p = InterceptTuple((1.0, 1.0, 1.0))
    assert in_h1(p, plane((0.5, 0.3, 0.2)))
    assert not in_h1(p, plane((1.5, 0.3, 0.2)))
    assert in_h1(p, plane((1.0, 1.0, 1.0)))


def test_p_plus_worked_example():
    p = p_plus_intercepts(TRIANGLE_W, TRIANGLE_B)
    assert p.values == pytest.approx((1.0, 1.0, 1.0))


def test_p_plus_singular():
    with pytest.raises(NotGeneric):
        p_plus_intercepts([[1, 0], [2, 0], [0, 1]], [1, 1, 1])
    with pytest.raises(ValueError):
        p_plus_intercepts([[1, 0], [0, 1]], [1, 1])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_p_plus_signs_match_bounded_code(n, seed):
    arr = random_generic(n + 1, n, np.random.default_rng(seed))
    W = np.array(arr.normals)
    b = np.array(arr.offsets)
    p = p_plus_intercepts(W, b)
    assert p.signs() == bounded_region(arr).codeword
    assert (-p).values == pytest.approx(p_plus_intercepts(-W, -b).values)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_negative_intercepts_count_shared_face(n, seed):
    arr = random_generic(n + 1, n, np.random.default_rng(seed))
    plus = (1,) * (n + 1)
    if plus not in set(codewords(arr)):
        return
    code_b = bounded_region(arr).codeword
    k = shared_face_dimension(arr, plus, code_b)
    p = p_plus_intercepts(np.array(arr.normals), np.array(arr.offsets))
    assert sum(v < 0 for v in p.values) == n - k


def test_partition_total_and_ties_rare():
    rng = np.random.default_rng(0)
    N, n = 1_000_000, 3
    p = rng.uniform(-1, 1, (N, n))
    s = np.sign(p)
    # hyperplanes in H_p: intercepts with the signs of p
    q = s * rng.uniform(0.01, 2.0, (N, n))
    b = rng.uniform(-1, 1, N)
    w = -b[:, None] / q
    code, lam = classify_batch(p, w, b)
    assert np.all(code != NOT_IN_HP)
    assert np.all((code == TIE) | ((code >= 0) & (code < n)))
    assert np.mean(code == TIE) <= 1e-4
    # the S index is the strict argmax
    ok = code >= 0
    assert np.all(np.argmax(lam[ok], axis=1) == code[ok])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from([-1, 1]), min_size=2, max_size=4), st.integers(0, 2**32 - 1))
def test_sign_flip_invariance(flips, seed):
    rng = np.random.default_rng(seed)
    n = len(flips)
    e = np.array(flips, float)
    p = InterceptTuple(tuple(rng.uniform(0.1, 2, n) * rng.choice([-1, 1], n)))
    q = np.array(p.values) * rng.uniform(0.1, 2, n)
    a = classify(p, plane(q))
    p2 = InterceptTuple(tuple(e * np.array(p.values)))
    b = classify(p2, plane(e * q))
    assert (a.tag, a.index) == (b.tag, b.index)


def test_batch_matches_scalar():
    rng = np.random.default_rng(1)
    N, n = 400, 3
    W1 = rng.uniform(-1, 1, (N, n + 1, n))
    b1 = rng.uniform(-1, 1, (N, n + 1))
    w = rng.uniform(-1, 1, (N, n + 1))
    b = rng.uniform(-1, 1, N)
    P = p_plus_batch(W1, b1)
    code, _ = classify_batch(P, w, b)
    h1 = in_h1_batch(P, w, b)
    inside = 0
    for i in range(N):
        p = p_plus_intercepts(W1[i], b1[i])
        assert p.values == pytest.approx(tuple(P[i]), rel=1e-9, abs=1e-9)
        c = classify(p, Hyperplane(tuple(w[i]), float(b[i])))
        if c is None:
            assert code[i] == NOT_IN_HP and not h1[i]
            continue
        inside += 1
        assert code[i] == (TIE if c.tag == "P" else c.index)
        assert h1[i] == in_h1(p, Hyperplane(tuple(w[i]), float(b[i])))
    assert inside > 20
