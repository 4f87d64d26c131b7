import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deadneuron.arrangement import (CoorientedArrangement, Hyperplane, bounded_region, bounded_regions,
                                    code_str, codewords, count_facets, enumerate_regions, facet_statistics,
                                    induced_arrangement, is_bounded_region, is_generic, missing_codewords,
                                    negate, parse_code, random_generic, region_counts, shared_face_dimension)
from deadneuron.errors import CountOverflow, NoneBounded, NotGeneric, SizeLimitExceeded


def _grid_codes(arr, lo=-20, hi=20, k=801):
    g = np.linspace(lo, hi, k)
    X, Y = np.meshgrid(g, g)
    P = np.c_[X.ravel(), Y.ravel()]
    Z = P @ np.array(arr.normals, float).T + np.array(arr.offsets, float)
    Z = Z[(np.abs(Z) > 1e-9).all(axis=1)]
    return {tuple(r) for r in np.where(Z > 0, 1, -1).tolist()}


# --- genericity ---------------------------------------------------------------

def test_triangle_is_generic(triangle):
    assert is_generic(triangle)
    assert is_generic(triangle, exact=True)


def test_duplicate_not_generic():
    arr = CoorientedArrangement.from_arrays([[1, 0], [1, 0], [0, 1]], [-1, -1, 0])
    assert not is_generic(arr)


def test_parallel_pair_not_generic():
    arr = CoorientedArrangement.from_arrays([[1, 0], [1, 0]], [0, -1])
    assert not is_generic(arr)


def test_concurrent_lines_not_generic():
    arr = CoorientedArrangement.from_arrays([[1, 0], [0, 1], [1, 1]], [0, 0, 0])
    assert not is_generic(arr)


def test_generic_cap():
    rng = np.random.default_rng(0)
    arr = CoorientedArrangement.from_arrays(rng.standard_normal((21, 2)), rng.standard_normal(21))
    with pytest.raises(SizeLimitExceeded):
        is_generic(arr)
    with pytest.raises(SizeLimitExceeded):
        enumerate_regions(arr)


def test_zero_normal_rejected():
    with pytest.raises(ValueError):
        Hyperplane((0.0, 0.0), 1.0)


# --- enumeration ------------------------------------------------------------------

def test_four_lines_eleven_regions():
    arr = CoorientedArrangement.from_arrays([[1, 0], [0, 1], [1, 1], [1, -2]], [-0.3, 0.2, -1.1, 0.7])
    regs = enumerate_regions(arr)
    assert len(regs) == 11
    assert sum(r.bounded for r in regs) == 3


def test_single_hyperplane_r3():
    arr = CoorientedArrangement.from_arrays([[1, 2, 3]], [1])
    regs = enumerate_regions(arr)
    assert [r.codeword for r in regs] == [(-1,), (1,)]
    assert not any(r.bounded for r in regs)


def test_triangle_regions_match_grid(triangle):
    codes = set(codewords(triangle))
    assert len(codes) == 7
    assert codes == _grid_codes(triangle)
    assert missing_codewords(triangle) == {(-1, -1, -1)}
    assert missing_codewords(triangle, exact=True) == {(-1, -1, -1)}


def test_witness_strictly_inside(triangle):
    for r in enumerate_regions(triangle):
        slack = [c * h.value(r.witness) for c, h in zip(r.codeword, triangle.hyperplanes)]
        assert min(slack) > 1e-7


def test_codewords_lexicographic():
    rng = np.random.default_rng(3)
    arr = random_generic(6, 2, rng)
    codes = codewords(arr)
    assert codes == sorted(codes)


def test_exact_mode_matches_float():
    rng = np.random.default_rng(4)
    for m, n in [(4, 2), (5, 3), (3, 1)]:
        arr = random_generic(m, n, rng)
        fl = enumerate_regions(arr)
        ex = enumerate_regions(arr, exact=True)
        assert [r.codeword for r in fl] == [r.codeword for r in ex]
        assert [r.bounded for r in fl] == [r.bounded for r in ex]


def test_bounded_methods_agree():
    rng = np.random.default_rng(5)
    for m, n in [(5, 2), (6, 3), (4, 1)]:
        arr = random_generic(m, n, rng)
        a = [r.bounded for r in enumerate_regions(arr, bounded_method="recession")]
        b = [r.bounded for r in enumerate_regions(arr, bounded_method="axes")]
        assert a == b


def test_non_generic_enumeration_raises():
    arr = CoorientedArrangement.from_arrays([[1, 0], [1, 0]], [0, -1])
    with pytest.raises(NotGeneric):
        enumerate_regions(arr)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_counts_match_formula(m, n, seed):
    if m > 9 and n == 4:
        m = 9  # keeps the property run short; full sizes are in the acceptance suite
    arr = random_generic(m, n, np.random.default_rng(seed))
    regs = enumerate_regions(arr)
    total, bounded = region_counts(m, n)
    assert len(regs) == total
    assert sum(r.bounded for r in regs) == bounded
    for r in regs:
        slack = [c * h.value(r.witness) for c, h in zip(r.codeword, arr.hyperplanes)]
        assert min(slack) > 0


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_order_equivariance(m, n, seed):
    rng = np.random.default_rng(seed)
    arr = random_generic(m, n, rng)
    perm = rng.permutation(m)
    base = set(codewords(arr))
    moved = set(codewords(arr.permuted(perm)))
    assert moved == {tuple(c[i] for i in perm) for c in base}


# --- counting ------------------------------------------------------------------------

@pytest.mark.parametrize("m,n,expected", [(4, 2, (11, 3)), (3, 3, (8, 0)), (5, 2, (16, 6)), (1, 5, (2, 0))])
def test_region_counts(m, n, expected):
    assert region_counts(m, n) == expected


def test_region_counts_overflow():
    with pytest.raises(CountOverflow):
        region_counts(64, 64)
    with pytest.raises(CountOverflow):
        facet_statistics(100, 40)
    with pytest.raises(ValueError):
        region_counts(0, 2)


# --- bounded regions ---------------------------------------------------------------

def test_triangle_bounded_region(triangle):
    info = bounded_region(triangle)
    assert info.codeword == (1, 1, 1) and info.bounded
    assert info.witness == pytest.approx((4 / 3, 4 / 3))
    exact = bounded_region(triangle, exact=True)
    assert exact.witness == (Fraction(4, 3), Fraction(4, 3))


def test_two_lines_no_bounded_region():
    arr = CoorientedArrangement.from_arrays([[1, 0], [0, 1]], [0, 0])
    with pytest.raises(NoneBounded):
        bounded_region(arr)


def test_three_lines_one_bounded():
    rng = np.random.default_rng(7)
    for _ in range(20):
        arr = random_generic(3, 2, rng)
        bs = bounded_regions(arr)
        assert len(bs) == 1
        assert bs[0].codeword == bounded_region(arr).codeword


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_missing_codeword_is_negated_simplex(n, seed):
    arr = random_generic(n + 1, n, np.random.default_rng(seed))
    assert missing_codewords(arr) == {negate(bounded_region(arr).codeword)}


def test_no_missing_when_few_hyperplanes():
    rng = np.random.default_rng(8)
    for m, n in [(1, 1), (2, 3), (3, 3), (2, 2)]:
        assert missing_codewords(random_generic(m, n, rng)) == set()


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_negated_bounded_codes_absent(n, m, seed):
    if m <= n + 1:
        m = n + 2
    arr = random_generic(m, n, np.random.default_rng(seed))
    regs = enumerate_regions(arr)
    present = {r.codeword for r in regs}
    for r in regs:
        if r.bounded:
            assert negate(r.codeword) not in present


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_negative_signs_count_shared_face(n, seed):
    arr = random_generic(n + 1, n, np.random.default_rng(seed))
    plus = (1,) * (n + 1)
    if plus not in set(codewords(arr)):
        return
    code_b = bounded_region(arr).codeword
    k = shared_face_dimension(arr, plus, code_b)
    assert k >= 0
    assert sum(1 for c in code_b if c < 0) == n - k


def test_shared_face_dimension_triangle(triangle):
    assert shared_face_dimension(triangle, (1, 1, 1), (1, 1, 1)) == 2
    assert shared_face_dimension(triangle, (1, 1, 1), (-1, 1, 1)) == 1
    assert shared_face_dimension(triangle, (1, 1, 1), (-1, -1, 1)) == 0
    assert shared_face_dimension(triangle, (1, 1, -1), (-1, -1, 1)) == -1


# --- induced arrangements ---------------------------------------------------------

def test_induced_three_lines():
    arr = random_generic(3, 2, np.random.default_rng(9))
    ind = induced_arrangement(arr, 0)
    assert ind.dim == 1 and len(ind) == 2
    assert is_generic(ind)


def test_induced_region_count():
    arr = random_generic(5, 3, np.random.default_rng(10))
    for i in range(5):
        ind = induced_arrangement(arr, i)
        assert is_generic(ind)
        assert len(enumerate_regions(ind)) == region_counts(4, 2)[0]


def test_induced_points_lie_on_both_planes():
    arr = random_generic(4, 3, np.random.default_rng(11))
    ind = induced_arrangement(arr, 2)
    h = arr.hyperplanes[2]
    a = np.array(h.normal)
    origin = -h.offset * a / (a @ a)
    # the chart maps y in R^2 to origin + B y; check a witness of each induced region
    for r in enumerate_regions(ind):
        signs = ind.sign_vector(r.witness)
        assert signs == r.codeword


def test_induced_exact_matches_float():
    arr = CoorientedArrangement.from_arrays([[1, 2, 0], [0, 1, 1], [1, 0, 3], [2, -1, 1]], [1, -2, 3, 1])
    fl = codewords(induced_arrangement(arr, 1))
    ex = codewords(induced_arrangement(arr, 1, exact=True), exact=True)
    assert fl == ex


def test_induced_needs_dimension_two():
    arr = CoorientedArrangement.from_arrays([[1.0], [2.0]], [0.0, 1.0])
    with pytest.raises(ValueError):
        induced_arrangement(arr, 0)


# --- facets -------------------------------------------------------------------------

def test_facet_statistics_small():
    assert facet_statistics(4, 2) == (16, Fraction(32, 11))


def test_facet_statistics_brute_force():
    rng = np.random.default_rng(12)
    for m in range(2, 9):
        for n in range(1, 4):
            if m <= n:
                continue
            arr = random_generic(m, n, rng)
            regs = enumerate_regions(arr, facets=True)
            total, avg = facet_statistics(m, n)
            assert sum(r.facet_count for r in regs) == 2 * total
            assert Fraction(sum(r.facet_count for r in regs), len(regs)) == avg


def test_facet_limit_and_monotone():
    _, avg = facet_statistics(200, 2)
    assert avg == Fraction(80000, 20101)
    assert abs(avg - 4) < 0.05
    vals = [facet_statistics(m, 2)[1] for m in range(50, 201)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    for n in range(1, 5):
        vals = [facet_statistics(m, n)[1] for m in range(n + 12, n + 60)]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def test_count_facets_triangle(triangle):
    assert count_facets(triangle, (1, 1, 1)) == 3
    assert count_facets(triangle, (-1, 1, 1)) == 3
    assert count_facets(triangle, (-1, -1, 1)) == 2


# --- serialization -------------------------------------------------------------------

def test_json_round_trip():
    rng = np.random.default_rng(13)
    arr = random_generic(5, 3, rng)
    back = CoorientedArrangement.from_json(arr.to_json())
    assert back == arr
    rec = json.loads(arr.to_json())
    assert set(rec) == {"dim", "hyperplanes"}
    assert set(rec["hyperplanes"][0]) == {"normal", "offset"}


def test_code_strings():
    assert code_str((1, -1, 1)) == "+-+"
    assert parse_code("+-+") == (1, -1, 1)
    with pytest.raises(ValueError):
        parse_code("+0")
    assert negate((1, -1)) == (-1, 1)


def test_is_bounded_region_methods(triangle):
    for method in ("recession", "axes"):
        assert is_bounded_region(triangle, (1, 1, 1), method=method)
        assert not is_bounded_region(triangle, (-1, 1, 1), method=method)
    with pytest.raises(ValueError):
        is_bounded_region(triangle, (1, 1, 1), method="nope")
