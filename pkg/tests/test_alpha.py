from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from umdsum.alpha import (
    SignedMap,
    alpha,
    alpha_int,
    alpha_scale,
    alpha_signed_map,
    map_prefix_sup,
    map_to_permutation,
    row_sup,
    subset_permutation,
)
from umdsum.dyadic import KappaInstance, Permutation, matrix_entry


def brute_alpha(n: int, perm: Permutation) -> Fraction:
    """Direct definition: mean over rows of the largest |prefix| in image order."""
    inst = KappaInstance.for_level(n)
    size = 1 << n
    total = Fraction(0)
    for i in range(size):
        best = Fraction(0)
        for h in range(size):
            s = sum(matrix_entry(inst, i, j).to_fraction() for j in range(size) if perm[j] <= h)
            best = max(best, abs(s))
        total += best
    return total / size


def perms(max_n: int = 4):
    return st.integers(1, max_n).flatmap(lambda n: st.permutations(range(1 << n)).map(Permutation))


@pytest.mark.parametrize("n, i, expected", [(2, 2, Fraction(3, 4)), (2, 0, Fraction(1, 4)), (3, 5, Fraction(1))])
def test_row_sup_examples(n, i, expected):
    assert row_sup(KappaInstance.for_level(n), Permutation.identity(n), i) == expected


@pytest.mark.parametrize(
    "n, expected",
    [(1, Fraction(3, 8)), (2, Fraction(1, 2)), (3, Fraction(19, 32)), (4, Fraction(43, 64)),
     (5, Fraction(95, 128)), (6, Fraction(103, 128)), (7, Fraction(221, 256)),
     (8, Fraction(235, 256)), (9, Fraction(993, 1024))],
)
def test_identity_values(n, expected):
    assert alpha(KappaInstance.for_level(n), Permutation.identity(n)).value == expected


@settings(max_examples=60, deadline=None)
@given(perms(3))
def test_alpha_matches_definition(p):
    assert alpha(KappaInstance.for_level(p.n), p).value == brute_alpha(p.n, p)


@given(perms(5))
def test_alpha_result_is_consistent(p):
    inst = KappaInstance.for_level(p.n)
    res = alpha(inst, p)
    assert res.n == p.n
    assert sum(r.to_fraction() for r in res.per_row) / inst.size == res.value
    assert res.value.to_fraction() == Fraction(alpha_int(inst, p.order), 1 << alpha_scale(inst))
    assert res.value >= 0


def test_alpha_level_mismatch():
    with pytest.raises(ValueError):
        alpha(KappaInstance.for_level(3), Permutation.identity(2))


def test_full_prefix_switch_only_adds_the_row_sum():
    inst = KappaInstance.for_level(3)
    p = Permutation.identity(3)
    assert alpha(inst, p, include_full_prefix=False).value <= alpha(inst, p).value


# ---------------------------------------------------------------- signed maps


def test_signed_map_identity_reduces_to_alpha():
    inst = KappaInstance.for_level(2)
    m = SignedMap.from_permutation(Permutation.identity(2))
    assert alpha_signed_map(inst, m) == Fraction(1, 2)


@given(st.integers(1, 3).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.integers(0, (1 << n) - 1), min_size=1 << n, max_size=1 << n),
        st.lists(st.sampled_from((1, -1)), min_size=1 << n, max_size=1 << n),
    )
))
def test_signed_map_negation_invariant(args):
    n, image, signs = args
    inst = KappaInstance.for_level(n)
    m = SignedMap(n, tuple(image), tuple(signs))
    assert alpha_signed_map(inst, m) == alpha_signed_map(inst, m.negated())


def test_signed_map_n1_sup_dominates_identity():
    inst = KappaInstance.for_level(1)
    ident = alpha(inst, Permutation.identity(1)).value
    values = [
        alpha_signed_map(inst, SignedMap(1, image, signs))
        for image in itertools.product(range(2), repeat=2)
        for signs in itertools.product((1, -1), repeat=2)
    ]
    assert max(values) >= ident


def test_signed_map_validation():
    with pytest.raises(ValueError):
        SignedMap(2, (0, 1, 2), (1, 1, 1))
    with pytest.raises(ValueError):
        SignedMap(1, (0, 1), (1, 0))


# ---------------------------------------------------------------- spreading constructions


def test_map_to_permutation_examples():
    assert map_to_permutation((2, 2, 0, 1)).image == (2, 3, 0, 1)
    assert map_to_permutation((0, 0, 0, 0)).image == (0, 1, 2, 3)
    assert map_to_permutation((3, 1, 0, 2)).image == (3, 1, 0, 2)


def test_subset_permutation_examples():
    ident = Permutation.identity(2)
    assert subset_permutation([1, 3], ident).image == (2, 0, 3, 1)
    assert subset_permutation(range(4), ident) == ident
    assert subset_permutation([], ident) == ident


@given(st.integers(1, 3).flatmap(
    lambda n: st.tuples(
        st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=7), min_size=1 << n, max_size=1 << n),
        st.lists(st.integers(0, (1 << n) - 1), min_size=1 << n, max_size=1 << n),
    )
))
def test_spreading_fibers_dominates(args):
    values, image = args
    rho = map_to_permutation(image)
    assert map_prefix_sup(values, image) <= map_prefix_sup(values, rho.image)


@settings(max_examples=40, deadline=None)
@given(perms(4), st.data())
def test_subset_first_dominates_rows(p, data):
    inst = KappaInstance.for_level(p.n)
    members = data.draw(st.sets(st.integers(0, inst.size - 1)))
    rho = subset_permutation(members, p)
    E = inst.matrix()
    order = np.asarray(p.order)
    mask = np.array([j in members for j in range(inst.size)], dtype=np.int64)
    lhs = np.abs(np.cumsum(E[:, order] * mask[order], axis=1)).max(axis=1)
    rhs = np.abs(np.cumsum(E[:, list(rho.order)], axis=1)).max(axis=1)
    assert np.all(lhs <= rhs)
