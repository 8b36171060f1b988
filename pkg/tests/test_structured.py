from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from umdsum.dyadic import DyadicRational, KappaInstance, Permutation, kappa
from umdsum.structured import (
    LINEAR_EXAMPLE,
    NON_PSEUDO_COMPOSITION,
    PSEUDO_LINEAR_EXAMPLE,
    PSEUDO_WITH_BAD_INVERSE,
    ASetQuery,
    a_set,
    a_set_size,
    diagonal_quantity,
    diagonal_quantity_bruteforce,
    gf2_rank,
    identity_alpha_ratio,
    is_linear,
    is_pseudo_linear,
    identity_aset_size,
    alternating_power_sum,
    level_histogram,
    less_equal_counts,
    linear_from_gf2_matrix,
    pseudo_linear_profile,
    random_invertible_gf2,
    random_linear,
    random_pseudo_linear,
)


def test_fixture_verdicts():
    assert is_linear(LINEAR_EXAMPLE)
    assert not is_linear(PSEUDO_LINEAR_EXAMPLE)
    assert is_pseudo_linear(PSEUDO_LINEAR_EXAMPLE)
    assert not is_pseudo_linear(NON_PSEUDO_COMPOSITION)
    assert is_pseudo_linear(PSEUDO_WITH_BAD_INVERSE)
    assert not is_pseudo_linear(PSEUDO_WITH_BAD_INVERSE.inverse())
    assert is_linear(Permutation.identity(4))


def test_composition_order_matters():
    other = PSEUDO_LINEAR_EXAMPLE.compose(LINEAR_EXAMPLE)
    assert NON_PSEUDO_COMPOSITION == LINEAR_EXAMPLE.compose(PSEUDO_LINEAR_EXAMPLE)
    assert is_pseudo_linear(other)


def test_bit_reversal_matrix():
    rev = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    assert linear_from_gf2_matrix(rev) == LINEAR_EXAMPLE
    assert linear_from_gf2_matrix(np.eye(4, dtype=int)).is_identity()


def test_gf2_rank():
    assert gf2_rank(np.array([[1, 1], [1, 1]])) == 1
    assert gf2_rank(np.eye(5, dtype=int)) == 5
    with pytest.raises(ValueError):
        linear_from_gf2_matrix(np.array([[1, 1], [1, 1]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_random_linear_is_linear_and_pseudo_linear(n, seed):
    rng = np.random.default_rng(seed)
    assert gf2_rank(random_invertible_gf2(n, rng)) == n
    p = random_linear(n, rng)
    assert is_linear(p)
    assert is_pseudo_linear(p)


def test_linear_implies_pseudo_linear_exhaustively_n3():
    count = 0
    for bits in itertools.product((0, 1), repeat=9):
        m = np.array(bits).reshape(3, 3)
        if gf2_rank(m) == 3:
            count += 1
            assert is_pseudo_linear(linear_from_gf2_matrix(m))
    assert count == 168


def test_random_pseudo_linear():
    p = random_pseudo_linear(4, np.random.default_rng(0))
    assert p is not None and is_pseudo_linear(p) and not is_linear(p)


def brute_pseudo_linear(p: Permutation) -> bool:
    return all(
        kappa(p[i ^ j] ^ p[0]) == kappa(p[i] ^ p[j]) for i in range(p.size) for j in range(p.size)
    )


@given(st.integers(1, 3).flatmap(lambda n: st.permutations(range(1 << n))))
def test_pseudo_linear_matches_definition(image):
    p = Permutation(image)
    assert is_pseudo_linear(p) == brute_pseudo_linear(p)
    assert is_linear(p) == all(p[i ^ j] == p[i] ^ p[j] for i in range(p.size) for j in range(p.size))


# ---------------------------------------------------------------- A-sets


def test_aset_validation():
    with pytest.raises(ValueError):
        ASetQuery("equal", "less", 2, 3, 0, 0).validate(4)
    with pytest.raises(ValueError):
        ASetQuery("less", "less", 1, 6, 0, 0).validate(4)
    with pytest.raises(ValueError):
        ASetQuery("about", "less", 3, 3, 0, 0).validate(4)
    ASetQuery("less", "less", 1, 5, 0, 0).validate(4)


def test_aset_matches_definition():
    inst = KappaInstance.for_level(4)
    p = Permutation(np.random.default_rng(1).permutation(16).tolist())
    q = ASetQuery("equal", "less", 3, 4, 5, 9)
    expected = [j for j in range(16) if kappa(5 ^ j) == 3 and kappa(9 ^ p[j]) < 4]
    assert a_set(inst, p, q).tolist() == expected
    assert a_set_size(inst, p, q) == len(expected)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_identity_aset_closed_form(n):
    inst = KappaInstance.for_level(n)
    ident = Permutation.identity(n)
    for i in range(inst.size):
        for h in range(inst.size):
            if i == h:
                continue
            for k in range(3, n + 1):
                for l in range(3, n + 1):
                    q = ASetQuery("equal", "equal", k, l, i, h)
                    assert a_set_size(inst, ident, q) == identity_aset_size(i, h, k, l)


def test_identity_aset_cases():
    # kappa(i xor h) = 4 for (i, h) = (0, 8)
    assert identity_aset_size(0, 8, 3, 4) == 4
    assert identity_aset_size(0, 8, 5, 5) == 16
    assert identity_aset_size(0, 8, 3, 5) == 0


def test_identity_level_three_counts():
    for n in (3, 4, 5):
        inst = KappaInstance.for_level(n)
        rows = np.arange(inst.size)
        hist = level_histogram(inst, Permutation.identity(n), rows, np.zeros_like(rows))
        cnt = less_equal_counts(hist)
        # row 0 sees all of {j : kappa(j) = 3} once k > 3; every row does at k = n + 1
        assert all(cnt[0, k, 3] == 4 for k in range(4, n + 2))
        assert np.all(cnt[:, n + 1, 3] == 4)


def test_level_histogram_totals():
    inst = KappaInstance.for_level(4)
    p = Permutation(np.random.default_rng(2).permutation(16).tolist())
    rows = np.arange(16)
    hist = level_histogram(inst, p, rows, rows[::-1].copy())
    assert np.all(hist.sum(axis=(1, 2)) == 16)


def test_profiles_of_pseudo_linear_fixtures():
    for p in (PSEUDO_LINEAR_EXAMPLE, PSEUDO_WITH_BAD_INVERSE, LINEAR_EXAMPLE):
        prof = pseudo_linear_profile(KappaInstance.for_level(3), p, 3)
        assert prof.consistent, prof.problems


# ---------------------------------------------------------------- diagonal quantity


@pytest.mark.parametrize("n", [3, 4])
def test_diagonal_fast_matches_bruteforce(n):
    inst = KappaInstance.for_level(n)
    rng = np.random.default_rng(n)
    for p in [Permutation.identity(n), random_linear(n, rng), Permutation(rng.permutation(1 << n).tolist())]:
        assert diagonal_quantity(inst, p, check=False) == diagonal_quantity_bruteforce(inst, p)


def test_diagonal_identity_values():
    # Frozen from the first run of the implementation.
    ratios = {3: 0.0, 4: 0.0625, 5: 0.0559, 6: 0.0765, 7: 0.0620, 8: 0.0756}
    for n, expected in ratios.items():
        v = float(diagonal_quantity(KappaInstance.for_level(n), Permutation.identity(n))) / math.sqrt(n)
        assert v == pytest.approx(expected, abs=5e-5)


# ---------------------------------------------------------------- alternating sums


def test_alternating_sum_examples():
    res = alternating_power_sum([0, 1, 2, 3, 4], 0)
    assert res.lam == Fraction(11, 16)
    assert res.m_prime == 0 and res.bounds_hold
    flat = alternating_power_sum([2, 2, 2, 2], 0)
    assert flat.lam == 0 and flat.m_prime is None


@given(st.lists(st.integers(0, 1), min_size=1, max_size=14), st.integers(0, 6), st.data())
def test_alternating_sum_bounds(steps, start, data):
    q = list(itertools.accumulate([start] + steps[1:]))
    m = data.draw(st.integers(0, len(q) - 1))
    res = alternating_power_sum(q, m)
    assert abs(res.lam.to_fraction()) <= 2
    assert res.bounds_hold


def test_alternating_sum_validation():
    with pytest.raises(ValueError):
        alternating_power_sum([0, 2], 0)
    with pytest.raises(ValueError):
        alternating_power_sum([0, 1], 5)


# ---------------------------------------------------------------- identity ratios


def test_identity_ratio_column():
    rows = {r.n: r for r in identity_alpha_ratio(range(2, 10))}
    expected = {2: 0.3536, 3: 0.3428, 4: 0.3359, 5: 0.3319, 6: 0.3285, 7: 0.3263, 8: 0.3246, 9: 0.3232}
    for n, v in expected.items():
        assert rows[n].ratio == pytest.approx(v, abs=5e-5)
    assert rows[9].value == DyadicRational(993, 10)
    with pytest.raises(ValueError):
        identity_alpha_ratio([15])
