from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from umdsum.alpha import alpha, alpha_int
from umdsum.dyadic import KappaInstance, Permutation
from umdsum.local_search import (
    OptimizerConfig,
    _variants,
    delta_cycle,
    gamma_cycle,
    improve_step,
    level_pairs,
    optimize,
    partner_block,
    perturbation_bound,
    pair_gap,
    run_restart,
    starting_order,
    swap_normalize,
)

SCHEMA = json.loads((Path(__file__).resolve().parents[1] / "docs" / "search_report.schema.json").read_text())


def normalized_cases(max_n: int = 5):
    """(perm, i0) with perm[i0] < perm[i0 xor 1]."""

    def build(n):
        return st.tuples(st.permutations(range(1 << n)), st.integers(0, (1 << n) - 1)).map(
            lambda t: (swap_normalize(Permutation(t[0]), t[1]), t[1])
        )

    return st.integers(2, max_n).flatmap(build)


def test_gamma_examples():
    assert gamma_cycle(0, 3, 2).image == (0, 2, 3, 1)
    assert gamma_cycle(1, 3, 2).image == (0, 1, 3, 2)
    assert gamma_cycle(1, 2, 2).is_identity()


def test_delta_examples():
    assert delta_cycle(0, 3, 2).image == (2, 0, 1, 3)
    assert delta_cycle(1, 3, 2).image == (0, 2, 1, 3)
    assert delta_cycle(1, 2, 2).is_identity()


def test_cycle_argument_checks():
    with pytest.raises(ValueError):
        gamma_cycle(2, 2, 2)
    with pytest.raises(ValueError):
        delta_cycle(0, 4, 2)


@given(normalized_cases())
def test_variants_make_the_pair_adjacent(case):
    perm, i0 = case
    partner, pg, pd = _variants(perm, i0, None, "adopted")
    for q in (pg, pd):
        assert q[partner] == q[i0] + 1
    # gamma keeps i0 in place, delta keeps the partner in place
    assert pg[i0] == perm[i0]
    assert pd[partner] == perm[partner]
    h, i = perm[i0], perm[partner]
    assert pg == gamma_cycle(h, i, perm.n).compose(perm)
    assert pd == delta_cycle(h, i, perm.n).compose(perm)


def test_improve_step_degenerate_pair():
    inst = KappaInstance.for_level(2)
    out = improve_step(inst, Permutation([1, 2, 0, 3]), 0)
    assert out.chosen == "original"
    assert out.value_after == out.value_before


def test_improve_step_example_after_normalization():
    inst = KappaInstance.for_level(2)
    with pytest.raises(ValueError):
        improve_step(inst, Permutation([3, 0, 2, 1]), 2)
    perm = swap_normalize(Permutation([3, 0, 2, 1]), 2)
    assert perm.image == (3, 0, 1, 2)
    out = improve_step(inst, perm, 2)
    assert out.value_after == max(out.value_before, out.gamma_value, out.delta_value)
    assert out.value_after == Fraction(1, 2)


@settings(max_examples=60, deadline=None)
@given(normalized_cases(4))
def test_improve_step_takes_best_of_three(case):
    perm, i0 = case
    inst = KappaInstance.for_level(perm.n)
    out = improve_step(inst, perm, i0)
    assert out.value_after == max(out.value_before, out.gamma_value, out.delta_value)
    assert alpha(inst, out.permutation).value == out.value_after
    tied = improve_step(inst, perm, i0, accept_ties=True)
    assert tied.value_after == out.value_after


@settings(max_examples=150, deadline=None)
@given(normalized_cases(6))
def test_gap_nonnegative(case):
    perm, i0 = case
    inst = KappaInstance.for_level(perm.n)
    assert pair_gap(inst, perm, i0) >= 0
    lhs, rhs = perturbation_bound(inst, perm, i0)
    assert lhs <= rhs


def test_gap_zero_for_adjacent_pair():
    inst = KappaInstance.for_level(3)
    perm = Permutation([0, 1, 4, 5, 2, 3, 6, 7])
    assert pair_gap(inst, perm, 2) == 0


def test_inverse_reading_fails_somewhere():
    inst = KappaInstance.for_level(3)
    rng = np.random.default_rng(7)
    found = False
    for _ in range(200):
        i0 = int(rng.integers(8))
        perm = swap_normalize(Permutation(rng.permutation(8).tolist()), i0)
        if pair_gap(inst, perm, i0, reading="inverse") < 0:
            found = True
            break
    assert found


def test_gap_reading_validation():
    inst = KappaInstance.for_level(2)
    with pytest.raises(ValueError):
        pair_gap(inst, Permutation([0, 2, 1, 3]), 0, reading="other")


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 5).flatmap(lambda n: st.tuples(
    st.permutations(range(1 << n)), st.integers(0, n - 1), st.integers(0, (1 << n) - 1), st.integers(0, (1 << n) - 1)
)))
def test_partner_block_gap_nonnegative(args):
    image, level, r1, r2 = args
    n = len(image).bit_length() - 1
    half = 1 << level
    base = (r1 >> (level + 1)) << (level + 1)
    a = base + r1 % half
    b = base + half + r2 % half
    perm = Permutation(image)
    if perm[a] > perm[b]:
        a, b = b, a
    assert pair_gap(KappaInstance.for_level(n), perm, a, partner=b) >= 0


def test_partner_block():
    assert list(partner_block(4, 5)) == [4, 5]
    assert list(partner_block(1, 2)) == [0, 1, 2, 3]
    assert list(partner_block(9, 14)) == list(range(8, 16))


def test_level_pairs():
    a, b = level_pairs(3, 0)
    assert list(zip(a, b)) == [(0, 1), (2, 3), (4, 5), (6, 7)]
    a, b = level_pairs(3, 2)
    assert len(a) == 16 and all(x < 4 <= y for x, y in zip(a, b))


@given(normalized_cases(5))
def test_swap_normalize(case):
    perm, i0 = case
    assert perm[i0] < perm[i0 ^ 1]


# ---------------------------------------------------------------- optimizer


def test_starting_order_is_reproducible():
    assert np.array_equal(starting_order(4, 3, 5), starting_order(4, 3, 5))
    assert not np.array_equal(starting_order(4, 3, 5), starting_order(4, 3, 6))


@pytest.mark.parametrize("n", [3, 4])
def test_incremental_matches_reference_sweep(n):
    inst = KappaInstance.for_level(n)
    for restart in range(6):
        fast = run_restart(inst, OptimizerConfig(n, seed=2), restart)
        slow = run_restart(inst, OptimizerConfig(n, seed=2, incremental=False), restart)
        assert fast.total == slow.total
        assert np.array_equal(fast.order, slow.order)
        assert alpha_int(inst, fast.order) == fast.total


def test_restart_never_decreases():
    inst = KappaInstance.for_level(5)
    for restart in range(10):
        res = run_restart(inst, OptimizerConfig(5, seed=11), restart)
        assert res.total >= res.start_total


def test_optimize_n4_reaches_identity_value():
    report = optimize(KappaInstance.for_level(4), OptimizerConfig(4, restarts=100, seed=0))
    assert report.best_value == Fraction(43, 64)
    assert 1 <= report.extra["success_count"] <= 100
    assert len(report.extra["per_restart"]) == 100
    jsonschema.validate(report.to_json(), SCHEMA)


def test_optimize_is_deterministic_across_threads():
    inst = KappaInstance.for_level(5)
    a = optimize(inst, OptimizerConfig(5, restarts=40, seed=4, parallelism=1))
    b = optimize(inst, OptimizerConfig(5, restarts=40, seed=4, parallelism=3))
    assert a.dumps() == b.dumps()


def test_optimizer_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(3, restarts=0)
    with pytest.raises(ValueError):
        OptimizerConfig(3, block_levels=3)
    assert OptimizerConfig(4).block_levels == 3
    with pytest.raises(ValueError):
        optimize(KappaInstance.for_level(3), OptimizerConfig(4))
