from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from umdsum.alpha import alpha
from umdsum.dyadic import DyadicRational, KappaInstance, Permutation
from umdsum.exact_search import (
    SearchLimitError,
    best_completion,
    branch_and_bound,
    completion_bound,
    exhaustive_search,
    signed_map_supremum,
)
from umdsum.report import SearchReport, ratio_decimal

SCHEMA = json.loads((Path(__file__).resolve().parents[1] / "docs" / "search_report.schema.json").read_text())


@pytest.mark.parametrize("n, expected", [(2, Fraction(1, 2)), (3, Fraction(19, 32))])
def test_exhaustive_matches_identity(n, expected):
    report = exhaustive_search(n)
    assert report.best_value == expected
    assert report.ratio_to_identity == 1
    assert report.witness.is_identity()
    assert report.complete and report.mode == "enumeration"
    assert report.nodes_explored == math.factorial(1 << n)


def test_exhaustive_n1_is_flagged():
    report = exhaustive_search(1)
    assert report.best_value == Fraction(3, 8)
    assert report.flags and "0.25" in report.flags[0]


def test_swap_symmetry_gives_same_result():
    a = exhaustive_search(3)
    b = exhaustive_search(3, use_swap_symmetry=True)
    assert a.best_value == b.best_value and a.witness == b.witness
    assert b.nodes_explored + b.pruned == 40320
    assert b.nodes_explored == 40320 // 16


@pytest.mark.parametrize("n", [0, 4, 5])
def test_exhaustive_guard(n):
    with pytest.raises(SearchLimitError):
        exhaustive_search(n)


@pytest.mark.parametrize("use_swap", [True, False])
def test_bnb_equals_exhaustive_n3(use_swap):
    report = branch_and_bound(3, use_swap_symmetry=use_swap)
    assert report.complete
    assert report.best_value == exhaustive_search(3).best_value
    assert alpha(KappaInstance.for_level(3), report.witness).value == report.best_value


def test_bnb_small_budget_is_incomplete():
    report = branch_and_bound(2, node_budget=10)
    assert not report.complete
    assert report.best_value <= Fraction(1, 2)
    assert any("budget" in f for f in report.flags)


def test_bnb_guards():
    with pytest.raises(SearchLimitError):
        branch_and_bound(5)
    with pytest.raises(ValueError):
        branch_and_bound(3, node_budget=0)


@settings(max_examples=80, deadline=None)
@given(st.permutations(range(8)), st.integers(0, 8))
def test_completion_bound_admissible(order, depth):
    inst = KappaInstance.for_level(3)
    partial = list(order[:depth])
    assert completion_bound(inst, partial) >= best_completion(inst, partial)


def test_completion_of_full_order_is_its_value():
    inst = KappaInstance.for_level(2)
    p = Permutation([2, 0, 3, 1])
    assert best_completion(inst, p.order) == alpha(inst, p).value
    assert completion_bound(inst, p.order) == alpha(inst, p).value


def test_signed_map_sandwich():
    for n in (1, 2):
        a = exhaustive_search(n).best_value
        s = signed_map_supremum(n)
        assert a <= s <= a * 2
    assert signed_map_supremum(1) == Fraction(3, 4)
    assert signed_map_supremum(2) == Fraction(13, 16)
    with pytest.raises(SearchLimitError):
        signed_map_supremum(3)


def test_signed_map_witness_attains_value():
    from umdsum.alpha import alpha_signed_map

    value, witness = signed_map_supremum(1, return_witness=True)
    assert alpha_signed_map(KappaInstance.for_level(1), witness) == value


# ---------------------------------------------------------------- reports


@pytest.mark.parametrize("report", [exhaustive_search(2), branch_and_bound(3), branch_and_bound(2, node_budget=10)])
def test_reports_validate_against_schema(report):
    jsonschema.validate(report.to_json(), SCHEMA)
    jsonschema.validate(report.to_json(include_timing=True), SCHEMA)


def test_report_json_is_deterministic():
    assert exhaustive_search(3).dumps() == exhaustive_search(3).dumps()
    assert "wall_time" not in exhaustive_search(2).to_json()


def test_report_rejects_bad_fields():
    with pytest.raises(ValueError):
        SearchReport(2, DyadicRational(1, 1), Permutation.identity(2), 1, 0, mode="annealing")
    with pytest.raises(ValueError):
        SearchReport(2, DyadicRational(1, 1), Permutation.identity(2), 0, 0, mode="enumeration")


def test_ratio_decimal():
    assert ratio_decimal(DyadicRational(1, 1), DyadicRational(1, 1)) == "1.0"
    assert ratio_decimal(DyadicRational(769, 10), DyadicRational(95, 7)) == "1.0118421052…"
    assert ratio_decimal(DyadicRational(3, 2), DyadicRational(1, 1)) == "1.5"


def test_batch_evaluation_agrees_with_alpha():
    from umdsum.exact_search import _batch_totals
    from umdsum.alpha import alpha_int

    inst = KappaInstance.for_level(3)
    rng = np.random.default_rng(3)
    images = np.array([rng.permutation(8) for _ in range(20)])
    totals = _batch_totals(inst, images)
    assert [int(t) for t in totals] == [alpha_int(inst, Permutation(img).order) for img in images]


@pytest.mark.slow
def test_bnb_n4_completes_at_identity_value():
    report = branch_and_bound(4, node_budget=10**10)
    assert report.complete
    assert report.best_value == Fraction(43, 64)
    assert report.witness.is_identity()
