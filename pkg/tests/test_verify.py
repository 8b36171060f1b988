from __future__ import annotations

import pytest

from umdsum.checks import MAX_STORED_COUNTEREXAMPLES, CheckReport, PropertyResult
from umdsum.verify import martingale_suite, pair_gap_suite, run_suites


def test_property_result_records_counterexamples():
    res = PropertyResult("demo")
    for k in range(20):
        res.record(k % 2 == 0, k)
    assert res.cases == 20 and res.failures == 10
    assert res.counterexamples == [1, 3, 5, 7, 9, 11, 13, 15, 17, 19][:MAX_STORED_COUNTEREXAMPLES]
    assert res.line().startswith("[FAIL] demo: 20 cases, 10 failures; first: 1")


def test_bulk_and_report():
    report = CheckReport("t")
    report.add(PropertyResult("ok")).add_bulk(5, [])
    assert report.passed and report.lines() == ["[PASS] ok: 5 cases"]
    report.add(PropertyResult("bad")).add_bulk(3, ["x"])
    assert not report.passed


def test_small_pair_gap_suite():
    report = pair_gap_suite(cases=200, levels=range(2, 5))
    assert report.passed, report.lines()


def test_martingale_suite():
    report = martingale_suite(instances=10)
    assert report.passed, report.lines()


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suites("nonsense")
