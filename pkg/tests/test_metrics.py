import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from grandlab.metrics import (SUMMARY_COLUMNS, CellStats, SweepSummary, TrialRecord, accumulate, aggregate,
                              bler_halfwidth, merge_cells, summary_csv, summary_jsonl, write_rows)


def _rec(tests, err, variant="orb", eb=5.0, eta=None, adj=0, us=None):
    return TrialRecord(eb, variant, "decoded" if not err else "abandoned", tests, err, eta, (), us, adj)


def test_bler_and_mean_tests():
    recs = [_rec(1, i < 2) for i in range(10)]
    c = aggregate(recs).cell("orb", 5.0)
    assert c.bler == 0.2 and c.frames == 10 and c.block_errors == 2
    c = aggregate([_rec(1, False), _rec(3, False)]).cell("orb", 5.0)
    assert c.mean_tests == 2.0
    assert c.tests_ci == pytest.approx(1.96 * math.sqrt(2.0 / 2))


def test_eta_adjust_and_timing_means():
    recs = [_rec(2, False, eta=0.1, adj=4, us=10.0), _rec(2, False, adj=2), _rec(2, False, eta=0.3, us=30.0)]
    c = aggregate(recs).cell("orb", 5.0)
    assert c.mean_eta == pytest.approx(0.2) and c.eta_samples == 2
    assert c.mean_adjust_iters == pytest.approx(2.0)
    assert c.mean_elapsed_us == pytest.approx(20.0)
    c = aggregate([_rec(1, False)]).cell("orb", 5.0)
    assert math.isnan(c.mean_eta) and c.mean_elapsed_us is None


def test_record_and_cell_errors():
    with pytest.raises(ValueError):
        _rec(0, False)
    with pytest.raises(ValueError):
        aggregate([])
    with pytest.raises(ValueError):
        aggregate([_rec(1, False)], expected=[("orb", 5.0), ("cdf", 5.0)])
    aggregate([_rec(1, False)], expected=[("orb", 5)])


@given(st.lists(st.tuples(st.integers(1, 50), st.booleans(), st.sampled_from(["orb", "cdf"]),
                          st.sampled_from([4.0, 5.0])), min_size=1, max_size=60),
       st.randoms(use_true_random=False), st.integers(0, 60))
def test_aggregation_order_and_partition_invariant(items, rnd, cut):
    recs = [_rec(t, e, v, eb) for t, e, v, eb in items]
    base = summary_csv(aggregate(recs))
    shuffled = list(recs)
    rnd.shuffle(shuffled)
    assert summary_csv(aggregate(shuffled)) == base
    parts = merge_cells(accumulate(shuffled[:cut]), accumulate(shuffled[cut:]))
    assert summary_csv(SweepSummary(parts)) == base


def test_merge_cells_sums():
    a, b = CellStats(), CellStats()
    a.add(_rec(3, True))
    b.add(_rec(5, False, eta=0.5))
    m = a.merge(b)
    assert (m.frames, m.block_errors, m.tests_sum, m.eta_samples) == (2, 1, 8, 1)


def test_bler_halfwidth():
    assert bler_halfwidth(0, 100) == 0.0
    assert bler_halfwidth(50, 100) == pytest.approx(1.96 * 0.05)
    # Clopper-Pearson is wider than zero even with no errors, and bounded
    hw = bler_halfwidth(0, 100, exact=True)
    assert hw == pytest.approx(1 - 0.025 ** (1 / 100), rel=1e-9)
    assert 0 < bler_halfwidth(3, 100, exact=True) < 0.1
    assert bler_halfwidth(100, 100, exact=True) == pytest.approx(1 - 0.025 ** (1 / 100), rel=1e-9)


def test_csv_and_jsonl_layout():
    recs = [_rec(2, False, "orb", 5.0), _rec(4, True, "cdf", 4.0, eta=0.25), _rec(1, False, "cdf", 5.0)]
    s = aggregate(recs)
    lines = summary_csv(s).splitlines()
    assert lines[0] == ",".join(SUMMARY_COLUMNS)
    assert [ln.split(",")[:2] for ln in lines[1:]] == [["cdf", "4.0"], ["cdf", "5.0"], ["orb", "5.0"]]
    row = dict(zip(SUMMARY_COLUMNS, lines[1].split(",")))
    assert row["mean_eta"] == "0.25" and row["mean_elapsed_us"] == "" and row["bler"] == "1.0"
    js = [json.loads(x) for x in summary_jsonl(s).splitlines()]
    assert list(js[0]) == SUMMARY_COLUMNS
    assert js[2]["mean_eta"] is None and js[0]["block_errors"] == 1


def test_write_rows(tmp_path):
    rows = [{"a": 1, "b": 0.5}, {"a": 2, "b": None}]
    p = tmp_path / "x.csv"
    text = write_rows(rows, ["a", "b"], str(p))
    assert p.read_text() == text == "a,b\n1,0.5\n2,\n"
    assert write_rows(rows, ["a"], None, "jsonl") == '{"a": 1}\n{"a": 2}\n'
    with pytest.raises(ValueError):
        write_rows(rows, ["a"], None, "xml")
