from __future__ import annotations

import pytest

from chanrace.detectors import make_detector
from chanrace.explorer import differential, explore_all
from chanrace.hbset import RAW, WAR, WAW, Race
from chanrace.runtime import FirstScheduler, Rule, enabled_steps, initial_config, run, step
from chanrace.syntax import parse
from chanrace.vc import (
    BOTTOM,
    DjitRecord,
    Epoch,
    FastTrackRecord,
    VectorClock,
    epoch_leq,
    vc_read_djit,
    vc_read_fasttrack,
    vc_write_djit,
    vc_write_fasttrack,
)

from .conftest import load


def V(**entries: int) -> VectorClock:
    return VectorClock(entries)


def test_join_is_pointwise_max():
    assert V(p=1, q=2).join(V(p=2, q=1)) == V(p=2, q=2)


def test_bottom_join_bottom():
    assert BOTTOM.join(BOTTOM) == BOTTOM
    assert BOTTOM.leq(V(p=1))


def test_zero_entries_are_dropped():
    assert VectorClock({"p": 0, "q": 1}) == V(q=1)
    assert V(q=1).nonzero() == 1


def test_inc_and_set():
    assert V(p=1).inc("p") == V(p=2)
    assert V(p=1).set("q", 3) == V(p=1, q=3)


def test_epoch_order():
    assert epoch_leq(Epoch(2, "p"), V(p=2))
    assert not epoch_leq(Epoch(3, "p"), V(p=2))
    assert epoch_leq(None, BOTTOM)


def test_djit_read_unaware_of_write_is_raw():
    rec = DjitRecord(writes=V(p1=2))
    with pytest.raises(Race) as info:
        vc_read_djit("p2", V(p1=1, p2=1), rec, "z")
    assert info.value.kind == RAW


def test_djit_read_records_own_clock():
    rec = vc_read_djit("p", V(p=4, q=1), DjitRecord(), "z")
    assert rec.reads == V(p=4)


def test_djit_write_prefers_war():
    rec = DjitRecord(writes=V(q=1), reads=V(r=1))
    with pytest.raises(Race) as info:
        vc_write_djit("p", V(p=1), rec, "z")
    assert info.value.kind == WAR


def test_djit_write_unaware_of_write_is_waw():
    with pytest.raises(Race) as info:
        vc_write_djit("p", V(p=1), DjitRecord(writes=V(q=1)), "z")
    assert info.value.kind == WAW


def test_fasttrack_write_stores_epoch():
    rec = vc_write_fasttrack("p", V(p=6, q=1), FastTrackRecord(), "z")
    assert rec.write == Epoch(6, "p")


def test_fasttrack_read_inflates_for_concurrent_readers():
    rec = vc_read_fasttrack("p", V(p=2), FastTrackRecord(), "z")
    assert rec.read == Epoch(2, "p")
    rec = vc_read_fasttrack("q", V(q=3), rec, "z")
    assert rec.read == V(p=2, q=3)
    # Never deflates, even when a later reader has seen both.
    rec = vc_read_fasttrack("r", V(p=2, q=3, r=1), rec, "z")
    assert isinstance(rec.read, VectorClock)


def test_fasttrack_ordered_reads_keep_epoch():
    rec = vc_read_fasttrack("p", V(p=2), FastTrackRecord(), "z")
    rec = vc_read_fasttrack("q", V(p=2, q=1), rec, "z")
    assert rec.read == Epoch(1, "q")


def test_fasttrack_write_unaware_of_read_is_war():
    rec = FastTrackRecord(read=Epoch(2, "q"))
    with pytest.raises(Race) as info:
        vc_write_fasttrack("p", V(p=1), rec, "z")
    assert info.value.kind == WAR


# ---------------------------------------------------------------------------
# Channel and lock mapping, driven through the interpreter
# ---------------------------------------------------------------------------


def test_release_then_acquire_transfers_clock():
    p = parse("var z = 0; lock l; main { acquire(l); z := 1; release(l); go { acquire(l); let x = load z in stop } }")
    res = run(p, "vc-djit", FirstScheduler())
    assert res.outcome.value == "ok"
    child = res.config.threads["p0.1"].meta
    assert child["p0"] >= 2


def _run_until_second_write(detector):
    config = initial_config(load("prodcons"), detector)
    writes = 0
    while True:
        choice = enabled_steps(config)[0]
        if choice.pid == "p0" and choice.rule is Rule.STORE:
            writes += 1
            if writes == 2:
                before = config
                after, _ = step(config, choice)
                return before, after
        config, _ = step(config, choice)


@pytest.mark.parametrize("kind", ["vc-djit", "vc-fasttrack"])
def test_producer_consumer_clocks_offset_by_one(kind):
    before, after = _run_until_second_write(make_detector(kind))
    reference = {
        "p0": {"p0": 6, "p0.1": 1, "p0.2": 1},
        "p0.1": {"p0": 2, "p0.1": 2},
        "p0.2": {"p0": 3, "p0.2": 2},
    }
    for config in (before, after):
        for pid, expected in reference.items():
            clock = config.threads[pid].meta
            assert set(clock) == set(expected)
            assert {t: clock[t] - 1 for t in clock} == expected
    if kind == "vc-fasttrack":
        assert after.memory["z"].record.write == Epoch(7, "p0")


# ---------------------------------------------------------------------------
# Known divergence: the GC detector forgets reads superseded by the same
# thread's write, so it names a different kind for the same conflict.
# ---------------------------------------------------------------------------

READ_THEN_WRITE = """
var z = 0;
main {
  go { let x = load z in z := 1 };
  z := 2
}
"""


def test_gc_reports_waw_where_full_detectors_report_war():
    p = parse(READ_THEN_WRITE)
    _, diffs = differential(p, ["war", "gc", "vc-djit", "vc-fasttrack"])
    assert diffs, "expected the documented kind disagreement"
    for d in diffs:
        v = d.verdicts
        assert v["war#0"].kind == WAR and v["vc-djit#2"].kind == WAR and v["vc-fasttrack#3"].kind == WAR
        assert v["gc#1"].kind == WAW
        # Flagged/clean still agrees.
        assert len({x.flagged for x in v.values()}) == 1


def test_all_detectors_flag_the_same_schedules_on_divergence_program():
    p = parse(READ_THEN_WRITE)
    counts = {d: explore_all(p, d).flagged for d in ["war", "gc", "vc-djit", "vc-fasttrack"]}
    assert len(set(counts.values())) == 1
