from __future__ import annotations

import pytest

from chanrace.explorer import explore_all
from chanrace.hbset import (
    EMPTY,
    RAW,
    READ,
    WAR,
    WAW,
    WRITE,
    Access,
    GcRecord,
    Race,
    cap_reads,
    offline_gc,
    project_var,
    read_aw,
    read_gc,
    read_war,
    write_aw,
    write_gc,
    write_war,
)
from chanrace.syntax import parse


def w(label: str, var: str = "z") -> Access:
    return Access(label, WRITE, var)


def r(label: str, var: str = "z") -> Access:
    return Access(label, READ, var)


# ---------------------------------------------------------------------------
# After-write detector
# ---------------------------------------------------------------------------


def test_aw_read_success_leaves_everything_unchanged():
    hb = frozenset({w("m0")})
    assert read_aw(hb, frozenset({w("m0")}), "z") is None


def test_aw_read_of_unseen_write_is_raw():
    with pytest.raises(Race) as info:
        read_aw(frozenset({w("m0", "a")}), frozenset({w("m0", "a"), w("m1", "a")}), "a")
    assert info.value.kind == RAW
    assert info.value.conflicting == {w("m1", "a")}


def test_aw_write_records_label():
    hb, rec = write_aw(frozenset({w("m0")}), frozenset({w("m0")}), "z", "m1")
    assert w("m1") in hb and rec == {w("m0"), w("m1")}


def test_aw_write_unseen_write_is_waw():
    with pytest.raises(Race) as info:
        write_aw(EMPTY, frozenset({w("m0")}), "z", "m1")
    assert info.value.kind == WAW


# ---------------------------------------------------------------------------
# Full detector
# ---------------------------------------------------------------------------


def test_war_read_adds_label_to_thread_and_record():
    hb, rec = read_war(frozenset({w("m0")}), frozenset({w("m0")}), "z", "m1")
    assert hb == {w("m0"), r("m1")} and rec == {w("m0"), r("m1")}


def test_war_concurrent_reads_do_not_conflict():
    rec = frozenset({w("m0"), r("m1")})
    hb, rec2 = read_war(frozenset({w("m0")}), rec, "z", "m2")
    assert rec2 == {w("m0"), r("m1"), r("m2")}


def test_war_write_prefers_war_over_waw():
    # The stranger knows neither the earlier write nor the later read.
    rec = frozenset({w("m0"), w("m1"), r("m2")})
    with pytest.raises(Race) as info:
        write_war(frozenset({w("m0")}), rec, "z", "m3")
    assert info.value.kind == WAR
    assert info.value.conflicting == {r("m2")}


def test_war_write_aware_of_reads_not_write_is_waw():
    rec = frozenset({w("m0"), r("m1"), w("m2")})
    with pytest.raises(Race) as info:
        write_war(frozenset({w("m0"), r("m1")}), rec, "z", "m3")
    assert info.value.kind == WAW and info.value.conflicting == {w("m2")}


WAW_AFTER_READ = """
var z = 0;
main {
  let c = make(chan, 1) in
  let d = make(chan, 1) in
  go { <-c; z := 1 };
  go { <-d; z := 2 };
  let x = load z in
  c <- 0;
  d <- 0
}
"""


def test_waw_with_known_reads_is_reachable():
    summary = explore_all(parse(WAW_AFTER_READ), "war", keep_results=True)
    assert summary.schedules == summary.flagged
    for res in summary.results:
        assert res.report.kind == WAW
        # The read was propagated; the competing write was not.
        assert all(a.kind == WRITE for a in res.report.conflicting)


# ---------------------------------------------------------------------------
# GC detector
# ---------------------------------------------------------------------------


def test_gc_read_evicts_known_reads():
    rec = GcRecord(w("m0"), frozenset({r("m1"), r("m2")}))
    hb = frozenset({w("m0"), r("m1"), w("x0", "x")})
    hb2, rec2 = read_gc(hb, rec, "z", "m3")
    assert rec2 == GcRecord(w("m0"), frozenset({r("m3"), r("m2")}))
    assert hb2 == {r("m3"), w("m0"), w("x0", "x")}


def test_gc_reread_replaces_own_label():
    hb, rec = read_gc(frozenset({w("m0")}), GcRecord(w("m0")), "z", "m1")
    hb, rec = read_gc(hb, rec, "z", "m2")
    assert rec.reads_since == {r("m2")}
    assert project_var(hb, "z") == {w("m0"), r("m2")}


def test_gc_read_without_last_write_is_raw():
    with pytest.raises(Race) as info:
        read_gc(EMPTY, GcRecord(w("m0")), "z", "m1")
    assert info.value.kind == RAW and info.value.conflicting == {w("m0")}


def test_gc_write_resets_record_and_projects_thread():
    rec = GcRecord(w("m0"), frozenset({r("m1")}))
    hb, rec2 = write_gc(frozenset({w("m0"), r("m1"), w("x0", "x")}), rec, "z", "m2")
    assert rec2 == GcRecord(w("m2"))
    assert hb == {w("m2"), w("x0", "x")}


def test_gc_write_unseen_read_is_war():
    with pytest.raises(Race) as info:
        write_gc(frozenset({w("m0")}), GcRecord(w("m0"), frozenset({r("m1")})), "z", "m2")
    assert info.value.kind == WAR and info.value.conflicting == {r("m1")}


def test_gc_write_unseen_write_is_waw():
    with pytest.raises(Race) as info:
        write_gc(EMPTY, GcRecord(w("m0")), "z", "m1")
    assert info.value.kind == WAW


def test_gc_consecutive_writes_keep_one_entry():
    hb, rec = frozenset({w("m0")}), GcRecord(w("m0"))
    for i in range(1, 5):
        hb, rec = write_gc(hb, rec, "z", f"m{i}")
        assert project_var(hb, "z") == {w(f"m{i}")}


def test_offline_gc_drops_stale_entries():
    memory = {"z": GcRecord(w("m3")), "x": GcRecord(w("x0", "x"), frozenset({r("x1", "x")}))}
    hb = frozenset({w("m0"), r("m1"), r("m2"), w("x0", "x"), r("x1", "x"), r("x9", "x")})
    assert offline_gc(hb, memory) == {w("x0", "x"), r("x1", "x")}


def test_offline_gc_keeps_fresh_set():
    memory = {"z": GcRecord(w("m3"))}
    hb = frozenset({w("m3")})
    assert offline_gc(hb, memory) is hb


# ---------------------------------------------------------------------------
# Read cap
# ---------------------------------------------------------------------------


def test_cap_reads_keeps_newest_and_limit():
    recorded = frozenset({w("m0"), r("m1"), r("m2"), r("m3")})
    capped = cap_reads(recorded, 2, r("m3"))
    assert w("m0") in capped and r("m3") in capped
    assert len([a for a in capped if a.kind == READ]) == 2


def test_cap_reads_can_hide_a_war():
    rec = frozenset({w("m0")})
    for label in ("m1", "m2", "m3"):
        _, rec = read_war(frozenset({w("m0")}), rec, "z", label, max_reads=1)
    # Only the newest read survives, so a writer that saw it is accepted.
    hb, _ = write_war(frozenset({w("m0"), r("m3")}), rec, "z", "m4")
    assert w("m4") in hb
