from __future__ import annotations

import json

import pytest

from chanrace.detectors import make_detector
from chanrace.report import (
    FootprintSample,
    dumps,
    emit_report,
    label_renaming,
    run_with_footprint,
    snapshot,
    trace_lines,
)
from chanrace.runtime import FirstScheduler, RandomScheduler, Rule, ScriptedScheduler, StepChoice, initial_config, run
from chanrace.syntax import parse

from .conftest import GOLDEN, load

DEADLOCK = "var z = 0; main { let c = make(chan, 1) in go { z := 1; <-c }; <-c }"

GOLDEN_CASES = {
    "race": (
        lambda: load("listing1"),
        "war",
        [StepChoice("p0", Rule.GO), StepChoice("p0.1", Rule.STORE), StepChoice("p0", Rule.LOAD)],
    ),
    "terminated": (lambda: load("message-passing"), "gc", None),
    "deadlock": (lambda: parse(DEADLOCK), "war", None),
}


def golden_document(name: str) -> str:
    program, detector, script = GOLDEN_CASES[name]
    scheduler = ScriptedScheduler(script) if script else FirstScheduler()
    return dumps(emit_report(run_with_footprint(program(), detector, scheduler)))


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden(name):
    expected = (GOLDEN / f"{name}.json").read_text()
    assert golden_document(name) == expected


def test_golden_results_cover_three_outcomes():
    results = {json.loads((GOLDEN / f"{n}.json").read_text())["result"] for n in GOLDEN_CASES}
    assert results == {"race", "ok", "deadlock"}


def test_report_keys_in_stable_order():
    doc = emit_report(run_with_footprint(load("listing1"), "war"))
    assert list(doc) == ["result", "race", "trace", "footprint"]
    assert list(doc["race"]) == ["kind", "var", "pid", "op", "conflicting"]


def test_json_round_trip():
    doc = emit_report(run_with_footprint(load("prodcons"), "gc", RandomScheduler(4)))
    assert json.loads(dumps(doc)) == doc


def test_labels_renamed_in_order_of_appearance():
    res = run(load("prodcons"), "war", RandomScheduler(9))
    names = label_renaming(res.trace)
    assert list(names.values()) == [f"m{i}" for i in range(len(names))]
    doc = emit_report(res)
    labels = [e["label"] for e in doc["trace"] if "label" in e]
    assert labels == [f"m{i}" for i in range(len(labels))]


def test_trace_lines_one_event_per_line():
    res = run(load("listing2"))
    lines = trace_lines(res.trace).splitlines()
    assert len(lines) == len(res.trace)
    assert all(json.loads(line)["pid"] for line in lines)


def test_empty_config_footprint_is_zero():
    s = snapshot(initial_config(parse("main { stop }"), "gc"))
    assert s.total == 0 and s.thread_total == 0


def test_total_is_sum_of_parts():
    for d in ("war", "gc", "vc-djit", "vc-fasttrack"):
        res = run_with_footprint(load("prodcons"), d, RandomScheduler(2))
        for s in res.footprint:
            parts = [s.per_thread, s.per_variable, s.per_channel, s.per_lock]
            assert s.total == sum(sum(p.values()) for p in parts)


def test_gc_footprint_never_exceeds_ungc_footprint():
    off = run_with_footprint(load("prodcons"), make_detector("gc", gc_mode="off"))
    on = run_with_footprint(load("prodcons"), make_detector("gc", gc_mode="eager"))
    assert [s.step for s in off.footprint] == [s.step for s in on.footprint]
    for a, b in zip(off.footprint, on.footprint):
        assert b.thread_total <= a.thread_total


def test_sample_to_json():
    s = FootprintSample(3, {"p0": 2}, {"z": 1}, {"c": 0}, {})
    assert s.to_json() == {"step": 3, "threads": {"p0": 2}, "variables": {"z": 1}, "channels": {"c": 0}, "locks": {}, "total": 3}
