"""Race reports, metadata footprint sampling and JSON output.

Footprints count what a detector keeps: access labels in happens-before
sets, or non-zero entries in vector clocks.  Samples are taken per thread,
per variable record, per channel (in-flight messages and tickets) and per
lock.

Reports rename access labels to ``m0, m1, ...`` in order of first
appearance in the trace, so that identical choice sequences give
byte-identical documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .detectors import Detector, DetectorKind
from .hbset import Access
from .runtime import (
    Config,
    RunResult,
    Scheduler,
    TraceEvent,
    choice_to_dict,
    pid_key,
    render_value,
    run,
)
from .syntax import Program

__all__ = [
    "FootprintSample",
    "snapshot",
    "run_with_footprint",
    "label_renaming",
    "event_to_json",
    "emit_report",
    "dumps",
    "trace_lines",
]


# ---------------------------------------------------------------------------
# Footprint
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FootprintSample:
    step: int
    per_thread: Mapping[str, int] = field(default_factory=dict)
    per_variable: Mapping[str, int] = field(default_factory=dict)
    per_channel: Mapping[str, int] = field(default_factory=dict)
    per_lock: Mapping[str, int] = field(default_factory=dict)

    @property
    def thread_total(self) -> int:
        return sum(self.per_thread.values())

    @property
    def total(self) -> int:
        return (
            self.thread_total
            + sum(self.per_variable.values())
            + sum(self.per_channel.values())
            + sum(self.per_lock.values())
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "threads": dict(self.per_thread),
            "variables": dict(self.per_variable),
            "channels": dict(self.per_channel),
            "locks": dict(self.per_lock),
            "total": self.total,
        }


def snapshot(config: Config, step: int | None = None) -> FootprintSample:
    det: Detector = config.detector
    size = det.meta_size
    threads = {p: size(config.threads[p].meta) for p in sorted(config.threads, key=pid_key)}
    variables = {z: det.record_size(cell.record) for z, cell in sorted(config.memory.items())}
    channels = {
        name: sum(size(m) for _, m in ch.forward) + sum(size(t) for t in ch.backward)
        for name, ch in sorted(config.channels.items())
    }
    locks = {
        name: 0 if lock.held or lock.meta is None else size(lock.meta)
        for name, lock in sorted(config.locks.items())
    }
    return FootprintSample(config.steps if step is None else step, threads, variables, channels, locks)


def run_with_footprint(
    program: Program,
    detector: Detector | DetectorKind | str,
    scheduler: Scheduler | None = None,
    max_steps: int = 10_000,
) -> RunResult:
    """:func:`run`, with a footprint sample after initialization and every step."""
    samples: list[FootprintSample] = []
    result = run(program, detector, scheduler, max_steps, observe=lambda c: samples.append(snapshot(c)))
    result.footprint = samples
    return result


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def label_renaming(trace: Sequence[TraceEvent]) -> dict[str, str]:
    names: dict[str, str] = {}
    for e in trace:
        if e.label is not None and e.label not in names:
            names[e.label] = f"m{len(names)}"
    return names


_EVENT_FIELDS = ("var", "label", "chan", "seq", "value", "partner", "lock", "capacity", "reason")


def event_to_json(e: TraceEvent, names: Mapping[str, str] | None = None) -> dict[str, Any]:
    out: dict[str, Any] = {"pid": e.pid, "kind": e.kind}
    for key in _EVENT_FIELDS:
        v = getattr(e, key)
        if v is None:
            continue
        if key == "label" and names is not None:
            v = names.get(v, v)
        elif key == "value":
            v = render_value(v)
        out[key] = v
    if e.attempted:
        out["attempted"] = True
    return out


def _access_to_json(a: Access, names: Mapping[str, str]) -> str:
    kind = "r" if a.kind == "read" else "w"
    return f"{kind}({names.get(a.label, a.label)},{a.var})"


def emit_report(
    result: RunResult,
    samples: Sequence[FootprintSample] | None = None,
    canonical: bool = True,
    include_choices: bool = False,
) -> dict[str, Any]:
    names = label_renaming(result.trace) if canonical else {}
    race = None
    if result.report is not None:
        r = result.report
        race = {
            "kind": r.kind,
            "var": r.var,
            "pid": r.pid,
            "op": r.op,
            "conflicting": sorted(_access_to_json(a, names) for a in r.conflicting),
        }
    samples = result.footprint if samples is None else samples
    doc: dict[str, Any] = {
        "result": result.outcome.value,
        "race": race,
        "trace": [event_to_json(e, names) for e in result.trace],
        "footprint": [s.to_json() for s in samples],
    }
    if include_choices:
        doc["choices"] = [choice_to_dict(c) for c in result.choices]
    return doc


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2) + "\n"


def trace_lines(trace: Sequence[TraceEvent], canonical: bool = True) -> str:
    """One JSON object per line, one line per event."""
    names = label_renaming(trace) if canonical else None
    return "".join(json.dumps(event_to_json(e, names)) + "\n" for e in trace)
