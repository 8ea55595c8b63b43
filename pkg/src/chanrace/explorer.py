"""Schedule exploration and the trace-level happens-before oracle.

Exploration is a plain depth-first enumeration of maximal choice
sequences; no partial-order reduction is applied, so every interleaving
is counted.  The oracle rebuilds the happens-before order from a trace
alone (program order, spawn, channel rules, close, lock hand-off) and
classifies conflicting accesses that it leaves unordered.  It shares no
code with the detectors, which is what makes it useful as a check on them.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .detectors import Detector, DetectorKind, make_detector
from .runtime import (
    Config,
    Outcome,
    Panic,
    RaceStop,
    Rule,
    RunResult,
    StepChoice,
    TraceEvent,
    enabled_steps,
    initial_config,
    initial_events,
    render_value,
    step,
)
from .syntax import Let, Load, Program, Store, values_equal

__all__ = [
    "DEFAULT_MAX_SCHEDULES",
    "iter_schedules",
    "explore_all",
    "ExploreSummary",
    "execute",
    "Verdict",
    "verdict_of",
    "Diff",
    "differential",
    "HbOrder",
    "MalformedTrace",
    "build_hb_order",
    "RacePair",
    "classify_races",
    "independent",
    "access_of",
    "ManifestWitness",
    "ManifestInconclusive",
    "find_manifest",
]

DEFAULT_MAX_SCHEDULES = 10**6
DEFAULT_MAX_STEPS = 1_000


def _detector(d: Detector | DetectorKind | str) -> Detector:
    return d if isinstance(d, Detector) else make_detector(d)


# ---------------------------------------------------------------------------
# Exhaustive enumeration
# ---------------------------------------------------------------------------


def iter_schedules(
    program: Program,
    detector: Detector | DetectorKind | str = DetectorKind.WAR,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Iterator[RunResult]:
    """Yield one :class:`RunResult` per maximal choice sequence, depth first."""
    det = _detector(detector)
    start = initial_config(program, det)
    init = tuple(initial_events(program))
    stack: list[Any] = [(start, init, ())]
    while stack:
        top = stack.pop()
        if isinstance(top, RunResult):
            yield top
            continue
        config, trace, choices = top
        enabled = enabled_steps(config)
        if not enabled:
            outcome = Outcome.OK if config.terminated else Outcome.DEADLOCK
            yield RunResult(outcome, list(trace), list(choices), config)
            continue
        if len(choices) >= max_steps:
            yield RunResult(Outcome.BUDGET, list(trace), list(choices), config)
            continue
        children: list[Any] = []
        for choice in enabled:
            path = choices + (choice,)
            try:
                nxt, events = step(config, choice)
            except RaceStop as stop:
                children.append(
                    RunResult(Outcome.RACE, list(trace) + [stop.event], list(path), config, report=stop.report)
                )
                continue
            except Panic as panic:
                children.append(
                    RunResult(Outcome.PANIC, list(trace) + [panic.event], list(path), config, panic=panic.reason)
                )
                continue
            children.append((nxt, trace + events, path))
        # Reversed, so the first enabled step is explored first.
        stack.extend(reversed(children))


@dataclass
class ExploreSummary:
    schedules: int = 0
    flagged: int = 0
    by_kind: dict[str, int] = field(default_factory=lambda: {"RaW": 0, "WaW": 0, "WaR": 0})
    outcomes: dict[str, int] = field(default_factory=dict)
    finals: list[dict[str, Any]] = field(default_factory=list)
    truncated: bool = False
    results: list[RunResult] = field(default_factory=list)

    @property
    def any_race(self) -> bool:
        return self.flagged > 0

    @property
    def all_race(self) -> bool:
        return self.schedules > 0 and self.flagged == self.schedules

    def final_values(self, var: str) -> set[Any]:
        return {f[var] for f in self.finals}

    def to_json(self) -> dict[str, Any]:
        return {
            "schedules": self.schedules,
            "flagged": self.flagged,
            "byKind": dict(self.by_kind),
            "outcomes": dict(sorted(self.outcomes.items())),
            "finals": self.finals,
            "truncated": self.truncated,
        }


def _final_key(values: Mapping[str, Any]) -> tuple:
    return tuple((k, type(v).__name__, repr(v)) for k, v in sorted(values.items()))


def explore_all(
    program: Program,
    detector: Detector | DetectorKind | str = DetectorKind.WAR,
    max_steps: int = DEFAULT_MAX_STEPS,
    max_schedules: int = DEFAULT_MAX_SCHEDULES,
    keep_results: bool = False,
) -> ExploreSummary:
    summary = ExploreSummary()
    seen: set[tuple] = set()
    for result in iter_schedules(program, detector, max_steps):
        if summary.schedules >= max_schedules:
            summary.truncated = True
            break
        summary.schedules += 1
        summary.outcomes[result.outcome.value] = summary.outcomes.get(result.outcome.value, 0) + 1
        if result.report is not None:
            summary.flagged += 1
            summary.by_kind[result.report.kind] += 1
        if result.outcome is Outcome.OK:
            values = result.config.values()
            key = _final_key(values)
            if key not in seen:
                seen.add(key)
                summary.finals.append({k: render_value(v) for k, v in sorted(values.items())})
        if keep_results:
            summary.results.append(result)
    summary.finals.sort(key=lambda f: sorted((k, repr(v)) for k, v in f.items()))
    return summary


# ---------------------------------------------------------------------------
# Replaying a fixed choice sequence under another detector
# ---------------------------------------------------------------------------


def execute(
    program: Program,
    choices: Sequence[StepChoice],
    detector: Detector | DetectorKind | str = DetectorKind.WAR,
) -> RunResult:
    """Apply ``choices`` in order, stopping early on a race or panic.

    The choices are trusted to be enabled, which holds for any sequence
    recorded from a run of the same program: detectors never change which
    steps are enabled.
    """
    det = _detector(detector)
    config = initial_config(program, det)
    trace = initial_events(program)
    taken: list[StepChoice] = []
    for choice in choices:
        taken.append(choice)
        try:
            config, events = step(config, choice)
        except RaceStop as stop:
            trace.append(stop.event)
            return RunResult(Outcome.RACE, trace, taken, config, report=stop.report)
        except Panic as panic:
            trace.append(panic.event)
            return RunResult(Outcome.PANIC, trace, taken, config, panic=panic.reason)
        trace.extend(events)
    if enabled_steps(config):
        return RunResult(Outcome.BUDGET, trace, taken, config)
    outcome = Outcome.OK if config.terminated else Outcome.DEADLOCK
    return RunResult(outcome, trace, taken, config)


class Verdict(NamedTuple):
    outcome: str
    kind: str | None
    position: int

    @property
    def flagged(self) -> bool:
        return self.outcome == Outcome.RACE.value


def verdict_of(result: RunResult) -> Verdict:
    return Verdict(result.outcome.value, result.race_kind, len(result.choices))


class Diff(NamedTuple):
    choices: tuple[StepChoice, ...]
    verdicts: dict[str, Verdict]


def differential(
    program: Program,
    detectors: Iterable[Detector | DetectorKind | str],
    max_steps: int = DEFAULT_MAX_STEPS,
    max_schedules: int = DEFAULT_MAX_SCHEDULES,
) -> tuple[int, list[Diff]]:
    """Replay every uninstrumented schedule under each detector.

    Two verdicts agree when they have the same outcome and the same race
    kind.  Returns the number of schedules compared and the disagreements.
    """
    dets = [_detector(d) for d in detectors]
    count = 0
    diffs: list[Diff] = []
    for base in iter_schedules(program, DetectorKind.NONE, max_steps):
        if count >= max_schedules:
            break
        count += 1
        verdicts = {f"{d.kind.value}#{i}": verdict_of(execute(program, base.choices, d)) for i, d in enumerate(dets)}
        distinct = {(v.outcome, v.kind) for v in verdicts.values()}
        if len(distinct) > 1:
            diffs.append(Diff(tuple(base.choices), verdicts))
    return count, diffs


# ---------------------------------------------------------------------------
# Happens-before oracle over traces
# ---------------------------------------------------------------------------


class MalformedTrace(ValueError):
    """The trace could not have been produced by FIFO channels."""


class HbOrder(NamedTuple):
    events: tuple[TraceEvent, ...]
    edges: frozenset[tuple[int, int]]
    # ancestors[j] has bit i set iff event i happens-before event j.
    ancestors: tuple[int, ...]

    def ordered(self, i: int, j: int) -> bool:
        if i == j:
            return False
        if i > j:
            i, j = j, i
        return bool(self.ancestors[j] >> i & 1)

    def before(self, i: int, j: int) -> bool:
        return i < j and bool(self.ancestors[j] >> i & 1)


def _participants(e: TraceEvent) -> tuple[str, ...]:
    if e.kind == "rendezvous" and e.partner is not None:
        return (e.pid, e.partner)
    return (e.pid,)


def build_hb_order(trace: Sequence[TraceEvent]) -> HbOrder:
    events = tuple(trace)
    edges: set[tuple[int, int]] = set()
    last: dict[str, int] = {}
    pending_spawn: dict[str, int] = {}
    capacity: dict[str, int] = {}
    sends: dict[tuple[str, int], int] = {}
    send_values: dict[tuple[str, int], Any] = {}
    recvs: dict[tuple[str, int], int] = {}
    closes: dict[str, int] = {}
    released: dict[str, int] = {}

    def expect(cond: bool, msg: str) -> None:
        if not cond:
            raise MalformedTrace(msg)

    for j, e in enumerate(events):
        for pid in _participants(e):
            if pid in last:
                edges.add((last[pid], j))
            elif pid in pending_spawn:
                edges.add((pending_spawn.pop(pid), j))
            last[pid] = j
        k = e.kind
        if k == "spawn":
            pending_spawn[e.partner] = j
        elif k == "make":
            capacity[e.chan] = e.capacity
        elif k == "send":
            expect((e.chan, e.seq) not in sends, f"duplicate send {e.chan}#{e.seq}")
            sends[(e.chan, e.seq)] = j
            send_values[(e.chan, e.seq)] = e.value
        elif k == "sendComplete":
            i = e.seq - capacity.get(e.chan, 0)
            if i >= 1:
                expect((e.chan, i) in recvs, f"send {e.chan}#{e.seq} completed without a free slot")
                edges.add((recvs[(e.chan, i)], j))
        elif k == "recv":
            expect((e.chan, e.seq) not in recvs, f"duplicate receive {e.chan}#{e.seq}")
            expect((e.chan, e.seq) in sends, f"receive {e.chan}#{e.seq} before the matching send")
            recvs[(e.chan, e.seq)] = j
        elif k == "recvComplete":
            key = (e.chan, e.seq)
            expect(key in sends, f"receive {e.chan}#{e.seq} before the matching send")
            sent = send_values[key]
            expect(
                e.value is None or sent is None or values_equal(e.value, sent),
                f"FIFO violated on {e.chan}: receive #{e.seq} got {e.value!r}, send #{e.seq} carried {sent!r}",
            )
            edges.add((sends[key], j))
        elif k == "close":
            closes[e.chan] = j
        elif k == "recvEOT":
            expect(e.chan in closes, f"end of transmission on {e.chan} before close")
            edges.add((closes[e.chan], j))
        elif k == "release":
            released[e.lock] = j
        elif k == "acquire":
            if e.lock in released:
                edges.add((released.pop(e.lock), j))

    for a, b in edges:
        expect(a < b, f"edge {a}->{b} points backwards")
    preds: list[list[int]] = [[] for _ in events]
    for a, b in edges:
        preds[b].append(a)
    ancestors: list[int] = []
    for j in range(len(events)):
        bits = 0
        for a in preds[j]:
            bits |= ancestors[a] | (1 << a)
        ancestors.append(bits)
    return HbOrder(events, frozenset(edges), tuple(ancestors))


class RacePair(NamedTuple):
    kind: str
    var: str
    first: int
    second: int


def classify_races(order: HbOrder) -> list[RacePair]:
    """Every conflicting pair of accesses left unordered by ``order``."""
    accesses = [(i, e) for i, e in enumerate(order.events) if e.is_access]
    out: list[RacePair] = []
    for x, (i, a) in enumerate(accesses):
        for j, b in accesses[x + 1:]:
            if a.var != b.var or a.pid == b.pid:
                continue
            if a.kind == "read" and b.kind == "read":
                continue
            if order.ordered(i, j):
                continue
            if a.kind == "write":
                kind = "RaW" if b.kind == "read" else "WaW"
            else:
                kind = "WaR"
            out.append(RacePair(kind, a.var, i, j))
    return out


# ---------------------------------------------------------------------------
# Independence and manifest races
# ---------------------------------------------------------------------------


def independent(config: Config, a: StepChoice, b: StepChoice) -> bool:
    """Both orders are possible and reach the same configuration."""
    enabled = enabled_steps(config)
    if a not in enabled or b not in enabled:
        return False
    try:
        after_a, _ = step(config, a)
        if b not in enabled_steps(after_a):
            return False
        ab, _ = step(after_a, b)
        after_b, _ = step(config, b)
        if a not in enabled_steps(after_b):
            return False
        ba, _ = step(after_b, a)
    except (RaceStop, Panic):
        return False
    return ab == ba


def access_of(config: Config, choice: StepChoice) -> tuple[str, str] | None:
    """``(kind, var)`` if ``choice`` is a memory access, else ``None``."""
    if choice.rule not in (Rule.LOAD, Rule.STORE):
        return None
    term = config.threads[choice.pid].term
    assert isinstance(term, Let) and isinstance(term.expr, (Load, Store))
    return ("read" if choice.rule is Rule.LOAD else "write", term.expr.var)


def _conflict(x: tuple[str, str] | None, y: tuple[str, str] | None) -> bool:
    return x is not None and y is not None and x[1] == y[1] and "write" in (x[0], y[0])


class ManifestWitness(NamedTuple):
    choices: tuple[StepChoice, ...]
    index: int  # choices[index] and choices[index + 1] form the manifest race
    kind: str
    var: str


class ManifestInconclusive(RuntimeError):
    """The commutation class exceeded the search cap."""


def _configs_along(program: Program, choices: Sequence[StepChoice]) -> list[Config]:
    config = initial_config(program, DetectorKind.NONE)
    out = [config]
    for c in choices:
        config, _ = step(config, c)
        out.append(config)
    return out


def find_manifest(
    program: Program,
    choices: Sequence[StepChoice],
    max_visited: int = 100_000,
) -> ManifestWitness | None:
    """Search the commutation class of ``choices`` for adjacent conflicting accesses.

    Swaps are only taken between adjacent independent steps, with
    independence decided on the uninstrumented semantics.  Returns
    ``None`` if the whole class was searched without finding a witness.
    """
    start = tuple(choices)
    seen = {start}
    queue = deque([start])
    while queue:
        seq = queue.popleft()
        configs = _configs_along(program, seq)
        for i in range(len(seq) - 1):
            a, b = seq[i], seq[i + 1]
            if a.pid == b.pid or (a.partner and a.partner == b.pid) or (b.partner and b.partner == a.pid):
                continue
            acc_a = access_of(configs[i], a)
            acc_b = access_of(configs[i + 1], b)
            if _conflict(acc_a, acc_b):
                if acc_a[0] == "write":
                    kind = "RaW" if acc_b[0] == "read" else "WaW"
                else:
                    kind = "WaR"
                return ManifestWitness(seq, i, kind, acc_a[1])
            if independent(configs[i], a, b):
                swapped = seq[:i] + (b, a) + seq[i + 2:]
                if swapped not in seen:
                    if len(seen) >= max_visited:
                        raise ManifestInconclusive(f"more than {max_visited} equivalent schedules")
                    seen.add(swapped)
                    queue.append(swapped)
    return None
