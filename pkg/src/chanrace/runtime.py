"""Small-step interpreter for the channel calculus.

A :class:`Config` is an immutable snapshot: threads keyed by pid, one
memory cell per shared variable, channels keyed by name, and locks.  The
reduction relation is exposed as :func:`enabled_steps` plus :func:`step`;
:func:`run` drives it with a scheduler.

Fresh names are structural rather than drawn from global counters.  The
root thread is ``p0``; the n-th child of ``P`` is ``P.n``; the n-th memory
access of ``P`` gets label ``P/mn`` and its n-th channel is ``P/cn``.  A
step therefore produces the same names no matter how other threads were
interleaved before it, which lets independence be decided by comparing
configurations directly.

Local steps (binding a value, evaluating a condition) are folded into the
thread term eagerly and never show up as schedulable choices.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, NamedTuple, Protocol, Sequence

from .detectors import Detector, DetectorKind, make_detector
from .hbset import Access, Race
from .syntax import (
    EOT,
    STOP,
    UNIT,
    Acquire,
    Atom,
    Branch,
    ChanRef,
    Close,
    DefaultGuard,
    Eot,
    Go,
    If,
    Let,
    Lit,
    Load,
    Make,
    Program,
    Recv,
    RecvGuard,
    Release,
    Select,
    Send,
    SendGuard,
    Store,
    Term,
    Value,
    Var,
    WILDCARD,
    values_equal,
)

__all__ = [
    "ROOT",
    "Rule",
    "Outcome",
    "ThreadState",
    "Cell",
    "ChannelState",
    "LockState",
    "Config",
    "StepChoice",
    "TraceEvent",
    "RaceReport",
    "RaceStop",
    "Panic",
    "RunResult",
    "Scheduler",
    "RandomScheduler",
    "ScriptedScheduler",
    "FirstScheduler",
    "ScriptError",
    "initial_config",
    "initial_events",
    "enabled_steps",
    "step",
    "run",
    "replay",
    "pid_key",
    "render_value",
    "choice_to_dict",
    "choice_from_dict",
]

ROOT = "p0"


class Rule(str, enum.Enum):
    LOAD = "load"
    STORE = "store"
    MAKE = "make"
    GO = "go"
    SEND = "send"
    RECV = "recv"
    RECV_EOT = "recv-eot"
    RENDEZVOUS = "rendezvous"
    CLOSE = "close"
    ACQUIRE = "acquire"
    RELEASE = "release"
    DEFAULT = "default"
    PANIC = "panic"

    def __str__(self) -> str:
        return self.value


class Outcome(str, enum.Enum):
    OK = "ok"
    RACE = "race"
    PANIC = "panic"
    DEADLOCK = "deadlock"
    BUDGET = "budget"

    def __str__(self) -> str:
        return self.value


def pid_key(pid: str) -> tuple[int, ...]:
    """Sort key placing ``p0.2`` before ``p0.10``."""
    return tuple(int(part) for part in pid[1:].split("."))


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


class ThreadState(NamedTuple):
    pid: str
    meta: Any
    term: Term
    env: Mapping[str, Value]
    n_labels: int = 0
    n_children: int = 0
    n_chans: int = 0

    @property
    def stopped(self) -> bool:
        return isinstance(self.term, Select) and not self.term.branches


class Cell(NamedTuple):
    value: Value
    record: Any


class ChannelState(NamedTuple):
    name: str
    capacity: int
    forward: tuple[tuple[Value, Any], ...] = ()
    backward: tuple[Any, ...] = ()
    closed: bool = False
    sent: int = 0
    received: int = 0

    def pending(self) -> int:
        """Buffered values, not counting the end-of-transmission marker."""
        return sum(1 for v, _ in self.forward if not isinstance(v, Eot))


class LockState(NamedTuple):
    name: str
    held: bool
    meta: Any


@dataclass(frozen=True, eq=False)
class Config:
    threads: Mapping[str, ThreadState]
    memory: Mapping[str, Cell]
    channels: Mapping[str, ChannelState]
    locks: Mapping[str, LockState]
    detector: Detector = field(repr=False)
    steps: int = 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Config):
            return NotImplemented
        return (
            self.threads == other.threads
            and self.memory == other.memory
            and self.channels == other.channels
            and self.locks == other.locks
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def terminated(self) -> bool:
        return all(t.stopped for t in self.threads.values())

    def values(self) -> dict[str, Value]:
        return {z: cell.value for z, cell in self.memory.items()}

    def hb(self, pid: str) -> Any:
        return self.threads[pid].meta

    def replace(self, **changes: Any) -> Config:
        fields = dict(
            threads=self.threads,
            memory=self.memory,
            channels=self.channels,
            locks=self.locks,
            detector=self.detector,
            steps=self.steps,
        )
        fields.update(changes)
        return Config(**fields)


class StepChoice(NamedTuple):
    pid: str
    rule: Rule
    chan: str | None = None
    partner: str | None = None
    branch: int | None = None
    partner_branch: int | None = None

    def __str__(self) -> str:
        parts = [self.pid, self.rule.value]
        if self.chan is not None:
            parts.append(self.chan)
        if self.partner is not None:
            parts.append(f"with {self.partner}")
        if self.branch is not None:
            parts.append(f"branch {self.branch}")
        return " ".join(parts)


def choice_to_dict(c: StepChoice) -> dict[str, Any]:
    out: dict[str, Any] = {"pid": c.pid, "rule": c.rule.value}
    for key in ("chan", "partner", "branch", "partner_branch"):
        value = getattr(c, key)
        if value is not None:
            out[key] = value
    return out


def choice_from_dict(d: Mapping[str, Any]) -> StepChoice:
    return StepChoice(
        pid=d["pid"],
        rule=Rule(d["rule"]),
        chan=d.get("chan"),
        partner=d.get("partner"),
        branch=d.get("branch"),
        partner_branch=d.get("partner_branch"),
    )


class TraceEvent(NamedTuple):
    pid: str
    kind: str
    var: str | None = None
    label: str | None = None
    chan: str | None = None
    seq: int | None = None
    value: Value | None = None
    partner: str | None = None
    lock: str | None = None
    capacity: int | None = None
    reason: str | None = None
    attempted: bool = False

    @property
    def is_access(self) -> bool:
        return self.kind in ("read", "write")


def render_value(v: Value | None) -> Any:
    if v is None or isinstance(v, bool) or isinstance(v, int):
        return v
    if isinstance(v, ChanRef):
        return f"chan:{v.name}"
    return repr(v)


# ---------------------------------------------------------------------------
# Outcomes of a single step
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RaceReport:
    kind: str
    var: str
    pid: str
    op: str
    conflicting: frozenset[Access]


class RaceStop(Exception):
    def __init__(self, report: RaceReport, event: TraceEvent) -> None:
        self.report = report
        self.event = event
        super().__init__(f"{report.kind} race on {report.var} by {report.pid}")


class Panic(Exception):
    def __init__(self, reason: str, event: TraceEvent) -> None:
        self.reason = reason
        self.event = event
        super().__init__(f"panic in {event.pid}: {reason}")


# ---------------------------------------------------------------------------
# Local evaluation
# ---------------------------------------------------------------------------


def _eval(atom: Atom, env: Mapping[str, Value]) -> Value:
    if isinstance(atom, Lit):
        return atom.value
    return env[atom.name]


def _bind(env: Mapping[str, Value], name: str, value: Value) -> Mapping[str, Value]:
    if name == WILDCARD:
        return env
    out = dict(env)
    out[name] = value
    return out


def _condition(t: If, env: Mapping[str, Value]) -> bool | None:
    lhs = _eval(t.lhs, env)
    if t.rhs is not None:
        return values_equal(lhs, _eval(t.rhs, env))
    return lhs if isinstance(lhs, bool) else None


def _normalize(th: ThreadState) -> ThreadState:
    """Apply local steps until the head is an interaction or stuck."""
    term, env = th.term, th.env
    while True:
        if isinstance(term, Let) and isinstance(term.expr, (Lit, Var)):
            env = _bind(env, term.name, _eval(term.expr, env))
            term = term.body
        elif isinstance(term, If):
            cond = _condition(term, env)
            if cond is None:
                break
            term = term.then if cond else term.orelse
        else:
            break
    if term is th.term:
        return th
    return th._replace(term=term, env=env)


def _continue(th: ThreadState, binder: str, value: Value, body: Term, **changes: Any) -> ThreadState:
    return _normalize(th._replace(term=body, env=_bind(th.env, binder, value), **changes))


# ---------------------------------------------------------------------------
# Initial configuration
# ---------------------------------------------------------------------------


def _label(pid: str, n: int) -> str:
    return f"{pid}/m{n}"


def initial_config(program: Program, detector: Detector | DetectorKind | str = DetectorKind.WAR) -> Config:
    if not isinstance(detector, Detector):
        detector = make_detector(detector)
    initial = [(z, _label(ROOT, i)) for i, (z, _) in enumerate(program.shared)]
    root_meta, records = detector.init(ROOT, initial)
    memory = {z: Cell(v, records[z]) for z, v in program.shared}
    locks = {l: LockState(l, False, detector.initial_lock()) for l in program.locks}
    root = _normalize(ThreadState(ROOT, root_meta, program.main, {}, n_labels=len(initial)))
    return Config({ROOT: root}, memory, {}, locks, detector)


def initial_events(program: Program) -> list[TraceEvent]:
    """The initial writes, attributed to the root thread."""
    return [
        TraceEvent(ROOT, "write", var=z, label=_label(ROOT, i), value=v)
        for i, (z, v) in enumerate(program.shared)
    ]


# ---------------------------------------------------------------------------
# Enabled steps
# ---------------------------------------------------------------------------


def _chan_of(config: Config, th: ThreadState, atom: Atom) -> ChannelState | None:
    v = _eval(atom, th.env)
    if isinstance(v, ChanRef):
        return config.channels.get(v.name)
    return None


def _choice_key(c: StepChoice) -> tuple:
    return (
        pid_key(c.pid),
        -1 if c.branch is None else c.branch,
        c.rule.value,
        c.chan or "",
        pid_key(c.partner) if c.partner else (),
        -1 if c.partner_branch is None else c.partner_branch,
    )


def enabled_steps(config: Config) -> list[StepChoice]:
    choices: list[StepChoice] = []
    senders: list[tuple[str, int | None, str]] = []
    receivers: dict[str, list[tuple[str, int | None]]] = {}
    defaults: dict[str, int] = {}

    def comm(pid: str, th: ThreadState, op: Any, branch: int | None) -> None:
        if isinstance(op, (Send, SendGuard)):
            ch = _chan_of(config, th, op.chan)
            if ch is None:
                choices.append(StepChoice(pid, Rule.PANIC, branch=branch))
            elif ch.closed:
                choices.append(StepChoice(pid, Rule.PANIC, ch.name, branch=branch))
            elif ch.capacity > 0:
                if ch.backward:
                    choices.append(StepChoice(pid, Rule.SEND, ch.name, branch=branch))
            else:
                senders.append((pid, branch, ch.name))
        else:
            ch = _chan_of(config, th, op.chan)
            if ch is None:
                choices.append(StepChoice(pid, Rule.PANIC, branch=branch))
            elif ch.forward:
                rule = Rule.RECV_EOT if isinstance(ch.forward[0][0], Eot) else Rule.RECV
                choices.append(StepChoice(pid, rule, ch.name, branch=branch))
            elif ch.capacity == 0:
                receivers.setdefault(ch.name, []).append((pid, branch))

    for pid, th in config.threads.items():
        t = th.term
        if isinstance(t, Let):
            e = t.expr
            if isinstance(e, Load):
                choices.append(StepChoice(pid, Rule.LOAD))
            elif isinstance(e, Store):
                choices.append(StepChoice(pid, Rule.STORE))
            elif isinstance(e, Make):
                choices.append(StepChoice(pid, Rule.MAKE))
            elif isinstance(e, Go):
                choices.append(StepChoice(pid, Rule.GO))
            elif isinstance(e, (Send, Recv)):
                comm(pid, th, e, None)
            elif isinstance(e, Close):
                ch = _chan_of(config, th, e.chan)
                rule = Rule.PANIC if ch is None or ch.closed else Rule.CLOSE
                choices.append(StepChoice(pid, rule, None if ch is None else ch.name))
            elif isinstance(e, Acquire):
                if not config.locks[e.lock].held:
                    choices.append(StepChoice(pid, Rule.ACQUIRE))
            elif isinstance(e, Release):
                if config.locks[e.lock].held:
                    choices.append(StepChoice(pid, Rule.RELEASE))
        elif isinstance(t, If):
            choices.append(StepChoice(pid, Rule.PANIC))
        else:
            for i, br in enumerate(t.branches):
                if isinstance(br.guard, DefaultGuard):
                    defaults[pid] = i
                else:
                    comm(pid, th, br.guard, i)

    for spid, sbranch, name in senders:
        for rpid, rbranch in receivers.get(name, ()):
            if rpid != spid:
                choices.append(StepChoice(spid, Rule.RENDEZVOUS, name, rpid, sbranch, rbranch))

    if defaults:
        busy = {c.pid for c in choices} | {c.partner for c in choices if c.partner}
        for pid, i in defaults.items():
            if pid not in busy:
                choices.append(StepChoice(pid, Rule.DEFAULT, branch=i))

    choices.sort(key=_choice_key)
    return choices


# ---------------------------------------------------------------------------
# Single step
# ---------------------------------------------------------------------------


def _head(th: ThreadState, branch: int | None) -> tuple[Any, str, Term]:
    """The operation chosen at ``th``'s head, its binder, and continuation."""
    t = th.term
    if branch is None:
        assert isinstance(t, Let)
        return t.expr, t.name, t.body
    assert isinstance(t, Select)
    br: Branch = t.branches[branch]
    return br.guard, br.binder, br.body


def _collect(detector: Detector, meta: Any, memory: Mapping[str, Cell]) -> Any:
    if detector.gc_mode != "eager":
        return meta
    return detector.collect(meta, {z: cell.record for z, cell in memory.items()})


def _collect_all(config: Config) -> Config:
    det = config.detector
    records = {z: cell.record for z, cell in config.memory.items()}
    threads = {pid: th._replace(meta=det.collect(th.meta, records)) for pid, th in config.threads.items()}
    return config.replace(threads=threads)


def step(config: Config, choice: StepChoice) -> tuple[Config, tuple[TraceEvent, ...]]:
    """Apply one reduction rule.

    Raises :class:`RaceStop` when the detector rejects a memory access and
    :class:`Panic` on send-to-closed, close-of-closed and similar errors.
    """
    det = config.detector
    pid = choice.pid
    th = config.threads[pid]
    threads = dict(config.threads)
    memory = config.memory
    channels = config.channels
    locks = config.locks
    events: tuple[TraceEvent, ...]
    rule = choice.rule

    if rule is Rule.PANIC:
        head = th.term if isinstance(th.term, If) else _head(th, choice.branch)[0]
        if isinstance(head, If):
            reason = "non-boolean condition"
        elif isinstance(head, Close):
            reason = "close of closed channel" if choice.chan else "close of non-channel"
        elif choice.chan is None:
            reason = "not a channel"
        else:
            reason = "send on closed channel"
        raise Panic(reason, TraceEvent(pid, "panic", chan=choice.chan, reason=reason))

    op, binder, body = _head(th, choice.branch)

    if rule is Rule.LOAD or rule is Rule.STORE:
        z = op.var
        cell = memory[z]
        label = _label(pid, th.n_labels)
        kind = "read" if rule is Rule.LOAD else "write"
        value = cell.value if rule is Rule.LOAD else _eval(op.value, th.env)
        event = TraceEvent(pid, kind, var=z, label=label, value=value)
        try:
            if rule is Rule.LOAD:
                meta, record, _ = det.read(pid, th.meta, cell.record, z, label)
            else:
                meta, record, _ = det.write(pid, th.meta, cell.record, z, label)
        except Race as race:
            report = RaceReport(race.kind, z, pid, kind, race.conflicting)
            raise RaceStop(report, event._replace(attempted=True)) from None
        memory = dict(memory)
        memory[z] = Cell(value, record)
        result = UNIT if rule is Rule.STORE else value
        threads[pid] = _continue(th, binder, result, body, meta=meta, n_labels=th.n_labels + 1)
        events = (event,)

    elif rule is Rule.MAKE:
        name = f"{pid}/c{th.n_chans}"
        k = op.capacity
        channels = dict(channels)
        channels[name] = ChannelState(name, k, (), tuple(det.dummy_ticket() for _ in range(k)))
        threads[pid] = _continue(th, binder, ChanRef(name), body, n_chans=th.n_chans + 1)
        events = (TraceEvent(pid, "make", chan=name, capacity=k),)

    elif rule is Rule.GO:
        child = f"{pid}.{th.n_children + 1}"
        parent_meta, child_meta = det.spawn(pid, th.meta, child)
        threads[child] = _normalize(ThreadState(child, child_meta, op.body, th.env))
        threads[pid] = _continue(th, binder, UNIT, body, meta=parent_meta, n_children=th.n_children + 1)
        events = (TraceEvent(pid, "spawn", partner=child),)

    elif rule is Rule.SEND:
        ch = channels[choice.chan]
        value = _eval(op.value, th.env)
        message, meta = det.send(pid, th.meta, ch.backward[0])
        meta = _collect(det, meta, memory)
        seq = ch.sent + 1
        channels = dict(channels)
        channels[ch.name] = ch._replace(
            forward=ch.forward + ((value, message),), backward=ch.backward[1:], sent=seq
        )
        threads[pid] = _continue(th, binder, UNIT, body, meta=meta)
        events = (
            TraceEvent(pid, "send", chan=ch.name, seq=seq, value=value),
            TraceEvent(pid, "sendComplete", chan=ch.name, seq=seq),
        )

    elif rule is Rule.RECV:
        ch = channels[choice.chan]
        (value, message), rest = ch.forward[0], ch.forward[1:]
        ticket, meta = det.recv(pid, th.meta, message)
        meta = _collect(det, meta, memory)
        seq = ch.received + 1
        channels = dict(channels)
        channels[ch.name] = ch._replace(forward=rest, backward=ch.backward + (ticket,), received=seq)
        threads[pid] = _continue(th, binder, value, body, meta=meta)
        events = (
            TraceEvent(pid, "recv", chan=ch.name, seq=seq),
            TraceEvent(pid, "recvComplete", chan=ch.name, seq=seq, value=value),
        )

    elif rule is Rule.RECV_EOT:
        ch = channels[choice.chan]
        meta = det.recv_eot(pid, th.meta, ch.forward[0][1])
        meta = _collect(det, meta, memory)
        threads[pid] = _continue(th, binder, EOT, body, meta=meta)
        events = (TraceEvent(pid, "recvEOT", chan=ch.name),)

    elif rule is Rule.RENDEZVOUS:
        ch = channels[choice.chan]
        rpid = choice.partner
        rth = config.threads[rpid]
        _, rbinder, rbody = _head(rth, choice.partner_branch)
        value = _eval(op.value, th.env)
        smeta, rmeta = det.rendezvous(pid, th.meta, rpid, rth.meta)
        seq = ch.sent + 1
        channels = dict(channels)
        channels[ch.name] = ch._replace(sent=seq, received=seq)
        threads[pid] = _continue(th, binder, UNIT, body, meta=_collect(det, smeta, memory))
        threads[rpid] = _continue(rth, rbinder, value, rbody, meta=_collect(det, rmeta, memory))
        events = (TraceEvent(pid, "rendezvous", chan=ch.name, seq=seq, value=value, partner=rpid),)

    elif rule is Rule.CLOSE:
        ch = channels[choice.chan]
        eot, meta = det.close(pid, th.meta)
        channels = dict(channels)
        channels[ch.name] = ch._replace(forward=ch.forward + ((EOT, eot),), closed=True)
        threads[pid] = _continue(th, binder, UNIT, body, meta=meta)
        events = (TraceEvent(pid, "close", chan=ch.name),)

    elif rule is Rule.ACQUIRE:
        lock = locks[op.lock]
        meta = _collect(det, det.acquire(pid, th.meta, lock.meta), memory)
        locks = dict(locks)
        locks[lock.name] = LockState(lock.name, True, None)
        threads[pid] = _continue(th, binder, UNIT, body, meta=meta)
        events = (TraceEvent(pid, "acquire", lock=lock.name),)

    elif rule is Rule.RELEASE:
        lock = locks[op.lock]
        deposit, meta = det.release(pid, th.meta)
        locks = dict(locks)
        locks[lock.name] = LockState(lock.name, False, deposit)
        threads[pid] = _continue(th, binder, UNIT, body, meta=meta)
        events = (TraceEvent(pid, "release", lock=lock.name),)

    elif rule is Rule.DEFAULT:
        threads[pid] = _continue(th, binder, UNIT, body)
        events = (TraceEvent(pid, "tau"),)

    else:  # pragma: no cover
        raise ValueError(f"unknown rule {rule}")

    out = Config(threads, memory, channels, locks, det, config.steps + 1)
    if det.gc_mode == "every" and out.steps % det.gc_period == 0:
        out = _collect_all(out)
    return out, events


# ---------------------------------------------------------------------------
# Schedulers
# ---------------------------------------------------------------------------


class Scheduler(Protocol):
    def choose(self, config: Config, enabled: Sequence[StepChoice]) -> int: ...


class ScriptError(ValueError):
    """A scripted schedule named a step that is not enabled."""


class FirstScheduler:
    def choose(self, config: Config, enabled: Sequence[StepChoice]) -> int:
        return 0


class RandomScheduler:
    def __init__(self, seed: int) -> None:
        self.seed = seed
        self._rng = random.Random(seed)

    def choose(self, config: Config, enabled: Sequence[StepChoice]) -> int:
        return self._rng.randrange(len(enabled))


class ScriptedScheduler:
    """Replays a recorded schedule of indices or :class:`StepChoice` values.

    When the script runs out, the first enabled step is taken.
    """

    def __init__(self, script: Iterable[int | StepChoice | Mapping[str, Any]]) -> None:
        self.script = [
            choice_from_dict(s) if isinstance(s, Mapping) else s for s in script
        ]
        self._pos = 0

    def choose(self, config: Config, enabled: Sequence[StepChoice]) -> int:
        if self._pos >= len(self.script):
            return 0
        want = self.script[self._pos]
        self._pos += 1
        if isinstance(want, int):
            if not 0 <= want < len(enabled):
                raise ScriptError(f"step {self._pos - 1}: index {want} out of range")
            return want
        try:
            return list(enabled).index(want)
        except ValueError:
            raise ScriptError(f"step {self._pos - 1}: {want} is not enabled") from None


# ---------------------------------------------------------------------------
# Running a program
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    outcome: Outcome
    trace: list[TraceEvent]
    choices: list[StepChoice]
    config: Config
    report: RaceReport | None = None
    panic: str | None = None
    footprint: list[Any] = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return self.outcome is Outcome.RACE

    @property
    def race_kind(self) -> str | None:
        return None if self.report is None else self.report.kind


Observer = Callable[[Config], None]


def run(
    program: Program,
    detector: Detector | DetectorKind | str = DetectorKind.WAR,
    scheduler: Scheduler | None = None,
    max_steps: int = 10_000,
    observe: Observer | None = None,
) -> RunResult:
    """Run ``program`` until it stops, races, panics, deadlocks or runs out of steps.

    For a race, ``choices`` ends with the attempted step and ``trace`` ends
    with the attempted access marked ``attempted=True``.
    """
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    scheduler = scheduler or FirstScheduler()
    config = initial_config(program, detector)
    trace = initial_events(program)
    choices: list[StepChoice] = []
    if observe:
        observe(config)
    for _ in range(max_steps):
        enabled = enabled_steps(config)
        if not enabled:
            outcome = Outcome.OK if config.terminated else Outcome.DEADLOCK
            return RunResult(outcome, trace, choices, config)
        choice = enabled[scheduler.choose(config, enabled)]
        choices.append(choice)
        try:
            config, events = step(config, choice)
        except RaceStop as stop:
            trace.append(stop.event)
            return RunResult(Outcome.RACE, trace, choices, config, report=stop.report)
        except Panic as panic:
            trace.append(panic.event)
            return RunResult(Outcome.PANIC, trace, choices, config, panic=panic.reason)
        trace.extend(events)
        if observe:
            observe(config)
    if not enabled_steps(config):
        outcome = Outcome.OK if config.terminated else Outcome.DEADLOCK
        return RunResult(outcome, trace, choices, config)
    return RunResult(Outcome.BUDGET, trace, choices, config)


def replay(
    program: Program,
    choices: Sequence[StepChoice],
    detector: Detector | DetectorKind | str = DetectorKind.WAR,
    max_steps: int | None = None,
) -> RunResult:
    """Re-run a recorded choice sequence, then continue with the first enabled step."""
    return run(program, detector, ScriptedScheduler(choices), max_steps or max(len(choices), 1) + 10_000)
